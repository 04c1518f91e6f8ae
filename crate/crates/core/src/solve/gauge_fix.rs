//! Orthogonal splitting of tangent vectors into a pure gauge part and a
//! gauge-fixed part: v = P z + (v - P z) with L z = P^* v.

use super::SolveError;
use crate::fields::config::{Configuration, TangentVector};
use crate::kahler::horizontal::Family;
use crate::moment::adjoint::{kernel_report, AdjointOperator, KernelReport};
use crate::moment::maps::GaugeParameter;
use nalgebra::{DMatrix, DVector, Dyn, LU};

/// Factorised L of one family at one configuration, reusable across vectors.
pub struct GaugeFixer {
    pub op: AdjointOperator,
    pub kernel: KernelReport,
    lu: LU<f64, Dyn, Dyn>,
}

#[derive(Clone, Debug)]
pub struct Splitting {
    /// P z, the pure gauge part.
    pub gauge: TangentVector,
    /// v - P z, which satisfies P^* (v - P z) = 0.
    pub fixed: TangentVector,
    pub parameter: GaugeParameter,
}

impl GaugeFixer {
    /// Fails with [`SolveError::NontrivialKernel`] outside the regular locus.
    pub fn new(family: Family, x: &Configuration, alpha: f64, eps: f64, cap: usize) -> Result<Self, SolveError> {
        let op = AdjointOperator::new(family, x, alpha, eps, cap)?;
        let l = op.script_l();
        let raw = op.action.transpose() * &op.metric_action;
        let sym = (&raw - raw.transpose()).norm() / raw.norm().max(f64::MIN_POSITIVE);
        let kernel = kernel_report(family, alpha, eps, &l, sym);
        if kernel.kernel_dim > 0 {
            return Err(SolveError::NontrivialKernel(kernel.kernel_dim));
        }
        Ok(GaugeFixer { lu: l.lu(), op, kernel })
    }

    pub fn split(&self, x: &Configuration, v: &TangentVector) -> Result<Splitting, SolveError> {
        v.check(x)?;
        let vc = DVector::from_vec(v.to_vec(x));
        let rhs = self.op.adjoint_coords(&vc);
        let z = self.lu.solve(&rhs).ok_or_else(|| SolveError::Linear("L is singular".into()))?;
        let pz = &self.op.action * &z;
        Ok(Splitting {
            gauge: TangentVector::from_vec(x, pz.as_slice()),
            fixed: TangentVector::from_vec(x, (vc - &pz).as_slice()),
            parameter: self.op.basis.combine(&z),
        })
    }

    /// Matrix of the projection onto Im P in tangent coordinates.
    pub fn projector(&self) -> Result<DMatrix<f64>, SolveError> {
        let z = self.lu.solve(&self.op.metric_action.transpose()).ok_or_else(|| SolveError::Linear("L is singular".into()))?;
        Ok(&self.op.action * z)
    }
}

/// (Pi v, v - Pi v) for the family's action.
pub fn gauge_fix(family: Family, x: &Configuration, alpha: f64, eps: f64, v: &TangentVector, cap: usize) -> Result<(TangentVector, TangentVector), SolveError> {
    let s = GaugeFixer::new(family, x, alpha, eps, cap)?.split(x, v)?;
    Ok((s.gauge, s.fixed))
}
