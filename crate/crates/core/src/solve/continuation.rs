//! Continuation of coupled solutions in the coupling constant alpha.

use super::lm::{minimize, LeastSquares, Stop, TraceRow};
use super::{SolveError, SolverConfig};
use crate::fields::config::{check_epsilon, Configuration};
use crate::fields::residual::{residual, System};
use crate::kahler::forms::{gram_blocks, FormSelector};
use crate::kahler::horizontal::Family;
use crate::mesh_dec::geometry::scalar_curvature;
use crate::mesh_dec::mesh::SurfaceMesh;
use crate::moment::action::{infinitesimal_action, ActionVariant};
use crate::moment::adjoint::{apply_blocks, operator_script_l, KernelReport, ParamBasis, KERNEL_RTOL};
use crate::par;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::sync::Arc;

/// Family whose operator L governs the moduli of each coupled system.
pub fn family_of(system: System) -> Result<Family, SolveError> {
    match system {
        System::CoupledHarmonic => Ok(Family::J),
        System::CoupledHitchin => Ok(Family::I),
        s => Err(SolveError::Precondition(format!("{s:?} is not a coupled system"))),
    }
}

pub(crate) struct CoupledProblem<'a> {
    pub system: System,
    pub alpha: f64,
    pub eps: f64,
    pub mesh: &'a Arc<SurfaceMesh>,
}

impl LeastSquares for CoupledProblem<'_> {
    fn n_params(&self) -> usize {
        crate::fields::DOF_PER_FACE * self.mesh.n_faces()
    }

    fn residual(&self, z: &[f64]) -> Option<Vec<f64>> {
        let x = Configuration::from_vec(self.mesh.clone(), z);
        scalar_curvature(self.mesh, &x.j).ok()?;
        residual(self.system, &x, self.alpha, self.eps).ok().map(|r| r.flatten())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuationStep {
    pub alpha: f64,
    pub residual_max: f64,
    pub iterations: usize,
    pub stop: Stop,
    /// Max change of the scalar residual relative to the first step.
    pub scalar_drift: f64,
    /// Kernel of L; not assembled at alpha = 0, where L degenerates.
    pub kernel: Option<KernelReport>,
    pub config_hash: String,
    pub trace: Vec<TraceRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuationReport {
    pub system: System,
    pub eps: f64,
    pub steps: Vec<ContinuationStep>,
    /// Reason the continuation stopped early, if it did.
    pub breakdown: Option<String>,
    #[serde(skip)]
    pub configurations: Vec<Configuration>,
}

impl ContinuationReport {
    pub fn completed(&self) -> bool {
        self.breakdown.is_none()
    }
}

fn scalar_part(system: System, x: &Configuration, alpha: f64, eps: f64) -> Result<Vec<f64>, SolveError> {
    Ok(residual(system, x, alpha, eps)?.get("scalar").map(|s| s.to_vec()).unwrap_or_default())
}

/// Follow the coupled system along `cfg.schedule`, correcting each step by
/// damped Newton from the previous solution. The seed must solve the system
/// at the first schedule value.
pub fn continue_alpha(system: System, seed: &Configuration, eps: f64, cfg: &SolverConfig) -> Result<ContinuationReport, SolveError> {
    cfg.validate()?;
    check_epsilon(eps)?;
    let family = family_of(system)?;
    let first = *cfg.schedule.first().ok_or_else(|| SolveError::Config("empty schedule".into()))?;
    let r0 = residual(system, seed, first, eps)?.max_abs();
    if r0 > cfg.tolerance {
        return Err(SolveError::Precondition(format!("seed residual {r0:.3e} at alpha = {first}")));
    }
    let scalar0 = scalar_part(system, seed, first, eps)?;
    let mut report = ContinuationReport { system, eps, steps: Vec::new(), breakdown: None, configurations: Vec::new() };
    let mut x = seed.clone();
    for &alpha in &cfg.schedule {
        let problem = CoupledProblem { system, alpha, eps, mesh: &x.mesh };
        let out = minimize(&problem, x.to_vec(), cfg)?;
        let next = Configuration::from_vec(x.mesh.clone(), &out.z);
        let scalar = scalar_part(system, &next, alpha, eps)?;
        let scalar_drift = scalar.iter().zip(&scalar0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let kernel = if alpha > 0.0 { Some(operator_script_l(family, &next, alpha, eps, cfg.dim_cap)?.1) } else { None };
        report.steps.push(ContinuationStep {
            alpha,
            residual_max: out.residual_max,
            iterations: out.iterations,
            stop: out.stop,
            scalar_drift,
            kernel: kernel.clone(),
            config_hash: next.hash(),
            trace: out.trace.clone(),
        });
        report.configurations.push(next.clone());
        if !out.converged() {
            report.breakdown = Some(format!("corrector stopped with {:?} at alpha = {alpha}", out.stop));
            break;
        }
        if let Some(k) = kernel.filter(|k| k.kernel_dim > 0) {
            report.breakdown = Some(format!("kernel of L has dimension {} at alpha = {alpha}", k.kernel_dim));
            break;
        }
        x = next;
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct IrreducibilityReport {
    pub dim: usize,
    pub kernel_dim: usize,
    pub smallest_singular_value: f64,
    pub largest_singular_value: f64,
}

/// Numerical irreducibility of (A, psi): the gauge block P_u^T g_hk P_u of L
/// with the coupling constant scaled out must have trivial kernel, since its
/// kernel is the Lie algebra of the stabiliser.
pub fn irreducibility_report(x: &Configuration) -> Result<IrreducibilityReport, SolveError> {
    let basis = ParamBasis::new(&x.mesh);
    let (nf, dim) = (basis.n_f(), basis.dim());
    let cols = par::map_coarse(dim - nf, |i| infinitesimal_action(ActionVariant::P, x, &basis.element(nf + i)).map(|t| t.to_vec(x)));
    let mut p = DMatrix::zeros(crate::fields::DOF_PER_FACE * x.n_faces(), dim - nf);
    for (i, c) in cols.into_iter().enumerate() {
        p.set_column(i, &DVector::from_vec(c?));
    }
    let blocks = gram_blocks(FormSelector::HkMetric, x)?;
    let l = p.transpose() * apply_blocks(&blocks, &p);
    let sv = l.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    Ok(IrreducibilityReport {
        dim: dim - nf,
        kernel_dim: sv.iter().filter(|&&s| s <= KERNEL_RTOL * smax).count(),
        smallest_singular_value: smin,
        largest_singular_value: smax,
    })
}
