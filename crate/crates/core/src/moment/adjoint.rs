//! Formal adjoints of the infinitesimal actions and the operator
//! L = P^* P on the space of gauge parameters.
//!
//! Parameters are expanded in an orthonormal basis for the lumped product
//! <zeta1, zeta2>_0 = sum_v m_v (f1 f2 + B(u1, u2)) on mean-zero f, so the
//! matrix of L is symmetric by construction. The adjoint is the exact
//! transpose through the per-face Gram blocks of the family metric; the
//! finite-difference form d mu o S is kept as an independent check.

use super::action::{infinitesimal_action, ActionVariant};
use super::checks::MOMENT_STEP;
use super::maps::{moment_eval, GaugeParameter, MomentSelector};
use super::MomentError;
use crate::fd::derivative_vec;
use crate::fields::config::{Configuration, TangentVector, DOF_PER_FACE};
use crate::kahler::forms::{gram_blocks, FormSelector};
use crate::kahler::horizontal::Family;
use crate::kahler::structures::apply_structure;
use crate::lie::K;
use crate::mesh_dec::mesh::SurfaceMesh;
use crate::par;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Default cap on the dimension of the parameter space for dense assembly.
pub const DEFAULT_DIM_CAP: usize = 2000;

/// Orthonormal basis of the real parameter space (mean-zero f, u).
#[derive(Clone, Debug)]
pub struct ParamBasis {
    n_vertices: usize,
    /// Columns: m-orthonormal basis of mean-zero vertex functions.
    f_basis: DMatrix<f64>,
    inv_sqrt_mass: Vec<f64>,
}

impl ParamBasis {
    pub fn new(mesh: &SurfaceMesh) -> Self {
        let nv = mesh.n_vertices();
        let m = mesh.vertex_masses();
        let s = DVector::from_iterator(nv, m.iter().map(|m| m.sqrt()));
        // Householder reflection taking s/|s| to e_0; its other columns span s^perp.
        let mut w = s.normalize();
        w[0] -= 1.0;
        let h = if w.norm() < 1e-14 {
            DMatrix::identity(nv, nv)
        } else {
            let w = w.normalize();
            DMatrix::identity(nv, nv) - &w * w.transpose() * 2.0
        };
        let mut f_basis = h.columns(1, nv - 1).into_owned();
        for (i, mut row) in f_basis.row_iter_mut().enumerate() {
            row /= m[i].sqrt();
        }
        ParamBasis { n_vertices: nv, f_basis, inv_sqrt_mass: m.iter().map(|m| 1.0 / m.sqrt()).collect() }
    }

    pub fn n_f(&self) -> usize {
        self.n_vertices - 1
    }

    pub fn dim(&self) -> usize {
        self.n_f() + 3 * self.n_vertices
    }

    pub fn element(&self, i: usize) -> GaugeParameter {
        let nv = self.n_vertices;
        let mut p = GaugeParameter { f: vec![0.0; nv], u: vec![K::ZERO; nv], complex: None };
        if i < self.n_f() {
            p.f = self.f_basis.column(i).iter().copied().collect();
        } else {
            let k = i - self.n_f();
            let (v, c) = (k / 3, k % 3);
            p.u[v].0[c] = self.inv_sqrt_mass[v];
        }
        p
    }

    /// Coordinates of zeta in the basis; the mean of f is dropped.
    pub fn coords(&self, mesh: &SurfaceMesh, zeta: &GaugeParameter) -> DVector<f64> {
        let m = mesh.vertex_masses();
        let mf = DVector::from_iterator(self.n_vertices, zeta.f.iter().zip(m).map(|(f, m)| f * m));
        let mut out = DVector::zeros(self.dim());
        out.rows_mut(0, self.n_f()).copy_from(&(self.f_basis.transpose() * mf));
        for (v, u) in zeta.u.iter().enumerate() {
            for c in 0..3 {
                out[self.n_f() + 3 * v + c] = u.0[c] * m[v] * self.inv_sqrt_mass[v];
            }
        }
        out
    }

    pub fn combine(&self, c: &DVector<f64>) -> GaugeParameter {
        let nv = self.n_vertices;
        let f = &self.f_basis * c.rows(0, self.n_f());
        let u = (0..nv)
            .map(|v| K([0, 1, 2].map(|k| c[self.n_f() + 3 * v + k] * self.inv_sqrt_mass[v])))
            .collect();
        GaugeParameter { f: f.iter().copied().collect(), u, complex: None }
    }
}

/// Action, metric and structure used by each family.
pub fn family_data(family: Family, alpha: f64, eps: f64) -> (ActionVariant, FormSelector, MomentSelector) {
    match family {
        Family::J => (ActionVariant::PTilde, FormSelector::MetricJFamily { alpha, eps }, MomentSelector::ExtendedJ { alpha, eps }),
        Family::I => (ActionVariant::P, FormSelector::MetricIFamily { alpha, eps }, MomentSelector::ExtendedI { alpha, eps }),
    }
}

/// Dense action matrix in tangent coordinates, one column per basis element.
pub fn action_matrix(variant: ActionVariant, x: &Configuration, basis: &ParamBasis) -> Result<DMatrix<f64>, MomentError> {
    let cols = par::map_coarse(basis.dim(), |i| infinitesimal_action(variant, x, &basis.element(i)).map(|t| t.to_vec(x)));
    let n = DOF_PER_FACE * x.n_faces();
    let mut m = DMatrix::zeros(n, basis.dim());
    for (i, c) in cols.into_iter().enumerate() {
        m.set_column(i, &DVector::from_vec(c?));
    }
    Ok(m)
}

/// Block-diagonal product G * M with per-face Gram blocks.
pub fn apply_blocks(blocks: &[DMatrix<f64>], m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for (f, b) in blocks.iter().enumerate() {
        let rows = m.rows(DOF_PER_FACE * f, DOF_PER_FACE);
        out.rows_mut(DOF_PER_FACE * f, DOF_PER_FACE).copy_from(&(b * rows));
    }
    out
}

/// Precomputed action and metric of one family at one configuration.
#[derive(Clone, Debug)]
pub struct AdjointOperator {
    pub family: Family,
    pub alpha: f64,
    pub eps: f64,
    pub basis: ParamBasis,
    /// Action matrix (tangent coordinates by parameter coordinates).
    pub action: DMatrix<f64>,
    /// Metric applied to the action matrix.
    pub metric_action: DMatrix<f64>,
    pub blocks: Vec<DMatrix<f64>>,
}

impl AdjointOperator {
    pub fn new(family: Family, x: &Configuration, alpha: f64, eps: f64, cap: usize) -> Result<Self, MomentError> {
        let basis = ParamBasis::new(&x.mesh);
        if basis.dim() > cap {
            return Err(MomentError::TooLarge { size: basis.dim(), cap });
        }
        let (variant, metric, _) = family_data(family, alpha, eps);
        let blocks = gram_blocks(metric, x)?;
        let action = action_matrix(variant, x, &basis)?;
        let metric_action = apply_blocks(&blocks, &action);
        Ok(AdjointOperator { family, alpha, eps, basis, action, metric_action, blocks })
    }

    /// Coordinates of the adjoint applied to tangent coordinates v.
    pub fn adjoint_coords(&self, v: &DVector<f64>) -> DVector<f64> {
        self.metric_action.transpose() * v
    }

    /// Matrix of L = P^* P in the orthonormal parameter basis.
    pub fn script_l(&self) -> DMatrix<f64> {
        let l = self.action.transpose() * &self.metric_action;
        (&l + l.transpose()) * 0.5
    }
}

/// Adjoint of the family's action applied to v, as a gauge parameter.
pub fn adjoint_action(family: Family, x: &Configuration, alpha: f64, eps: f64, v: &TangentVector) -> Result<GaugeParameter, MomentError> {
    let op = AdjointOperator::new(family, x, alpha, eps, DEFAULT_DIM_CAP)?;
    let c = op.adjoint_coords(&DVector::from_vec(v.to_vec(x)));
    Ok(op.basis.combine(&c))
}

/// Basis coordinates of d mu(x)[S v], by finite differences of the family's
/// moment map; S is the family's total complex structure.
pub fn adjoint_fd(family: Family, x: &Configuration, alpha: f64, eps: f64, v: &TangentVector) -> Result<DVector<f64>, MomentError> {
    let (_, _, sel) = family_data(family, alpha, eps);
    let basis = ParamBasis::new(&x.mesh);
    let sv = apply_structure(family.structure(), x, v)?;
    let params: Vec<GaugeParameter> = (0..basis.dim()).map(|i| basis.element(i)).collect();
    moment_eval(sel, x, &params[0])?;
    let eval = |y: &Configuration| -> Vec<f64> {
        par::map_coarse(params.len(), |i| moment_eval(sel, y, &params[i]).expect("validated at x"))
    };
    let d = derivative_vec(|t| eval(&x.step(&sv, t)), MOMENT_STEP)?;
    Ok(DVector::from_vec(d))
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelReport {
    pub family: String,
    pub alpha: f64,
    pub eps: f64,
    pub dim: usize,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    pub kernel_dim: usize,
    pub symmetry_error: f64,
}

/// Relative threshold for the numerical kernel.
pub const KERNEL_RTOL: f64 = 1e-8;

/// Assemble L for the family and report its numerical kernel.
pub fn operator_script_l(family: Family, x: &Configuration, alpha: f64, eps: f64, cap: usize) -> Result<(DMatrix<f64>, KernelReport), MomentError> {
    let op = AdjointOperator::new(family, x, alpha, eps, cap)?;
    let raw = op.action.transpose() * &op.metric_action;
    let symmetry_error = (&raw - raw.transpose()).norm() / raw.norm().max(f64::MIN_POSITIVE);
    let l = op.script_l();
    Ok((l.clone(), kernel_report(family, alpha, eps, &l, symmetry_error)))
}

pub fn kernel_report(family: Family, alpha: f64, eps: f64, l: &DMatrix<f64>, symmetry_error: f64) -> KernelReport {
    let mut sv: Vec<f64> = l.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let threshold = KERNEL_RTOL * sv.first().copied().unwrap_or(0.0);
    KernelReport {
        family: format!("{family:?}"),
        alpha,
        eps,
        dim: l.nrows(),
        kernel_dim: sv.iter().filter(|&&s| s <= threshold).count(),
        singular_values: sv,
        threshold,
        symmetry_error,
    }
}
