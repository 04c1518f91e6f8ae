//! Tangent space of the moduli space at a coupled solution and the metric
//! and symplectic form restricted to it.
//!
//! The tangent space is the nullspace of the linearised coupled equations
//! together with the gauge-fixing condition P^* v = 0, both also composed
//! with the family's complex structure S, so that the result is S-invariant.

use super::continuation::{family_of, CoupledProblem};
use super::lm::fd_jacobian;
use super::{SolveError, SolverConfig};
use crate::fields::config::{Configuration, TangentVector, DOF_PER_FACE};
use crate::fields::residual::{residual, System};
use crate::kahler::forms::{face_gram, fujiki, fujiki_metric, gram_blocks, structure_blocks, FormSelector};
use crate::kahler::horizontal::Family;
use crate::kahler::local::{add, compose, jw, scale, sub, wb, FaceState, FaceTangent};
use crate::moment::adjoint::{apply_blocks, family_data, kernel_report, AdjointOperator, KernelReport};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

/// Residual level below which x counts as a solution of the coupled system.
pub const SOLUTION_TOL: f64 = 1e-6;
/// Relative singular value threshold of the nullspace.
pub const NULLSPACE_RTOL: f64 = 1e-8;
/// Retained and discarded singular values closer than this ratio make the
/// nullspace dimension ambiguous.
pub const MIN_GAP: f64 = 10.0;

fn system_of(family: Family) -> System {
    match family {
        Family::J => System::CoupledHarmonic,
        Family::I => System::CoupledHitchin,
    }
}

fn coupled_form(family: Family, alpha: f64, eps: f64) -> FormSelector {
    match family {
        Family::J => FormSelector::CoupledJ { alpha, eps },
        Family::I => FormSelector::CoupledI { alpha, eps },
    }
}

#[derive(Clone, Debug)]
pub struct ModuliBasis {
    pub family: Family,
    pub alpha: f64,
    pub eps: f64,
    /// Orthonormal columns in tangent coordinates.
    pub coords: DMatrix<f64>,
    pub vectors: Vec<TangentVector>,
    pub kernel: KernelReport,
    pub rows: usize,
    pub threshold: f64,
    /// Smallest retained over largest discarded singular value.
    pub gap: f64,
    pub ambiguous: bool,
    /// max |L b| over the basis, relative to the largest entry of L.
    pub linear_residual: f64,
    /// max |P^* b| over the basis.
    pub gauge_residual: f64,
    /// |(1 - B B^T) S B|, the failure of S to preserve the span.
    pub closure_error: f64,
}

impl ModuliBasis {
    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }
}

fn transposed(blocks: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    blocks.iter().map(|b| b.transpose()).collect()
}

/// Rows R as R S, through the block-diagonal S.
fn compose_rows(rows: &DMatrix<f64>, st: &[DMatrix<f64>]) -> DMatrix<f64> {
    apply_blocks(st, &rows.transpose()).transpose()
}

fn normalized(m: DMatrix<f64>) -> DMatrix<f64> {
    let s = m.amax();
    if s > 0.0 {
        m / s
    } else {
        m
    }
}

/// Orthonormal basis of the gauge-fixed solutions of the linearised coupled
/// equations at x.
pub fn moduli_basis(family: Family, x: &Configuration, alpha: f64, eps: f64, cfg: &SolverConfig) -> Result<ModuliBasis, SolveError> {
    let system = system_of(family);
    debug_assert_eq!(family_of(system)?, family);
    if !(alpha > 0.0) {
        return Err(SolveError::Precondition(format!("alpha = {alpha} must be positive")));
    }
    let r = residual(system, x, alpha, eps)?.max_abs();
    if r > SOLUTION_TOL {
        return Err(SolveError::Precondition(format!("coupled residual {r:.3e} at x")));
    }
    let n = DOF_PER_FACE * x.n_faces();
    if n > cfg.dim_cap {
        return Err(SolveError::TooLarge { size: n, cap: cfg.dim_cap });
    }
    let op = AdjointOperator::new(family, x, alpha, eps, cfg.dim_cap)?;
    let l_op = op.script_l();
    let kernel = kernel_report(family, alpha, eps, &l_op, 0.0);
    if kernel.kernel_dim > 0 {
        return Err(SolveError::NontrivialKernel(kernel.kernel_dim));
    }

    let problem = CoupledProblem { system, alpha, eps, mesh: &x.mesh };
    let lin = fd_jacobian(&problem, &x.to_vec()).ok_or_else(|| SolveError::Precondition("residual undefined near x".into()))?;
    let gauge = op.metric_action.transpose();
    let st = transposed(&structure_blocks(family.structure(), x));
    let blocks = [lin.clone(), compose_rows(&lin, &st), gauge.clone(), compose_rows(&gauge, &st)].map(normalized);
    let n_rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let size = n_rows.max(n);
    if size > 2 * cfg.dim_cap {
        return Err(SolveError::TooLarge { size, cap: 2 * cfg.dim_cap });
    }
    // Zero rows pad the system to square so the SVD returns a full V.
    let mut sys = DMatrix::zeros(size, n);
    let mut at = 0;
    for b in &blocks {
        sys.rows_mut(at, b.nrows()).copy_from(b);
        at += b.nrows();
    }
    let svd = sys.svd(false, true);
    let vt = svd.v_t.as_ref().ok_or_else(|| SolveError::Linear("SVD without right vectors".into()))?;
    let sv = &svd.singular_values;
    let smax = sv.max();
    let threshold = NULLSPACE_RTOL * smax;
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= threshold).collect();
    let retained_min = (0..sv.len()).filter(|&i| sv[i] > threshold).map(|i| sv[i]).fold(f64::INFINITY, f64::min);
    let discarded_max = keep.iter().map(|&i| sv[i]).fold(0.0, f64::max);
    let gap = if discarded_max > 0.0 { retained_min / discarded_max } else { f64::INFINITY };
    let mut coords = DMatrix::zeros(n, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        coords.set_column(c, &vt.row(i).transpose());
    }

    let linear_residual = (&blocks[0] * &coords).amax();
    let gauge_residual = (&gauge * &coords).amax();
    let sb = apply_blocks(&structure_blocks(family.structure(), x), &coords);
    let closure_error = (&sb - &coords * (coords.transpose() * &sb)).norm();
    let vectors = (0..coords.ncols()).map(|c| TangentVector::from_vec(x, coords.column(c).as_slice())).collect();
    Ok(ModuliBasis {
        family,
        alpha,
        eps,
        coords,
        vectors,
        kernel,
        rows: n_rows,
        threshold,
        gap,
        ambiguous: gap < MIN_GAP,
        linear_residual,
        gauge_residual,
        closure_error,
    })
}

/// J-family form in its gauge-fixed presentation.
fn omega_j_explicit(s: &FaceState, v: &FaceTangent, w: &FaceTangent) -> f64 {
    let j = &s.j;
    let jpsi = jw(s.psi, j);
    let (p1, p2) = (s.psi_of(&v.jdot), s.psi_of(&w.jdot));
    let (q1, q2) = (compose(jpsi, &v.jdot), compose(jpsi, &w.jdot));
    wb(sub(v.a, p1), jw(sub(w.psidot, q2), j)) - wb(sub(v.psidot, q1), jw(sub(w.a, p2), j)) - wb(p1, p2)
}

fn metric_j_explicit(s: &FaceState, v: &FaceTangent, w: &FaceTangent) -> f64 {
    let j = &s.j;
    let jpsi = jw(s.psi, j);
    let (p1, p2) = (s.psi_of(&v.jdot), s.psi_of(&w.jdot));
    let (q1, q2) = (compose(jpsi, &v.jdot), compose(jpsi, &w.jdot));
    wb(sub(v.a, p1), jw(sub(w.a, p2), j)) + wb(sub(v.psidot, q1), jw(sub(w.psidot, q2), j)) - wb(p1, jw(p2, j))
}

fn omega_i_explicit(s: &FaceState, v: &FaceTangent, w: &FaceTangent) -> f64 {
    let (pj1, pj2) = (s.psi_of(&(s.j * v.jdot)), s.psi_of(&(s.j * w.jdot)));
    wb(v.a, w.a) - wb(v.psidot, w.psidot) - 0.5 * wb(pj1, w.psidot) - 0.5 * wb(v.psidot, pj2)
        - 0.5 * wb(s.psi_of(&v.jdot), s.psi_of(&w.jdot))
}

fn metric_i_explicit(s: &FaceState, v: &FaceTangent, w: &FaceTangent) -> f64 {
    let j = &s.j;
    let shifted = |t: &FaceTangent| add(t.psidot, scale(s.psi_of(&(j * t.jdot)), 0.5));
    wb(v.a, jw(w.a, j)) + wb(shifted(v), jw(shifted(w), j)) - 0.25 * wb(s.psi_of(&v.jdot), jw(s.psi_of(&w.jdot), j))
}

/// Closed-form face kernels of the moduli form and metric of a family.
pub fn explicit_kernels(family: Family, alpha: f64, eps: f64) -> (impl Fn(&FaceState, &FaceTangent, &FaceTangent) -> f64, impl Fn(&FaceState, &FaceTangent, &FaceTangent) -> f64) {
    let omega = move |s: &FaceState, v: &FaceTangent, w: &FaceTangent| {
        let coupling = match family {
            Family::J => omega_j_explicit(s, v, w),
            Family::I => omega_i_explicit(s, v, w),
        };
        eps * fujiki(s, v, w) + alpha * coupling
    };
    let metric = move |s: &FaceState, v: &FaceTangent, w: &FaceTangent| {
        let coupling = match family {
            Family::J => metric_j_explicit(s, v, w),
            Family::I => metric_i_explicit(s, v, w),
        };
        eps * fujiki_metric(s, v, w) + alpha * coupling
    };
    (omega, metric)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModuliReport {
    pub family: Family,
    pub alpha: f64,
    pub eps: f64,
    pub config_hash: String,
    /// Kernel dimension of L (zero on the regular locus).
    pub kernel_dim: usize,
    pub basis_dim: usize,
    pub metric: Vec<Vec<f64>>,
    pub form: Vec<Vec<f64>>,
    pub signature: Signature,
    pub min_abs_eigenvalue: f64,
    pub max_abs_eigenvalue: f64,
    pub nondegenerate: bool,
    pub metric_asymmetry: f64,
    pub form_symmetry: f64,
    /// max |g - omega C| with C the matrix of S on the basis.
    pub compatibility_error: f64,
    pub closure_error: f64,
    /// max |explicit - generic| for the form and for the metric.
    pub form_discrepancy: f64,
    pub metric_discrepancy: f64,
    /// Dimension of the J-constant part of the basis span.
    pub vertical_dim: usize,
    /// I-family only: max |g - alpha g_hk| on the J-constant part.
    pub vertical_error: Option<f64>,
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn congruence(blocks: &[DMatrix<f64>], b: &DMatrix<f64>) -> DMatrix<f64> {
    b.transpose() * apply_blocks(blocks, b)
}

/// Orthonormal basis of the J-constant vectors in the span of `b`.
fn vertical_subspace(b: &DMatrix<f64>) -> DMatrix<f64> {
    let n_faces = b.nrows() / DOF_PER_FACE;
    let jrows = DMatrix::from_fn(2 * n_faces, b.ncols(), |i, c| b[(DOF_PER_FACE * (i / 2) + i % 2, c)]);
    let mut sq = DMatrix::zeros(jrows.nrows().max(b.ncols()), b.ncols());
    sq.rows_mut(0, jrows.nrows()).copy_from(&jrows);
    let svd = sq.svd(false, true);
    let smax = svd.singular_values.max().max(f64::MIN_POSITIVE);
    let vt = svd.v_t.expect("requested");
    let cols: Vec<DVector<f64>> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= NULLSPACE_RTOL * smax || smax <= f64::MIN_POSITIVE)
        .map(|i| b * vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(b.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Metric and form of the family restricted to the basis, with the
/// structural checks.
pub fn moduli_metric(x: &Configuration, basis: &ModuliBasis) -> Result<ModuliReport, SolveError> {
    let (family, alpha, eps) = (basis.family, basis.alpha, basis.eps);
    let b = &basis.coords;
    let (_, metric_sel, _) = family_data(family, alpha, eps);
    let g = congruence(&gram_blocks(metric_sel, x)?, b);
    let omega = congruence(&gram_blocks(coupled_form(family, alpha, eps), x)?, b);
    let c = b.transpose() * apply_blocks(&structure_blocks(family.structure(), x), b);

    let (ok, mk) = explicit_kernels(family, alpha, eps);
    let states: Vec<FaceState> = (0..x.n_faces()).map(|f| FaceState::of(x, f)).collect();
    let ob: Vec<DMatrix<f64>> = crate::par::map_indexed(states.len(), |f| face_gram(&states[f], &ok));
    let mb: Vec<DMatrix<f64>> = crate::par::map_indexed(states.len(), |f| face_gram(&states[f], &mk));
    let form_discrepancy = (congruence(&ob, b) - &omega).amax();
    let metric_discrepancy = (congruence(&mb, b) - &g).amax();

    let eig = SymmetricEigen::new((&g + g.transpose()) * 0.5).eigenvalues;
    let max_abs = eig.amax();
    let min_abs = eig.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
    let tol = NULLSPACE_RTOL * max_abs;
    let signature = Signature {
        positive: eig.iter().filter(|&&e| e > tol).count(),
        negative: eig.iter().filter(|&&e| e < -tol).count(),
        zero: eig.iter().filter(|&&e| e.abs() <= tol).count(),
    };

    let w = vertical_subspace(b);
    let vertical_error = match family {
        Family::I if w.ncols() > 0 => {
            let gw = congruence(&gram_blocks(metric_sel, x)?, &w);
            let hk = congruence(&gram_blocks(FormSelector::HkMetric, x)?, &w);
            Some((gw - hk * alpha).amax())
        }
        _ => None,
    };

    Ok(ModuliReport {
        family,
        alpha,
        eps,
        config_hash: x.hash(),
        kernel_dim: basis.kernel.kernel_dim,
        basis_dim: basis.dim(),
        metric_asymmetry: (&g - g.transpose()).amax(),
        form_symmetry: (&omega + omega.transpose()).amax(),
        compatibility_error: (&g - &omega * &c).amax(),
        closure_error: basis.closure_error,
        metric: rows_of(&g),
        form: rows_of(&omega),
        nondegenerate: !eig.is_empty() && min_abs > tol,
        signature,
        min_abs_eigenvalue: if !eig.is_empty() { min_abs } else { 0.0 },
        max_abs_eigenvalue: max_abs,
        form_discrepancy,
        metric_discrepancy,
        vertical_dim: w.ncols(),
        vertical_error,
    })
}
