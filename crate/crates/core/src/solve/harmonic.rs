//! Flat seeds, harmonic reductions and Hitchin solutions at fixed J.
//!
//! The unknowns are (A, psi) on every face. Harmonic reduction is solved as
//! one Gauss-Newton system on [F_D; d_A* psi]: the minimum-norm steps move the
//! input as little as possible, so a flat input stays on (a discrete
//! neighbourhood of) its orbit.

use super::lm::{minimize, LeastSquares, Outcome};
use super::{SolveError, SolverConfig};
use crate::fields::circle::{to_complex, to_unitary, ComplexHiggs};
use crate::fields::config::Configuration;
use crate::fields::residual::{residual, System};
use crate::lie::K;
use crate::mesh_dec::faceform::FaceForm1;
use crate::mesh_dec::geometry::ComplexStructureField;
use crate::mesh_dec::mesh::SurfaceMesh;
use rand::Rng;
use std::sync::Arc;

/// Bound on |psi| beyond which the Hitchin solve is declared divergent.
pub const DIVERGENCE_GUARD: f64 = 1e6;

const FIELD_DOF: usize = 12;

struct FieldProblem<'a> {
    system: System,
    mesh: &'a Arc<SurfaceMesh>,
    j: &'a ComplexStructureField,
}

fn pack(a: &FaceForm1<K>, psi: &FaceForm1<K>) -> Vec<f64> {
    a.w.iter().zip(&psi.w).flat_map(|(a, p)| [a[0], a[1], p[0], p[1]].into_iter().flat_map(|k| k.0)).collect()
}

fn unpack(z: &[f64]) -> (FaceForm1<K>, FaceForm1<K>) {
    let k = |c: &[f64]| K([c[0], c[1], c[2]]);
    let (a, psi) = z.chunks(FIELD_DOF).map(|c| ([k(&c[0..3]), k(&c[3..6])], [k(&c[6..9]), k(&c[9..12])])).unzip();
    (FaceForm1 { w: a }, FaceForm1 { w: psi })
}

impl FieldProblem<'_> {
    fn config(&self, z: &[f64]) -> Configuration {
        let (a, psi) = unpack(z);
        Configuration { mesh: self.mesh.clone(), j: self.j.clone(), a, psi }
    }
}

impl LeastSquares for FieldProblem<'_> {
    fn n_params(&self) -> usize {
        FIELD_DOF * self.mesh.n_faces()
    }

    fn residual(&self, z: &[f64]) -> Option<Vec<f64>> {
        residual(self.system, &self.config(z), 0.0, 1.0).ok().map(|r| r.flatten())
    }
}

fn solve_fields(system: System, x0: &Configuration, cfg: &SolverConfig) -> Result<(Configuration, Outcome), SolveError> {
    let p = FieldProblem { system, mesh: &x0.mesh, j: &x0.j };
    if p.n_params() > cfg.dim_cap * 4 {
        return Err(SolveError::TooLarge { size: p.n_params(), cap: cfg.dim_cap * 4 });
    }
    let out = minimize(&p, pack(&x0.a, &x0.psi), cfg)?;
    Ok((p.config(&out.z), out))
}

/// A flat SL(2,C) connection near a random start of size `amp`.
pub fn flat_seed<R: Rng>(mesh: Arc<SurfaceMesh>, j: ComplexStructureField, rng: &mut R, amp: f64, cfg: &SolverConfig) -> Result<(Configuration, Outcome), SolveError> {
    let start = Configuration::random(mesh, rng, 0.0, amp).with_j(j);
    solve_fields(System::Flat, &start, cfg)
}

/// Solve the harmonicity system from a flat input. The outcome's stop reason
/// distinguishes a stall at a stationary point (typical near reducible
/// connections) from running out of iterations.
pub fn solve_harmonic(x0: &Configuration, cfg: &SolverConfig) -> Result<(Configuration, Outcome), SolveError> {
    let flat = residual(System::Flat, x0, 0.0, 1.0)?.max_abs();
    if flat > cfg.tolerance {
        return Err(SolveError::Precondition(format!("input is not flat: residual {flat:.3e}")));
    }
    solve_fields(System::Harmonicity, x0, cfg)
}

/// Solve Hitchin's equations for (A, phi) at fixed J, through the unitary
/// Higgs field psi = to_unitary(phi).
pub fn solve_hitchin(
    mesh: Arc<SurfaceMesh>,
    j: &ComplexStructureField,
    a0: &FaceForm1<K>,
    phi0: &ComplexHiggs,
    cfg: &SolverConfig,
) -> Result<(FaceForm1<K>, ComplexHiggs, Outcome), SolveError> {
    let x0 = Configuration { mesh, j: j.clone(), a: a0.clone(), psi: to_unitary(phi0) };
    let (x, out) = solve_fields(System::Hitchin, &x0, cfg)?;
    let norm = x.psi.norm_sq().sqrt();
    if !(norm <= DIVERGENCE_GUARD) {
        return Err(SolveError::Diverged(norm));
    }
    let phi = to_complex(&x.j.j, &x.psi);
    Ok((x.a, phi, out))
}
