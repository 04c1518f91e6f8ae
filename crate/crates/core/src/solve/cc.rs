//! Constant curvature structures: S_J = 2 pi chi / V at every vertex.

use super::lm::{minimize, LeastSquares, Outcome};
use super::{SolveError, SolverConfig};
use crate::mesh_dec::geometry::{scalar_curvature, ComplexStructureField};
use crate::mesh_dec::mesh::SurfaceMesh;

/// Unknowns are the chart coordinates (log p, r) of J on every face; a
/// structure whose conforming metric breaks a triangle inequality is outside
/// the domain and rejected by the line search.
struct CcProblem<'a> {
    mesh: &'a SurfaceMesh,
    target: Vec<f64>,
}

impl LeastSquares for CcProblem<'_> {
    fn n_params(&self) -> usize {
        2 * self.mesh.n_faces()
    }

    fn residual(&self, z: &[f64]) -> Option<Vec<f64>> {
        let j = unpack(z);
        let s = scalar_curvature(self.mesh, &j).ok()?;
        Some(s.iter().zip(&self.target).map(|(s, t)| s - t).collect())
    }
}

fn pack(j: &ComplexStructureField) -> Vec<f64> {
    j.chart().into_iter().flat_map(|(a, b)| [a, b]).collect()
}

fn unpack(z: &[f64]) -> ComplexStructureField {
    ComplexStructureField::from_chart(&z.chunks(2).map(|c| (c[0], c[1])).collect::<Vec<_>>())
}

/// Smallest homotopy increment tried before giving up.
const MIN_HOMOTOPY_STEP: f64 = 1.0 / 64.0;

/// Damped Gauss-Newton on the curvature defect, along a homotopy of targets
/// from the initial curvature to the constant one: far from the target the
/// direct solve runs into degenerate triangles. Non-convergence is reported
/// through the outcome, which always carries the best iterate.
pub fn solve_cc_metric(mesh: &SurfaceMesh, j0: &ComplexStructureField, cfg: &SolverConfig) -> Result<(ComplexStructureField, Outcome), SolveError> {
    if j0.j.len() != mesh.n_faces() {
        return Err(SolveError::Precondition("structure does not match the mesh".into()));
    }
    let s0 = scalar_curvature(mesh, j0)?;
    let t = mesh.curvature_target();
    let target = |tau: f64| s0.iter().map(|s| (1.0 - tau) * s + tau * t).collect::<Vec<f64>>();
    let direct = minimize(&CcProblem { mesh, target: target(1.0) }, pack(j0), cfg)?;
    if direct.converged() {
        let j = if direct.iterations == 0 { j0.clone() } else { unpack(&direct.z) };
        return Ok((j, direct));
    }
    let (mut tau, mut dtau, mut z): (f64, f64, _) = (0.0, 0.5, pack(j0));
    let mut trace = direct.trace.clone();
    let mut iterations = direct.iterations;
    loop {
        let next = (tau + dtau).min(1.0);
        let out = minimize(&CcProblem { mesh, target: target(next) }, z.clone(), cfg)?;
        iterations += out.iterations;
        if out.converged() {
            trace.extend(out.trace.iter().skip(1).cloned());
            z = out.z.clone();
            tau = next;
            if tau >= 1.0 {
                return Ok((unpack(&z), Outcome { iterations, trace, ..out }));
            }
            dtau *= 2.0;
        } else {
            dtau = dtau.min(1.0 - tau) * 0.5;
            if dtau < MIN_HOMOTOPY_STEP {
                let best = if direct.objective <= out.objective { direct } else { out };
                return Ok((unpack(&best.z), Outcome { iterations, trace, ..best }));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_dec::geometry::angle_defects;
    use crate::mesh_dec::mesh::build_surface;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn perturbed(mesh: &SurfaceMesh, seed: u64, amp: f64) -> ComplexStructureField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = ComplexStructureField::reference(mesh).chart();
        ComplexStructureField::from_chart(&base.iter().map(|&(a, b)| (a + rng.gen_range(-amp..amp), b + rng.gen_range(-amp..amp))).collect::<Vec<_>>())
    }

    #[test]
    fn flat_torus_is_a_fixed_point() {
        let mesh = build_surface(1, 1).unwrap();
        let j0 = ComplexStructureField::reference(&mesh);
        let (j, out) = solve_cc_metric(&mesh, &j0, &SolverConfig::default()).unwrap();
        assert!(out.converged() && out.iterations == 0);
        assert_eq!(j, j0);
    }

    #[test]
    fn perturbed_torus_returns_to_zero_curvature() {
        let mesh = build_surface(1, 0).unwrap();
        let (j, out) = solve_cc_metric(&mesh, &perturbed(&mesh, 1, 0.2), &SolverConfig::default()).unwrap();
        assert!(out.converged(), "{:?}", out.stop);
        assert!(scalar_curvature(&mesh, &j).unwrap().iter().all(|s| s.abs() < 1e-10));
    }

    #[test]
    fn genus_two_reaches_constant_negative_curvature() {
        let mesh = build_surface(2, 0).unwrap();
        let (j, out) = solve_cc_metric(&mesh, &perturbed(&mesh, 2, 0.02), &SolverConfig::default()).unwrap();
        assert!(out.converged(), "{:?}", out.trace.last());
        let t = mesh.curvature_target();
        let s = scalar_curvature(&mesh, &j).unwrap();
        assert!(s.iter().all(|s| (s - t).abs() < 1e-10 && *s < 0.0));
        // Gauss-Bonnet is untouched by the solve.
        let total: f64 = angle_defects(&mesh, &j).iter().sum();
        assert!((total - 2.0 * std::f64::consts::PI * mesh.euler_characteristic() as f64).abs() < 1e-10);
    }
}
