//! Damped Gauss-Newton (Levenberg-Marquardt) with Armijo backtracking.
//!
//! Problems are usually underdetermined (more unknowns than equations), so
//! the step is the damped minimum-norm solution -J^T (J J^T + lambda)^-1 r.
//! Damping adapts to the line search and is dropped below the Newton switch,
//! which gives quadratic convergence near regular zeros.

use super::{SolveError, SolverConfig};
use crate::par;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Relative step for finite-difference Jacobians.
pub const JAC_STEP: f64 = 1e-6;

const MIN_DAMPING: f64 = 1e-12;
const MAX_DAMPING: f64 = 1e2;

pub trait LeastSquares: Sync {
    fn n_params(&self) -> usize;

    /// Residual at z, or None if z is outside the domain (the line search
    /// then backtracks).
    fn residual(&self, z: &[f64]) -> Option<Vec<f64>>;

    fn jacobian(&self, z: &[f64]) -> Option<DMatrix<f64>> {
        fd_jacobian(self, z)
    }
}

/// Central-difference Jacobian, one parallel work item per column. Near the
/// boundary of the domain a column falls back to a one-sided difference.
pub fn fd_jacobian<P: LeastSquares + ?Sized>(p: &P, z: &[f64]) -> Option<DMatrix<f64>> {
    let r0 = p.residual(z)?;
    let cols = par::map_coarse(z.len(), |i| {
        let h = JAC_STEP * (1.0 + z[i].abs());
        let mut zp = z.to_vec();
        zp[i] += h;
        let rp = p.residual(&zp);
        zp[i] = z[i] - h;
        let rm = p.residual(&zp);
        let col: Vec<f64> = match (rp, rm) {
            (Some(rp), Some(rm)) => rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect(),
            (Some(rp), None) => rp.iter().zip(&r0).map(|(a, b)| (a - b) / h).collect(),
            (None, Some(rm)) => r0.iter().zip(&rm).map(|(a, b)| (a - b) / h).collect(),
            (None, None) => return None,
        };
        Some(col)
    });
    let mut jac = DMatrix::zeros(r0.len(), z.len());
    for (i, c) in cols.into_iter().enumerate() {
        jac.set_column(i, &DVector::from_vec(c?));
    }
    Some(jac)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Stop {
    Converged,
    MaxIterations,
    /// Line search could not find a decrease.
    Stalled,
    /// Gradient vanished with the residual above tolerance.
    Stationary,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub objective: f64,
    pub residual_max: f64,
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub z: Vec<f64>,
    pub residual_max: f64,
    pub objective: f64,
    pub iterations: usize,
    pub stop: Stop,
    pub trace: Vec<TraceRow>,
}

impl Outcome {
    pub fn converged(&self) -> bool {
        self.stop == Stop::Converged
    }
}

fn max_abs(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn half_sq(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|x| x * x).sum::<f64>()
}

/// Solve (A + lambda I) y = b for symmetric positive semidefinite A.
fn damped_solve(a: DMatrix<f64>, lambda: f64, b: &DVector<f64>) -> Result<DVector<f64>, SolveError> {
    let n = a.nrows();
    let shifted = &a + DMatrix::identity(n, n) * lambda;
    if let Some(ch) = shifted.clone().cholesky() {
        return Ok(ch.solve(b));
    }
    let scale = a.diagonal().amax().max(f64::MIN_POSITIVE);
    shifted.svd(true, true).solve(b, 1e-14 * scale).map_err(|e| SolveError::Linear(e.into()))
}

/// Damped Gauss-Newton direction for residual r and Jacobian jac.
pub fn gn_direction(jac: &DMatrix<f64>, r: &DVector<f64>, mu: f64) -> Result<DVector<f64>, SolveError> {
    let (m, n) = jac.shape();
    if m <= n {
        let a = jac * jac.transpose();
        let lambda = mu * a.diagonal().mean().max(f64::MIN_POSITIVE);
        Ok(-(jac.transpose() * damped_solve(a, lambda, r)?))
    } else {
        let a = jac.transpose() * jac;
        let lambda = mu * a.diagonal().mean().max(f64::MIN_POSITIVE);
        Ok(-damped_solve(a, lambda, &(jac.transpose() * r))?)
    }
}

/// Minimize 1/2 |r(z)|^2 from z0 until max |r| <= cfg.tolerance.
pub fn minimize<P: LeastSquares + ?Sized>(p: &P, z0: Vec<f64>, cfg: &SolverConfig) -> Result<Outcome, SolveError> {
    cfg.validate()?;
    if z0.len() != p.n_params() {
        return Err(SolveError::Precondition(format!("expected {} parameters, got {}", p.n_params(), z0.len())));
    }
    let mut z = z0;
    let mut r = p.residual(&z).ok_or_else(|| SolveError::Precondition("initial point outside the domain".into()))?;
    let mut trace = vec![TraceRow { iteration: 0, objective: half_sq(&r), residual_max: max_abs(&r), step: 0.0 }];
    let finish = |z: Vec<f64>, r: &[f64], it: usize, stop: Stop, trace: Vec<TraceRow>| Outcome {
        z,
        residual_max: max_abs(r),
        objective: half_sq(r),
        iterations: it,
        stop,
        trace,
    };
    // Relative damping, adapted from the line search: full steps shrink it,
    // backtracking grows it.
    let mut mu: f64 = 1e-3;
    for it in 1..=cfg.max_iterations {
        let rmax = max_abs(&r);
        if rmax <= cfg.tolerance {
            return Ok(finish(z, &r, it - 1, Stop::Converged, trace));
        }
        let jac = p.jacobian(&z).ok_or_else(|| SolveError::Linear("Jacobian undefined at the current iterate".into()))?;
        let rv = DVector::from_column_slice(&r);
        let grad = jac.transpose() * &rv;
        let rnorm = rv.norm();
        if grad.norm() <= 1e-14 * (1.0 + jac.norm()) * rnorm {
            return Ok(finish(z, &r, it - 1, Stop::Stationary, trace));
        }
        let mu_eff = if rmax < cfg.newton_switch { mu.min(1e-13) } else { mu };
        let dir = gn_direction(&jac, &rv, mu_eff)?;
        let slope = grad.dot(&dir);
        let phi = half_sq(&r);
        let mut t = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = z.iter().zip(dir.iter()).map(|(a, d)| a + t * d).collect();
            if let Some(rt) = p.residual(&trial) {
                if half_sq(&rt) <= phi + cfg.armijo * t * slope {
                    break Some((trial, rt));
                }
            }
            t *= cfg.backtrack;
            if t < cfg.min_step {
                break None;
            }
        };
        match accepted {
            Some((zt, rt)) => {
                z = zt;
                r = rt;
                mu = if t == 1.0 { (mu * 0.1).max(MIN_DAMPING) } else { (mu * 4.0).min(MAX_DAMPING) };
                trace.push(TraceRow { iteration: it, objective: half_sq(&r), residual_max: max_abs(&r), step: t });
            }
            None if mu < MAX_DAMPING => mu = MAX_DAMPING,
            None => return Ok(finish(z, &r, it - 1, Stop::Stalled, trace)),
        }
    }
    let stop = if max_abs(&r) <= cfg.tolerance { Stop::Converged } else { Stop::MaxIterations };
    Ok(finish(z, &r, cfg.max_iterations, stop, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// x^2 + y^2 - 1 = 0 and x - y = 0: two isolated zeros.
    struct Circle;
    impl LeastSquares for Circle {
        fn n_params(&self) -> usize {
            2
        }
        fn residual(&self, z: &[f64]) -> Option<Vec<f64>> {
            Some(vec![z[0] * z[0] + z[1] * z[1] - 1.0, z[0] - z[1]])
        }
    }

    /// One equation in three unknowns with a singular point at the origin.
    struct Sphere;
    impl LeastSquares for Sphere {
        fn n_params(&self) -> usize {
            3
        }
        fn residual(&self, z: &[f64]) -> Option<Vec<f64>> {
            (z[2] > -0.5).then(|| vec![z.iter().map(|x| x * x).sum::<f64>() - 4.0])
        }
    }

    #[test]
    fn square_system_converges_quadratically() {
        let out = minimize(&Circle, vec![2.0, 0.3], &SolverConfig { tolerance: 1e-14, ..Default::default() }).unwrap();
        assert!(out.converged());
        let s = 0.5f64.sqrt();
        assert!((out.z[0] - s).abs() < 1e-12 && (out.z[1] - s).abs() < 1e-12);
        assert!(out.iterations < 12, "{}", out.iterations);
    }

    #[test]
    fn accepted_steps_decrease_the_objective() {
        let out = minimize(&Sphere, vec![3.0, -1.0, 2.0], &SolverConfig::default()).unwrap();
        assert!(out.converged());
        for w in out.trace.windows(2) {
            assert!(w[1].objective <= w[0].objective);
        }
    }

    #[test]
    fn minimum_norm_step_stays_on_the_ray() {
        let out = minimize(&Sphere, vec![0.3, 0.4, 1.2], &SolverConfig::default()).unwrap();
        let n: f64 = out.z.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (a, b) in out.z.iter().zip([0.3, 0.4, 1.2]) {
            assert!((a / 2.0 - b / 1.3).abs() < 1e-8, "{:?}", out.z);
        }
        assert!((n - 2.0).abs() < 1e-10);
    }

    #[test]
    fn stationary_point_is_reported() {
        let out = minimize(&Sphere, vec![0.0, 0.0, 0.0], &SolverConfig::default()).unwrap();
        assert_eq!(out.stop, Stop::Stationary);
    }

    #[test]
    fn domain_violation_at_start_is_an_error() {
        assert!(matches!(minimize(&Sphere, vec![0.0, 0.0, -1.0], &SolverConfig::default()), Err(SolveError::Precondition(_))));
    }
}
