//! Nonlinear solvers and moduli computations: constant curvature structures,
//! harmonic and Hitchin solutions, continuation in the coupling constant,
//! gauge fixing and the moduli metric.
//!
//! All solvers share one damped Gauss-Newton core ([`lm`]) with Armijo
//! backtracking on half the squared residual, so accepted steps are monotone
//! in the objective.

pub mod cc;
pub mod continuation;
pub mod gauge_fix;
pub mod harmonic;
pub mod lm;
pub mod moduli;

use crate::fields::FieldError;
use crate::kahler::KahlerError;
use crate::mesh_dec::GeometryError;
use crate::moment::MomentError;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("kernel of L is nontrivial (dimension {0}): outside the regular locus")]
    NontrivialKernel(usize),
    #[error("linear solve failed: {0}")]
    Linear(String),
    #[error("dense problem of size {size} exceeds the cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("Higgs field norm {0:e} exceeds the divergence guard")]
    Diverged(f64),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Kahler(#[from] KahlerError),
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Solver settings shared by every solve in this module.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Target for the max-abs residual.
    pub tolerance: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    /// Backtracking factor.
    pub backtrack: f64,
    /// Smallest step length tried before declaring a stall.
    pub min_step: f64,
    /// Below this residual the damping is dropped (pure Gauss-Newton).
    pub newton_switch: f64,
    /// Coupling constants for continuation; monotone.
    pub schedule: Vec<f64>,
    pub seed: u64,
    /// Dimension cap for dense linear algebra.
    pub dim_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 60,
            tolerance: 1e-10,
            armijo: 1e-4,
            backtrack: 0.5,
            min_step: 1e-8,
            newton_switch: 1e-6,
            schedule: vec![0.0, 0.02, 0.04, 0.06, 0.08, 0.1],
            seed: 0,
            dim_cap: 3000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |m: &str| Err(SolveError::Config(m.into()));
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return bad("tolerance must be positive");
        }
        if !(self.armijo > 0.0 && self.armijo < 0.5) {
            return bad("armijo constant must lie in (0, 1/2)");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtracking factor must lie in (0, 1)");
        }
        if !(self.min_step > 0.0 && self.min_step < 1.0) {
            return bad("min_step must lie in (0, 1)");
        }
        if !(self.newton_switch >= 0.0) {
            return bad("newton_switch must be non-negative");
        }
        if self.max_iterations == 0 || self.dim_cap == 0 {
            return bad("iteration budget and dimension cap must be positive");
        }
        if self.schedule.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return bad("schedule entries must be finite and non-negative");
        }
        let w = &self.schedule;
        let up = w.windows(2).all(|p| p[1] > p[0]);
        let down = w.windows(2).all(|p| p[1] < p[0]);
        if !(up || down) {
            return bad("schedule must be strictly monotone");
        }
        Ok(())
    }
}

pub use cc::solve_cc_metric;
pub use continuation::{continue_alpha, irreducibility_report, ContinuationReport, ContinuationStep};
pub use gauge_fix::{gauge_fix, GaugeFixer};
pub use harmonic::{flat_seed, solve_harmonic, solve_hitchin};
pub use lm::{LeastSquares, Outcome, Stop, TraceRow};
pub use moduli::{moduli_basis, moduli_metric, ModuliBasis, ModuliReport};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = SolverConfig::default();
        for cfg in [
            SolverConfig { tolerance: 0.0, ..base.clone() },
            SolverConfig { armijo: 0.7, ..base.clone() },
            SolverConfig { schedule: vec![0.0, 0.1, 0.05], ..base.clone() },
            SolverConfig { schedule: vec![0.1, 0.1], ..base.clone() },
            SolverConfig { max_iterations: 0, ..base.clone() },
        ] {
            assert!(matches!(cfg.validate(), Err(SolveError::Config(_))), "{cfg:?}");
        }
        SolverConfig { schedule: vec![0.1, 0.05, 0.0], ..base }.validate().unwrap();
    }
}
