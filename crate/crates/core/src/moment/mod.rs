//! Moment maps, infinitesimal actions, their adjoints and the operators built
//! from them.

pub mod action;
pub mod adjoint;
pub mod checks;
pub mod maps;

use crate::fd::StepUnderflow;
use crate::fields::FieldError;
use crate::kahler::KahlerError;
use crate::mesh_dec::GeometryError;

#[derive(Debug, thiserror::Error)]
pub enum MomentError {
    #[error("parameter shape mismatch: {0}")]
    Shape(String),
    #[error("f must have zero mean, got {0:e}")]
    NotMeanZero(f64),
    #[error("selector and parameter group differ: {0}")]
    Group(String),
    #[error("the flat moment map is complex valued")]
    ComplexValued,
    #[error("dense operator of size {size} exceeds the cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Kahler(#[from] KahlerError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Step(#[from] StepUnderflow),
}

pub use action::{infinitesimal_action, ActionVariant};
pub use maps::{moment_eval, moment_eval_complex, ComplexPart, GaugeParameter, MomentSelector};
pub use checks::{equivariance_check, hamiltonian_check, refinement_sweep, HamiltonianReport, RefinementReport};
pub use adjoint::{adjoint_action, operator_script_l, AdjointOperator, KernelReport, ParamBasis};
