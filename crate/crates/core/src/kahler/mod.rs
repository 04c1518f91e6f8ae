//! Complex structures, symplectic forms and metrics on configuration space.

pub mod forms;
pub mod horizontal;
pub mod local;
pub mod potential;
pub mod probe;
pub mod structures;

use crate::fd::StepUnderflow;
use crate::fields::FieldError;

#[derive(Debug, thiserror::Error)]
pub enum KahlerError {
    #[error("fibre structures act only on vertical vectors (Jdot = 0)")]
    NotVertical,
    #[error("Omega_J is complex valued; use eval_form_complex")]
    ComplexValued,
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Step(#[from] StepUnderflow),
}

pub use forms::{eval_form, eval_form_complex, FormSelector};
pub use horizontal::{ehresmann_curvature, horizontal_lift, horizontal_project, nijenhuis_residual, Family};
pub use potential::{potential_and_ddc, DiagnosticReport, PotentialCheck};
pub use probe::{signature_probe, SignatureProbe};
pub use structures::{apply_structure, StructureSelector};
