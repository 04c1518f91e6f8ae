//! Gauge fields on the trivial SU(2) bundle: configurations, curvature,
//! covariant derivatives, equation residuals and the Higgs correspondence.

pub mod circle;
pub mod config;
pub mod gauge;
pub mod ops;
pub mod residual;

pub use circle::{to_complex, to_unitary, ComplexHiggs};
pub use config::{check_epsilon, Configuration, FieldError, TangentVector, DOF_PER_FACE};
pub use gauge::gauge_transform;
pub use ops::{codifferential, covariant_d, curvature, Form};
pub use residual::{residual, ResidualBundle, System};
