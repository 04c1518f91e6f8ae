//! Config-driven experiment runner and verification harness for
//! `gauge_moduli`: builds meshes, runs solvers and check suites, and writes
//! deterministic JSON/CSV artifacts.

pub mod artifacts;
pub mod checks;
pub mod config;
pub mod export;
pub mod pipeline;

pub use checks::{run_suite, Check, SuiteReport};
pub use config::{ConfigError, ExperimentConfig, Suite};
pub use pipeline::{execute, write_run, Experiment, Severity};
