//! Experiment configuration: a TOML document with a versioned schema.
//!
//! ```toml
//! schema_version = 1
//! seed = 3
//! checks = ["identity"]
//!
//! [mesh]
//! genus = 2
//! refinement = 0
//!
//! [experiment]
//! system = "coupled_hitchin"
//! eps = -1.0
//!
//! [solver]
//! schedule = [0.0, 0.02, 0.04, 0.06, 0.08, 0.1]
//! ```

use gauge_moduli::fields::System;
use gauge_moduli::solve::SolverConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest mesh accepted by `run`, in faces.
pub const MAX_FACES: usize = 5000;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("schema error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("schema error: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemName {
    Flat,
    Harmonicity,
    Hitchin,
    CoupledHarmonic,
    CoupledHitchin,
}

impl SystemName {
    pub fn system(self) -> System {
        match self {
            Self::Flat => System::Flat,
            Self::Harmonicity => System::Harmonicity,
            Self::Hitchin => System::Hitchin,
            Self::CoupledHarmonic => System::CoupledHarmonic,
            Self::CoupledHitchin => System::CoupledHitchin,
        }
    }

    pub fn is_coupled(self) -> bool {
        matches!(self, Self::CoupledHarmonic | Self::CoupledHitchin)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Machine-precision algebraic identities and gauge fixing.
    Identity,
    /// Hamiltonian identity for every moment map on pure gauge parameters.
    Hamiltonian,
    /// Convergence slopes of the Hamiltonian identity under refinement.
    Refinement,
    /// Finite-difference curvature, potential and signature checks.
    Geometry,
    /// Solver regression fixtures.
    Solver,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Hamiltonian => "hamiltonian",
            Self::Refinement => "refinement",
            Self::Geometry => "geometry",
            Self::Solver => "solver",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub genus: Option<usize>,
    #[serde(default)]
    pub refinement: usize,
    /// OFF file, resolved relative to the config file.
    pub off: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub system: SystemName,
    /// Sign of the base symplectic term; +1 or -1.
    pub eps: f64,
    /// Size of the random start of the flat seed.
    #[serde(default = "default_amplitude")]
    pub seed_amplitude: f64,
    /// Compute the moduli basis and metric at the end of a continuation.
    #[serde(default = "default_true")]
    pub moduli: bool,
    /// Also compute it at every schedule value with alpha > 0.
    #[serde(default)]
    pub moduli_every_step: bool,
}

fn default_amplitude() -> f64 {
    0.3
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub checks: Vec<Suite>,
    pub mesh: MeshSpec,
    pub experiment: Option<ExperimentSpec>,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self, ConfigError> {
        let mut cfg: ExperimentConfig = toml::from_str(text)?;
        if let (Some(off), Some(dir)) = (&cfg.mesh.off, base) {
            if off.is_relative() {
                cfg.mesh.off = Some(dir.join(off));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_toml(&text, path.parent())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version));
        }
        match (&self.mesh.genus, &self.mesh.off) {
            (Some(_), Some(_)) => return bad("mesh: give either genus or off, not both".into()),
            (None, None) => return bad("mesh: one of genus or off is required".into()),
            (Some(0), _) => return bad("mesh: genus must be at least 1".into()),
            _ => {}
        }
        if let Some(e) = &self.experiment {
            if e.eps != 1.0 && e.eps != -1.0 {
                return bad(format!("experiment.eps must be +1 or -1, got {}", e.eps));
            }
            if !(e.seed_amplitude >= 0.0 && e.seed_amplitude.is_finite()) {
                return bad("experiment.seed_amplitude must be finite and non-negative".into());
            }
            if e.system.is_coupled() && self.solver.schedule.is_empty() {
                return bad("solver.schedule must not be empty for a coupled system".into());
            }
        } else if self.checks.is_empty() {
            return bad("nothing to do: give an [experiment] table or a checks list".into());
        }
        let mut seen = self.checks.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.checks.len() {
            return bad("checks: duplicate suite".into());
        }
        self.solver.validate().map_err(|e| ConfigError::Invalid(format!("solver: {e}")))
    }

    /// Canonical JSON form, with the seed and output directory as given.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    /// SHA-256 of the canonical JSON form, without the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        Sha256::digest(c.canonical_json().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "schema_version = 1\nchecks = [\"identity\"]\n[mesh]\ngenus = 1\n";

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL, None).unwrap();
        assert_eq!(c.mesh.refinement, 0);
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.checks, vec![Suite::Identity]);
    }

    #[test]
    fn zero_eps_is_a_schema_error() {
        let t = format!("{MINIMAL}[experiment]\nsystem = \"coupled_harmonic\"\neps = 0.0\n");
        let e = ExperimentConfig::from_toml(&t, None).unwrap_err();
        assert!(e.to_string().contains("eps"), "{e}");
    }

    #[test]
    fn unknown_fields_and_versions_are_rejected() {
        assert!(ExperimentConfig::from_toml(&format!("{MINIMAL}colour = 1\n"), None).is_err());
        assert!(ExperimentConfig::from_toml(&MINIMAL.replace("= 1\nchecks", "= 2\nchecks"), None).is_err());
        assert!(ExperimentConfig::from_toml(&format!("{MINIMAL}[solver]\ntolerance = -1.0\n"), None).is_err());
        assert!(ExperimentConfig::from_toml(&format!("{MINIMAL}off = \"a.off\"\n"), None).is_err());
    }

    #[test]
    fn hash_ignores_output_directory() {
        let a = ExperimentConfig::from_toml(MINIMAL, None).unwrap();
        let b = ExperimentConfig { out: Some("elsewhere".into()), ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig { seed: 1, ..a.clone() };
        assert_ne!(a.hash(), c.hash());
    }
}
