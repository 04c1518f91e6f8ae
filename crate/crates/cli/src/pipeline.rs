//! The `run` pipeline: mesh, constant curvature structure, flat seed, field
//! solve, optional continuation in alpha with moduli metrics, then the
//! configured check suites. Everything is computed in memory first and
//! written out afterwards.

use crate::artifacts::{self, Manifest, MeshInfo};
use crate::checks::{run_suite, SuiteReport};
use crate::config::{ConfigError, ExperimentConfig, SystemName, MAX_FACES, SCHEMA_VERSION};
use anyhow::Context;
use gauge_moduli::fields::{residual, to_complex, to_unitary, Configuration, System};
use gauge_moduli::kahler::Family;
use gauge_moduli::mesh_dec::off::{read_off, write_off};
use gauge_moduli::mesh_dec::{build_surface, ComplexStructureField, SurfaceMesh};
use gauge_moduli::solve::continuation::family_of;
use gauge_moduli::solve::{
    continue_alpha, flat_seed, moduli_basis, moduli_metric, solve_cc_metric, solve_harmonic, solve_hitchin, ContinuationReport,
    ModuliReport, Outcome, Stop,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::Path;
use std::sync::Arc;

/// Process exit codes, ordered by severity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Pass,
    CheckFailed,
    Invalid,
    SolverBreakdown,
}

impl Severity {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::CheckFailed => 1,
            Self::Invalid => 2,
            Self::SolverBreakdown => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub severity: Severity,
    pub message: String,
}

/// Summary of one nonlinear solve.
#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    pub name: String,
    pub stop: Stop,
    pub iterations: usize,
    pub residual_max: f64,
    pub trace: Vec<gauge_moduli::solve::TraceRow>,
}

impl Stage {
    fn of(name: &str, out: &Outcome) -> Self {
        Stage { name: name.into(), stop: out.stop, iterations: out.iterations, residual_max: out.residual_max, trace: out.trace.clone() }
    }
}

/// Basis diagnostics that accompany a moduli report.
#[derive(Clone, Debug, Serialize)]
pub struct ModuliEntry {
    pub alpha: f64,
    pub basis_dim: usize,
    pub gap: f64,
    pub ambiguous: bool,
    pub linear_residual: f64,
    pub gauge_residual: f64,
    pub report: ModuliReport,
}

pub struct Experiment {
    pub config: ExperimentConfig,
    pub mesh: Arc<SurfaceMesh>,
    pub stages: Vec<Stage>,
    pub continuation: Option<ContinuationReport>,
    pub moduli: Vec<ModuliEntry>,
    pub solution: Option<Configuration>,
    pub suites: Vec<SuiteReport>,
    pub failures: Vec<Failure>,
}

impl Experiment {
    pub fn severity(&self) -> Severity {
        self.failures.iter().map(|f| f.severity).max().unwrap_or(Severity::Pass)
    }

    fn fail(&mut self, severity: Severity, message: impl Into<String>) {
        self.failures.push(Failure { severity, message: message.into() });
    }
}

/// Tolerances applied to moduli reports.
pub const MODULI_TOL: f64 = 1e-8;

pub fn build_mesh(cfg: &ExperimentConfig) -> Result<SurfaceMesh, ConfigError> {
    let mesh = match (&cfg.mesh.genus, &cfg.mesh.off) {
        (Some(g), _) => build_surface(*g, cfg.mesh.refinement).map_err(|e| ConfigError::Invalid(format!("mesh: {e}")))?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.clone(), source })?;
            let mut m = read_off(&text).map_err(|e| ConfigError::Invalid(format!("mesh: {e}")))?;
            for _ in 0..cfg.mesh.refinement {
                m = m.subdivide();
            }
            m
        }
        (None, None) => return Err(ConfigError::Invalid("mesh: one of genus or off is required".into())),
    };
    if mesh.n_faces() > MAX_FACES {
        return Err(ConfigError::Invalid(format!("mesh: {} faces exceed the limit {MAX_FACES}", mesh.n_faces())));
    }
    Ok(mesh)
}

/// Run the configured experiment in memory. Only configuration errors are
/// returned as `Err`; solver and check failures are recorded in the result.
pub fn execute(cfg: &ExperimentConfig) -> Result<Experiment, ConfigError> {
    cfg.validate()?;
    let mesh = Arc::new(build_mesh(cfg)?);
    let mut exp = Experiment {
        config: cfg.clone(),
        mesh: mesh.clone(),
        stages: Vec::new(),
        continuation: None,
        moduli: Vec::new(),
        solution: None,
        suites: Vec::new(),
        failures: Vec::new(),
    };
    if let Some(spec) = cfg.experiment.clone() {
        if let Err(e) = solve_chain(&mut exp, spec.system, spec.eps, spec.seed_amplitude, spec.moduli, spec.moduli_every_step) {
            exp.fail(Severity::SolverBreakdown, format!("{e:#}"));
        }
    }
    for &suite in &cfg.checks {
        let report = run_suite(suite, cfg.seed);
        for c in report.checks.iter().filter(|c| !c.passed) {
            exp.fail(Severity::CheckFailed, format!("{}: {}", suite.name(), c.line()));
        }
        exp.suites.push(report);
    }
    Ok(exp)
}

fn require_converged(exp: &mut Experiment, name: &str, out: &Outcome) -> anyhow::Result<()> {
    exp.stages.push(Stage::of(name, out));
    anyhow::ensure!(out.converged(), "{name} did not converge: {:?} at residual {:.3e}", out.stop, out.residual_max);
    Ok(())
}

fn solve_chain(exp: &mut Experiment, system: SystemName, eps: f64, amp: f64, moduli: bool, every_step: bool) -> anyhow::Result<()> {
    let cfg = exp.config.solver.clone();
    let mesh = exp.mesh.clone();
    let (j, out) = solve_cc_metric(&mesh, &ComplexStructureField::reference(&mesh), &cfg).context("constant curvature solve")?;
    require_converged(exp, "constant_curvature", &out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(exp.config.seed);
    let (x, out) = flat_seed(mesh.clone(), j.clone(), &mut rng, amp, &cfg).context("flat seed")?;
    require_converged(exp, "flat_seed", &out)?;
    let x = match system {
        SystemName::Flat => x,
        SystemName::Hitchin => {
            let (a, phi, out) = solve_hitchin(mesh.clone(), &j, &x.a, &to_complex(&x.j.j, &x.psi), &cfg).context("Hitchin solve")?;
            require_converged(exp, "hitchin", &out)?;
            Configuration { a, psi: to_unitary(&phi), ..x }
        }
        _ => {
            let (xh, out) = solve_harmonic(&x, &cfg).context("harmonic solve")?;
            require_converged(exp, "harmonic", &out)?;
            xh
        }
    };
    if !system.is_coupled() {
        exp.solution = Some(x);
        return Ok(());
    }
    let sys = system.system();
    let rep = continue_alpha(sys, &x, eps, &cfg).context("continuation")?;
    let family = family_of(sys)?;
    let breakdown = rep.breakdown.clone();
    let picks: Vec<usize> = (0..rep.configurations.len())
        .filter(|&i| rep.steps[i].alpha > 0.0 && (every_step || i + 1 == rep.steps.len()))
        .collect();
    exp.solution = rep.configurations.last().cloned();
    let configurations = rep.configurations.clone();
    let steps: Vec<f64> = rep.steps.iter().map(|s| s.alpha).collect();
    exp.continuation = Some(rep);
    if let Some(b) = breakdown {
        anyhow::bail!("continuation broke down: {b}");
    }
    if moduli {
        for i in picks {
            let entry = moduli_entry(family, &configurations[i], steps[i], eps, &cfg)
                .with_context(|| format!("moduli metric at alpha = {}", steps[i]))?;
            check_moduli(exp, &entry, eps);
            exp.moduli.push(entry);
        }
    }
    Ok(())
}

pub fn moduli_entry(
    family: Family,
    x: &Configuration,
    alpha: f64,
    eps: f64,
    cfg: &gauge_moduli::solve::SolverConfig,
) -> anyhow::Result<ModuliEntry> {
    let basis = moduli_basis(family, x, alpha, eps, cfg)?;
    let report = moduli_metric(x, &basis)?;
    Ok(ModuliEntry {
        alpha,
        basis_dim: basis.dim(),
        gap: basis.gap,
        ambiguous: basis.ambiguous,
        linear_residual: basis.linear_residual,
        gauge_residual: basis.gauge_residual,
        report,
    })
}

fn check_moduli(exp: &mut Experiment, e: &ModuliEntry, eps: f64) {
    let r = &e.report;
    let at = format!("moduli at alpha = {}", e.alpha);
    if e.ambiguous {
        exp.fail(Severity::CheckFailed, format!("{at}: nullspace gap {:.3e} is ambiguous", e.gap));
    }
    for (what, v) in [
        ("metric asymmetry", r.metric_asymmetry),
        ("form symmetric part", r.form_symmetry),
        ("compatibility", r.compatibility_error),
        ("explicit form", r.form_discrepancy),
        ("explicit metric", r.metric_discrepancy),
    ] {
        if !(v <= MODULI_TOL) {
            exp.fail(Severity::CheckFailed, format!("{at}: {what} error {v:.3e} > {MODULI_TOL:.0e}"));
        }
    }
    if let Some(v) = r.vertical_error {
        if !(v <= MODULI_TOL) {
            exp.fail(Severity::CheckFailed, format!("{at}: vertical block error {v:.3e} > {MODULI_TOL:.0e}"));
        }
    }
    if eps < 0.0 && !r.nondegenerate {
        exp.fail(Severity::CheckFailed, format!("{at}: metric is degenerate"));
    }
}

#[derive(Serialize)]
struct TraceCsv<'a> {
    stage: &'a str,
    iteration: usize,
    objective: f64,
    residual_max: f64,
    step: f64,
}

/// Row of the per-run table; the column set is part of the export schema.
#[derive(Clone, Debug, Serialize, serde::Deserialize, PartialEq)]
pub struct ContinuationRow {
    pub alpha: f64,
    pub residual: f64,
    pub kernel_dim: Option<usize>,
    pub signature: String,
}

pub fn signature_label(r: &ModuliReport) -> String {
    format!("{}/{}/{}", r.signature.positive, r.signature.negative, r.signature.zero)
}

/// One row per continuation step, or a single alpha = 0 row with the final
/// residual of an uncoupled solve.
pub fn table_rows(exp: &Experiment) -> Vec<ContinuationRow> {
    let Some(rep) = &exp.continuation else {
        return exp
            .stages
            .last()
            .map(|s| ContinuationRow { alpha: 0.0, residual: s.residual_max, kernel_dim: None, signature: String::new() })
            .into_iter()
            .collect();
    };
    rep.steps
        .iter()
        .map(|s| ContinuationRow {
            alpha: s.alpha,
            residual: s.residual_max,
            kernel_dim: s.kernel.as_ref().map(|k| k.kernel_dim),
            signature: exp.moduli.iter().find(|m| m.alpha == s.alpha).map(|m| signature_label(&m.report)).unwrap_or_default(),
        })
        .collect()
}

pub fn manifest(exp: &Experiment, artifacts: Vec<String>) -> Manifest {
    let m = &exp.mesh;
    Manifest {
        schema_version: SCHEMA_VERSION,
        code_version: env!("CARGO_PKG_VERSION").into(),
        config_hash: exp.config.hash(),
        seed: exp.config.seed,
        mesh: MeshInfo {
            genus: m.genus(),
            euler_characteristic: m.euler_characteristic(),
            n_vertices: m.n_vertices(),
            n_faces: m.n_faces(),
            volume: m.total_volume(),
        },
        system: exp.config.experiment.as_ref().map(|e| format!("{:?}", e.system.system())),
        eps: exp.config.experiment.as_ref().map(|e| e.eps),
        exit_code: exp.severity().exit_code(),
        failures: exp.failures.iter().map(|f| f.message.clone()).collect(),
        artifacts,
    }
}

/// Write every artifact of `exp` into `dir`; the manifest goes last.
pub fn write_run(exp: &Experiment, dir: &Path) -> anyhow::Result<Manifest> {
    let mut names = Vec::new();
    let mut put = |name: &str, bytes: Vec<u8>| -> anyhow::Result<()> {
        artifacts::write_atomic(&dir.join(name), &bytes)?;
        names.push(name.to_string());
        Ok(())
    };
    put(artifacts::CONFIG, pretty(&exp.config)?)?;
    put(artifacts::MESH, write_off(&exp.mesh).into_bytes())?;
    if !exp.stages.is_empty() {
        let rows: Vec<TraceCsv> = exp
            .stages
            .iter()
            .flat_map(|s| {
                s.trace.iter().map(|t| TraceCsv {
                    stage: &s.name,
                    iteration: t.iteration,
                    objective: t.objective,
                    residual_max: t.residual_max,
                    step: t.step,
                })
            })
            .collect();
        put(artifacts::TRACES, artifacts::csv_bytes(&rows)?)?;
    }
    if let Some(rep) = &exp.continuation {
        put(artifacts::CONTINUATION_JSON, pretty(rep)?)?;
    }
    if exp.config.experiment.is_some() {
        put(artifacts::TABLE, artifacts::csv_bytes(&table_rows(exp))?)?;
    }
    if !exp.moduli.is_empty() {
        put(artifacts::MODULI, pretty(&exp.moduli)?)?;
    }
    if !exp.suites.is_empty() {
        put(artifacts::CHECKS, pretty(&exp.suites)?)?;
    }
    if let Some(x) = &exp.solution {
        let s = x.to_json();
        let residuals: Vec<(String, f64)> = System::ALL
            .iter()
            .filter_map(|&sys| {
                let (alpha, eps) = exp.continuation.as_ref().map_or((0.0, 1.0), |c| (c.steps.last().map_or(0.0, |s| s.alpha), c.eps));
                residual(sys, x, alpha, eps).ok().map(|r| (format!("{sys:?}"), r.max_abs()))
            })
            .collect();
        let doc = serde_json::json!({ "configuration": serde_json::from_str::<serde_json::Value>(&s)?, "residuals": residuals });
        put(artifacts::SOLUTION, pretty(&doc)?)?;
    }
    let man = manifest(exp, names);
    artifacts::write_json(&dir.join(artifacts::MANIFEST), &man)?;
    Ok(man)
}

fn pretty<T: Serialize>(v: &T) -> anyhow::Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}
