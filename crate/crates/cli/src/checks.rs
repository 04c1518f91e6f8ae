//! Check suites. Every check reports the measured value next to its bound, so
//! a failure can be read off the report without rerunning anything.

use crate::config::Suite;
use gauge_moduli::fields::{residual, to_complex, to_unitary, Configuration, System, TangentVector};
use gauge_moduli::kahler::forms::{eval_form, FormSelector};
use gauge_moduli::kahler::{
    apply_structure, ehresmann_curvature, horizontal_project, nijenhuis_residual, potential_and_ddc, signature_probe, Family,
    PotentialCheck, StructureSelector,
};
use gauge_moduli::mesh_dec::faceform::wedge_b_face;
use gauge_moduli::mesh_dec::geometry::scalar_curvature;
use gauge_moduli::mesh_dec::mesh::{build_surface, SurfaceMesh};
use gauge_moduli::moment::action::infinitesimal_action;
use gauge_moduli::moment::adjoint::family_data;
use gauge_moduli::moment::checks::{hamiltonian_check, refinement_sweep};
use gauge_moduli::moment::maps::{ComplexPart, GaugeParameter, MomentSelector};
use gauge_moduli::par::map_coarse;
use gauge_moduli::solve::{flat_seed, solve_cc_metric, solve_harmonic, solve_hitchin, GaugeFixer, SolverConfig};
use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: Bound,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check { name: name.into(), measured, bound: Bound::AtMost, tolerance, passed: measured <= tolerance, detail: String::new() }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check { name: name.into(), measured, bound: Bound::AtLeast, tolerance, passed: measured >= tolerance, detail: String::new() }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    pub fn failed(name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Check { name: name.into(), measured: f64::NAN, bound: Bound::AtMost, tolerance: 0.0, passed: false, detail: err.to_string() }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn line(&self) -> String {
        let op = match self.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!("[{status}] {}: {:.3e} {op} {:.1e}", self.name, self.measured, self.tolerance);
        if !self.detail.is_empty() {
            s.push_str(&format!(" ({})", self.detail));
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: Suite, seed: u64, checks: Vec<Check>) -> Self {
        SuiteReport { suite: suite.name().into(), seed, passed: checks.iter().all(|c| c.passed), checks }
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> SuiteReport {
    match suite {
        Suite::Identity => identity(seed, IDENTITY_CASES),
        Suite::Hamiltonian => hamiltonian(seed, HAMILTONIAN_CASES),
        Suite::Refinement => refinement(),
        Suite::Geometry => geometry(seed, GEOMETRY_CASES),
        Suite::Solver => solver(&[seed]),
    }
}

pub const IDENTITY_CASES: usize = 20;
pub const HAMILTONIAN_CASES: usize = 5;
pub const GEOMETRY_CASES: usize = 3;

/// Random inputs alternate between a 72-face torus and a 72-face genus-2 mesh.
struct Meshes {
    torus: Arc<SurfaceMesh>,
    genus2: Arc<SurfaceMesh>,
}

impl Meshes {
    fn new() -> Self {
        Meshes { torus: Arc::new(build_surface(1, 1).expect("torus")), genus2: Arc::new(build_surface(2, 0).expect("genus 2")) }
    }

    fn pick(&self, case: usize) -> Arc<SurfaceMesh> {
        if case % 2 == 0 {
            self.torus.clone()
        } else {
            self.genus2.clone()
        }
    }
}

fn case_rng(seed: u64, case: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(case as u64))
}

fn norm(v: &TangentVector) -> f64 {
    v.norm_sq().sqrt()
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) })
}

/// Per-case measurements of the identity suite, each already relative.
#[derive(Default)]
struct IdentityCase {
    quaternion: f64,
    squares: f64,
    wedge: f64,
    restriction: f64,
    compatibility: f64,
    gauss_bonnet: f64,
    intertwining: f64,
    gf_idempotence: f64,
    gf_orthogonality: f64,
    gf_recovery: f64,
    errors: Vec<String>,
}

fn identity_case(meshes: &Meshes, seed: u64, case: usize) -> IdentityCase {
    let mut out = IdentityCase::default();
    let mut rng = case_rng(seed, case);
    let mesh = meshes.pick(case);
    let x = Configuration::random(mesh.clone(), &mut rng, 0.4, 1.0);
    let v = TangentVector::random(&x, &mut rng, 1.0);
    let w = TangentVector::random(&x, &mut rng, 1.0);
    let a = TangentVector::random_vertical(&x, &mut rng, 1.0);
    let b = TangentVector::random_vertical(&x, &mut rng, 1.0);
    let errors = RefCell::new(Vec::new());
    let ap = |s: StructureSelector, u: &TangentVector| match apply_structure(s, &x, u) {
        Ok(r) => r,
        Err(e) => {
            errors.borrow_mut().push(format!("{s:?}: {e}"));
            TangentVector::zeros(x.n_faces())
        }
    };

    use StructureSelector::*;
    let sa = 1.0 + norm(&a);
    out.quaternion = max_of([
        norm(&ap(FibreI, &ap(FibreJ, &a)).sub(&ap(FibreK, &a))) / sa,
        norm(&ap(FibreJ, &ap(FibreK, &a)).sub(&ap(FibreI, &a))) / sa,
        norm(&ap(FibreK, &ap(FibreI, &a)).sub(&ap(FibreJ, &a))) / sa,
    ]);
    out.squares = max_of(StructureSelector::ALL.map(|s| {
        let u = if s.is_fibre() { &a } else { &v };
        let s1 = ap(s, u);
        norm(&ap(s, &s1).add(u)) / (1.0 + norm(u))
    }));

    // traceless C per face: the identity needs tr C = 0
    let c: Vec<Matrix2<f64>> = (0..x.n_faces())
        .map(|_| {
            let (p, q, r): (f64, f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            Matrix2::new(p, q, r, -p)
        })
        .collect();
    let (p1, p2) = (&x.psi, &w.psidot);
    let (p1c, p2c) = (p1.compose(&c), p2.compose(&c));
    out.wedge = max_of((0..x.n_faces()).map(|f| {
        let s = wedge_b_face(p1c.w[f], p2.w[f]) + wedge_b_face(p1.w[f], p2c.w[f]);
        let scale = 1.0 + c[f].norm() * (p1.w[f].iter().chain(&p2.w[f]).map(|k| k.0.iter().map(|t| t * t).sum::<f64>()).sum::<f64>());
        s.abs() / scale
    }));

    let form = |sel: FormSelector, p: &TangentVector, q: &TangentVector| {
        eval_form(sel, &x, p, q).unwrap_or_else(|e| {
            errors.borrow_mut().push(format!("{sel:?}: {e}"));
            f64::NAN
        })
    };
    let mut restriction = Vec::new();
    for (sigma, omega) in [(FormSelector::SigmaJ, FormSelector::OmegaJ), (FormSelector::SigmaI, FormSelector::OmegaI)] {
        let s = form(sigma, &a, &b);
        let o = form(omega, &a, &b);
        restriction.push((s - o).abs() / (1.0 + o.abs()));
    }
    out.restriction = max_of(restriction);

    let eps = if case % 4 < 2 { 1.0 } else { -1.0 };
    let mut compat = Vec::new();
    for metric in [
        FormSelector::MetricJFamily { alpha: 0.3, eps },
        FormSelector::MetricIFamily { alpha: 0.3, eps },
        FormSelector::HkMetric,
    ] {
        let (omega, st) = metric.metric_pair().expect("metric selector");
        let (p, q) = if st.is_fibre() { (&a, &b) } else { (&v, &w) };
        let sq = ap(st, q);
        let g = form(metric, p, q);
        let o = form(omega, p, &sq);
        compat.push((g - o).abs() / (1.0 + g.abs()));
    }
    out.compatibility = max_of(compat);

    let chi = mesh.euler_characteristic() as f64;
    let mut y = x.clone();
    let mut gb = Vec::new();
    for _ in 0..5 {
        let step = TangentVector::random(&y, &mut rng, 0.2);
        y = y.step(&step, 1.0);
        match scalar_curvature(&mesh, &y.j) {
            Ok(k) => {
                let total: f64 = k.iter().zip(mesh.vertex_masses()).map(|(k, m)| k * m).sum();
                gb.push((total - 2.0 * PI * chi).abs());
            }
            Err(e) => errors.borrow_mut().push(format!("scalar curvature: {e}")),
        }
    }
    out.gauss_bonnet = max_of(gb);

    let iv = ap(TotalI, &v);
    let lhs = horizontal_project(Family::I, &x, &iv).1;
    let rhs = ap(FibreI, &horizontal_project(Family::I, &x, &v).1);
    out.intertwining = norm(&lhs.sub(&rhs)) / (1.0 + norm(&v));

    // gauge fixing: smaller fields keep the configuration in the regular locus
    let xg = Configuration::random(mesh, &mut rng, 0.2, 0.3);
    let family = if case % 2 == 0 { Family::J } else { Family::I };
    let alpha = 0.1;
    match gauge_fixing_case(&xg, family, alpha, eps, &mut rng) {
        Ok((idem, orth, rec)) => {
            out.gf_idempotence = idem;
            out.gf_orthogonality = orth;
            out.gf_recovery = rec;
        }
        Err(e) => {
            errors.borrow_mut().push(format!("gauge fixing: {e}"));
            out.gf_idempotence = f64::NAN;
            out.gf_orthogonality = f64::NAN;
            out.gf_recovery = f64::NAN;
        }
    }
    out.errors = errors.into_inner();
    out
}

fn gauge_fixing_case(x: &Configuration, family: Family, alpha: f64, eps: f64, rng: &mut ChaCha8Rng) -> anyhow::Result<(f64, f64, f64)> {
    let gf = GaugeFixer::new(family, x, alpha, eps, SolverConfig::default().dim_cap)?;
    let (variant, metric, _) = family_data(family, alpha, eps);
    let v = TangentVector::random(x, rng, 0.5);
    let s = gf.split(x, &v)?;
    let nv = norm(&v);
    let again = gf.split(x, &s.gauge)?;
    let fixed_again = gf.split(x, &s.fixed)?;
    // oblique for indefinite metrics: roundoff scales with the larger piece
    let scale = nv.max(norm(&s.gauge)).max(norm(&s.fixed));
    let idem = max_of([norm(&again.gauge.sub(&s.gauge)), norm(&fixed_again.gauge)]) / scale;
    let orth = eval_form(metric, x, &s.gauge, &s.fixed)?.abs() / (nv * nv);
    let zeta = GaugeParameter::random(&x.mesh, rng, true, false);
    let pure = infinitesimal_action(variant, x, &zeta)?;
    let sp = gf.split(x, &pure)?;
    let rec = max_of([norm(&sp.fixed), norm(&sp.gauge.sub(&pure))]) / norm(&pure);
    Ok((idem, orth, rec))
}

/// Machine-precision identities on `cases` seeded random inputs, plus the
/// gauge-fixing decomposition.
pub fn identity(seed: u64, cases: usize) -> SuiteReport {
    let meshes = Meshes::new();
    let results = map_coarse(cases, |k| identity_case(&meshes, seed, k));
    let col = |f: fn(&IdentityCase) -> f64| max_of(results.iter().map(f));
    let errors: Vec<String> = results.iter().flat_map(|r| r.errors.clone()).collect();
    let n = format!("{cases} inputs");
    let mut checks = vec![
        Check::at_most("quaternion relations", col(|r| r.quaternion), 1e-10).with_detail(&n),
        Check::at_most("structures square to -1", col(|r| r.squares), 1e-10).with_detail(&n),
        Check::at_most("pointwise wedge identity for traceless C", col(|r| r.wedge), 1e-12).with_detail(&n),
        Check::at_most("coupling forms restrict to fibre forms", col(|r| r.restriction), 1e-12).with_detail(&n),
        Check::at_most("metric equals form composed with structure", col(|r| r.compatibility), 1e-12).with_detail(&n),
        Check::at_most("Gauss-Bonnet after J updates", col(|r| r.gauss_bonnet), 1e-10).with_detail(format!("{cases} inputs x 5 updates")),
        Check::at_most("I-family projection intertwines structures", col(|r| r.intertwining), 1e-12).with_detail(&n),
        Check::at_most("gauge fixing idempotence", col(|r| r.gf_idempotence), 1e-8).with_detail(&n),
        Check::at_most("gauge fixing orthogonality", col(|r| r.gf_orthogonality), 1e-8).with_detail(&n),
        Check::at_most("gauge fixing recovers pure gauge", col(|r| r.gf_recovery), 1e-8).with_detail(&n),
    ];
    if !errors.is_empty() {
        checks.push(Check::failed("evaluation errors", errors.join("; ")));
    }
    SuiteReport::new(Suite::Identity, seed, checks)
}

pub const MOMENT_SELECTORS: [MomentSelector; 5] = [
    MomentSelector::Flat,
    MomentSelector::Corlette,
    MomentSelector::Scalar,
    MomentSelector::ExtendedJ { alpha: 0.3, eps: -1.0 },
    MomentSelector::ExtendedI { alpha: 0.3, eps: 1.0 },
];

/// Hamiltonian identity with pure gauge parameters (f = 0, y = 0) on random
/// genus-2 configurations.
pub fn hamiltonian(seed: u64, cases: usize) -> SuiteReport {
    let mesh = Arc::new(build_surface(2, 0).expect("genus 2"));
    let mut checks = Vec::new();
    for sel in MOMENT_SELECTORS {
        let errs: Vec<Result<f64, String>> = map_coarse(cases, |k| {
            let mut rng = case_rng(seed, k);
            let x = Configuration::random(mesh.clone(), &mut rng, 0.3, 0.5);
            let v = TangentVector::random_vertical(&x, &mut rng, 0.5);
            let mut zeta = GaugeParameter::random(&mesh, &mut rng, false, sel.is_complex());
            if let Some(c) = zeta.complex.take() {
                zeta.complex = Some(ComplexPart { y: vec![Vector2::zeros(); mesh.n_faces()], ..c });
            }
            let r = hamiltonian_check(sel, &x, &zeta, &v).map_err(|e| e.to_string())?;
            let scale = 1.0f64.max(r.form_value[0].hypot(r.form_value[1]));
            Ok(r.abs_error / scale)
        });
        let name = format!("{} pure gauge", sel.name());
        let check = match errs.iter().cloned().collect::<Result<Vec<f64>, String>>() {
            Ok(e) => Check::at_most(name, max_of(e), 1e-8).with_detail(format!("{cases} inputs")),
            Err(e) => Check::failed(name, e),
        };
        checks.push(check);
    }
    SuiteReport::new(Suite::Hamiltonian, seed, checks)
}

/// Torus refinement levels used for convergence fits.
pub const REFINEMENT_LEVELS: [usize; 3] = [3, 4, 5];
pub const REFINEMENT_AMPLITUDE: f64 = 0.2;

/// Hamiltonian identity with f != 0 on smooth torus samples: observed
/// convergence slope in the mesh size. Selectors that are exact at every
/// level have no slope to fit and pass on their error. The Corlette map has
/// no diffeomorphism part, so f != 0 does not apply to it.
pub fn refinement() -> SuiteReport {
    let sels = [
        MomentSelector::Flat,
        MomentSelector::Scalar,
        MomentSelector::ExtendedJ { alpha: 0.3, eps: -1.0 },
        MomentSelector::ExtendedJ { alpha: 0.3, eps: 1.0 },
        MomentSelector::ExtendedI { alpha: 0.3, eps: 1.0 },
    ];
    let reports = map_coarse(sels.len(), |i| refinement_sweep(sels[i], &REFINEMENT_LEVELS, REFINEMENT_AMPLITUDE));
    let mut checks = Vec::new();
    for (sel, r) in sels.iter().zip(reports) {
        let name = match sel {
            MomentSelector::ExtendedJ { eps, .. } | MomentSelector::ExtendedI { eps, .. } => format!("{} eps={eps} slope", sel.name()),
            _ => format!("{} slope", sel.name()),
        };
        checks.push(match r {
            Ok(r) => {
                let errs = r.rel_errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ");
                let detail = format!("faces {:?}, rel errors [{errs}]", r.n_faces);
                if max_of(r.rel_errors.iter().copied()) < 1e-8 {
                    Check::at_most(format!("{} exact", sel.name()), max_of(r.rel_errors.iter().copied()), 1e-8).with_detail(detail)
                } else {
                    Check::at_least(name, r.slope, 1.0).with_detail(detail)
                }
            }
            Err(e) => Check::failed(name, e),
        });
    }
    SuiteReport::new(Suite::Refinement, 0, checks)
}

/// Finite-difference checks of curvature, integrability, potentials and the
/// signature along the Higgs ray.
pub fn geometry(seed: u64, cases: usize) -> SuiteReport {
    let mesh = Arc::new(build_surface(2, 0).expect("genus 2"));
    let meshes = Meshes::new();
    let per_case = map_coarse(cases, |k| -> Result<[f64; 8], String> {
        let mut rng = case_rng(seed, k);
        let x = Configuration::random(mesh.clone(), &mut rng, 0.4, 1.0);
        let v = TangentVector::random(&x, &mut rng, 1.0);
        let w = TangentVector::random(&x, &mut rng, 1.0);
        let e = |e: &dyn std::fmt::Display| e.to_string();
        let (_, cj) = ehresmann_curvature(Family::J, &x, &v.jdot, &w.jdot).map_err(|x| e(&x))?;
        let (_, ci) = ehresmann_curvature(Family::I, &x, &v.jdot, &w.jdot).map_err(|x| e(&x))?;
        let nij = nijenhuis_residual(&x, &v, &w).map_err(|x| e(&x))?;
        let xp = Configuration::random(meshes.pick(k), &mut rng, 0.4, 1.0);
        let p1 = TangentVector::random(&xp, &mut rng, 1.0);
        let p2 = TangentVector::random(&xp, &mut rng, 1.0);
        let pot = |which| potential_and_ddc(&xp, which, &p1, &p2).map(|r| r.rel_error).map_err(|x| e(&x));
        Ok([
            cj.relative_error,
            ci.relative_error,
            nij,
            pot(PotentialCheck::SigmaJ)?,
            pot(PotentialCheck::SigmaIDecomposition)?,
            pot(PotentialCheck::Phi { alpha: 0.3, eps: -1.0 })?,
            pot(PotentialCheck::Phi { alpha: 0.3, eps: 1.0 })?,
            cj.closed_norm.min(ci.closed_norm),
        ])
    });
    let mut checks = Vec::new();
    match per_case.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(rows) => {
            let col = |i: usize| max_of(rows.iter().map(|r| r[i]));
            let n = format!("{cases} inputs");
            let smallest = rows.iter().map(|r| r[7]).fold(f64::INFINITY, f64::min);
            checks.push(Check::at_most("J-family curvature vs bracket of lifts", col(0), 1e-4).with_detail(&n));
            checks.push(Check::at_most("I-family curvature vs bracket of lifts", col(1), 1e-4).with_detail(&n));
            checks.push(Check::at_least("curvature closed form is nonzero", smallest, 1e-3));
            checks.push(Check::at_most("Nijenhuis residual of total I", col(2), 1e-6).with_detail(&n));
            checks.push(Check::at_most("sigma_J potential", col(3), 1e-6).with_detail(&n));
            checks.push(Check::at_most("sigma_I decomposition", col(4), 1e-6).with_detail(&n));
            checks.push(Check::at_most("coupled potential eps=-1", col(5), 1e-6).with_detail(&n));
            checks.push(Check::at_most("coupled potential eps=+1", col(6), 1e-6).with_detail(&n));
        }
        Err(e) => checks.push(Check::failed("finite-difference geometry", e)),
    }
    checks.extend(signature_checks(&mesh, seed));
    SuiteReport::new(Suite::Geometry, seed, checks)
}

/// Metric along (J, A, lambda psi) on horizontal lifts for both families.
pub fn signature_checks(mesh: &Arc<SurfaceMesh>, seed: u64) -> Vec<Check> {
    let mut rng = case_rng(seed, 991);
    let x = Configuration::random(mesh.clone(), &mut rng, 0.3, 1.0);
    let jdot = TangentVector::random(&x, &mut rng, 1.0).jdot;
    let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
    let mut checks = Vec::new();
    for fam in [Family::J, Family::I] {
        let tag = format!("{fam:?}-family");
        for eps in [1.0, -1.0] {
            match signature_probe(fam, &x, &jdot, 0.5, eps, &grid) {
                Ok(p) => {
                    checks.push(Check::at_most(format!("{tag} eps={eps} quadratic fit residual"), p.fit_residual, 1e-10));
                    if eps > 0.0 {
                        let detail = p.lambda0.map_or("no crossing".into(), |l| format!("lambda0 = {l:.4}"));
                        checks.push(Check::holds(format!("{tag} eps=+1 sign change"), p.sampled_sign_change && p.lambda0.is_some()).with_detail(detail));
                    } else {
                        let worst = p.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        checks.push(Check::holds(format!("{tag} eps=-1 negative on all samples"), p.all_negative).with_detail(format!("max value {worst:.3e}")));
                    }
                }
                Err(e) => checks.push(Check::failed(format!("{tag} eps={eps} probe"), e)),
            }
        }
    }
    checks
}

/// Tolerances of the solver fixtures.
pub const CC_TOL: f64 = 1e-6;
pub const FIELD_TOL: f64 = 1e-8;

/// Solver regression fixtures on the 72-face genus-2 mesh, one per seed.
pub fn solver(seeds: &[u64]) -> SuiteReport {
    let mesh = Arc::new(build_surface(2, 0).expect("genus 2"));
    let mut checks = Vec::new();
    for &seed in seeds {
        match solver_fixture(&mesh, seed) {
            Ok(c) => checks.extend(c),
            Err(e) => checks.push(Check::failed(format!("seed {seed} solver chain"), e)),
        }
    }
    SuiteReport::new(Suite::Solver, seeds.first().copied().unwrap_or(0), checks)
}

fn solver_fixture(mesh: &Arc<SurfaceMesh>, seed: u64) -> anyhow::Result<Vec<Check>> {
    let cfg = SolverConfig::default();
    let tag = format!("seed {seed}");
    let (j, _) = solve_cc_metric(mesh, &gauge_moduli::mesh_dec::ComplexStructureField::reference(mesh), &cfg)?;
    let target = mesh.curvature_target();
    let cc = max_of(scalar_curvature(mesh, &j)?.iter().map(|k| (k - target).abs()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x, _) = flat_seed(mesh.clone(), j.clone(), &mut rng, 0.3, &cfg)?;
    let (xh, _) = solve_harmonic(&x, &cfg)?;
    let harm = residual(System::Harmonicity, &xh, 0.0, 1.0)?.max_abs();
    let (a, phi, _) = solve_hitchin(mesh.clone(), &j, &x.a, &to_complex(&x.j.j, &x.psi), &cfg)?;
    let xt = Configuration { a, psi: to_unitary(&phi), ..x.clone() };
    let hit = residual(System::Hitchin, &xt, 0.0, 1.0)?.max_abs();
    let cross = max_of([residual(System::Hitchin, &xh, 0.0, 1.0)?.max_abs(), residual(System::Harmonicity, &xt, 0.0, 1.0)?.max_abs()]);
    Ok(vec![
        Check::at_most(format!("{tag} constant curvature |K - 2 pi chi / V|"), cc, CC_TOL),
        Check::at_most(format!("{tag} harmonic residual"), harm, FIELD_TOL),
        Check::at_most(format!("{tag} Hitchin residual"), hit, FIELD_TOL),
        Check::at_most(format!("{tag} circle map preserves solutions"), cross, 10.0 * FIELD_TOL),
    ])
}
