//! Finite-difference verification of the Hamiltonian identity
//! <d mu(x)[v], zeta> = omega(zeta . x, v) and of equivariance.

use super::action::{infinitesimal_action, ActionVariant};
use super::maps::{moment_value, GaugeParameter, MomentSelector};
use super::MomentError;
use crate::fd::derivative;
use crate::fields::config::{Configuration, TangentVector};
use crate::fields::gauge::gauge_transform;
use crate::kahler::forms::{eval_form, eval_form_complex, FormSelector};
use crate::lie::Su2;
use num_complex::Complex64;
use serde::Serialize;

/// Step used for the directional derivative of mu.
pub const MOMENT_STEP: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct HamiltonianReport {
    pub selector: String,
    pub derivative: [f64; 2],
    pub form_value: [f64; 2],
    pub abs_error: f64,
    pub rel_error: f64,
}

/// The form and action each moment map is Hamiltonian for.
pub fn form_and_action(sel: MomentSelector) -> (Option<FormSelector>, ActionVariant) {
    match sel {
        MomentSelector::Flat => (None, ActionVariant::Pc),
        MomentSelector::Corlette => (Some(FormSelector::OmegaJ), ActionVariant::P),
        MomentSelector::Scalar => (Some(FormSelector::Fujiki), ActionVariant::P),
        MomentSelector::ExtendedJ { alpha, eps } => (Some(FormSelector::CoupledJ { alpha, eps }), ActionVariant::P),
        MomentSelector::ExtendedI { alpha, eps } => (Some(FormSelector::CoupledI { alpha, eps }), ActionVariant::P),
    }
}

/// Derivative of mu along v by Richardson-extrapolated central differences.
pub fn moment_derivative(sel: MomentSelector, x: &Configuration, zeta: &GaugeParameter, v: &TangentVector, h: f64) -> Result<Complex64, MomentError> {
    moment_value(sel, x, zeta)?;
    let at = |t: f64| moment_value(sel, &x.step(v, t), zeta).expect("validated at t = 0");
    let re = derivative(|t| at(t).re, h)?;
    let im = if sel.is_complex() { derivative(|t| at(t).im, h)? } else { 0.0 };
    Ok(Complex64::new(re, im))
}

pub fn hamiltonian_check(sel: MomentSelector, x: &Configuration, zeta: &GaugeParameter, v: &TangentVector) -> Result<HamiltonianReport, MomentError> {
    let lhs = moment_derivative(sel, x, zeta, v, MOMENT_STEP)?;
    let (form, variant) = form_and_action(sel);
    let act = infinitesimal_action(variant, x, zeta)?;
    let rhs = match form {
        Some(f) => Complex64::new(eval_form(f, x, &act, v)?, 0.0),
        None => eval_form_complex(x, &act, v),
    };
    let abs_error = (lhs - rhs).norm();
    Ok(HamiltonianReport {
        selector: sel.name().into(),
        derivative: [lhs.re, lhs.im],
        form_value: [rhs.re, rhs.im],
        abs_error,
        rel_error: abs_error / lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE),
    })
}

/// |mu(g.x, Ad_g zeta) - mu(x, zeta)| for a constant rotation g.
pub fn equivariance_check(sel: MomentSelector, x: &Configuration, g: Su2, zeta: &GaugeParameter) -> Result<f64, MomentError> {
    let gx = gauge_transform(&vec![g; x.mesh.n_vertices()], x)?;
    let before = moment_value(sel, x, zeta)?;
    let after = moment_value(sel, &gx, &zeta.rotate(g))?;
    Ok((after - before).norm())
}

/// Smooth periodic sample data on a mesh with a global torus chart: a
/// configuration, a gauge parameter with f != 0 and a tangent vector, all
/// sampled from fixed trigonometric fields so that refinements see the same
/// continuum data.
pub fn smooth_torus_sample(mesh: std::sync::Arc<crate::mesh_dec::SurfaceMesh>, amp: f64) -> Option<(Configuration, GaugeParameter, TangentVector)> {
    use crate::lie::K;
    use crate::mesh_dec::geometry::{mean_zero, reference_j, ComplexStructureField};
    use nalgebra::Matrix2;
    use std::f64::consts::TAU;
    let chart = mesh.vertex_chart()?;
    let nf = mesh.n_faces();
    let wave = |p: [f64; 2], k: usize| {
        let (a, b) = (TAU * p[0], TAU * p[1]);
        match k % 6 {
            0 => (a + 0.3).sin() * b.cos(),
            1 => (a - b).cos() + 0.5 * (b + 0.7).sin(),
            2 => (a + b).sin(),
            3 => a.cos() + (2.0 * b).sin() * 0.3,
            4 => (a + 2.0 * b + 0.2).cos(),
            _ => b.sin() * (a + 0.4).cos(),
        }
    };
    let frame = |f: usize| mesh.face_chart_frame(f).expect("chart");
    let centroid = |f: usize| mesh.face_centroid_chart(f).expect("chart");
    let e0 = frame(0);
    let jc = e0 * reference_j() * e0.try_inverse().expect("frame");
    let kfield = |p: [f64; 2], s: usize| K([wave(p, s), wave(p, s + 1), wave(p, s + 2)]);
    let form = |s: usize| crate::mesh_dec::faceform::FaceForm1 {
        w: (0..nf)
            .map(|f| {
                let (p, e) = (centroid(f), frame(f));
                let (k1, k2) = (kfield(p, s) * amp, kfield(p, s + 3) * amp);
                [k1 * e[(0, 0)] + k2 * e[(1, 0)], k1 * e[(0, 1)] + k2 * e[(1, 1)]]
            })
            .collect(),
    };
    let jchart = |p: [f64; 2]| {
        let (a, b) = (0.3 * wave(p, 2), 0.3 * wave(p, 4));
        let m = Matrix2::new(1.0 + a, b, b, 1.0 - a);
        m * jc * m.try_inverse().expect("small perturbation")
    };
    let j = ComplexStructureField {
        j: (0..nf)
            .map(|f| {
                let e = frame(f);
                e.try_inverse().expect("frame") * jchart(centroid(f)) * e
            })
            .collect(),
    };
    let x = Configuration::new(mesh.clone(), j, form(0), form(1)).ok()?;
    let jdot = (0..nf)
        .map(|f| {
            let (p, e) = (centroid(f), frame(f));
            let jp = jchart(p);
            let t = Matrix2::new(wave(p, 3), wave(p, 5), wave(p, 0), -wave(p, 3));
            let t = (t + jp * t * jp) * (0.5 * amp);
            e.try_inverse().expect("frame") * t * e
        })
        .collect();
    let v = TangentVector { jdot, a: form(2), psidot: form(4) };
    let f = mean_zero(&mesh, &chart.iter().map(|&p| wave(p, 0) + 0.5 * wave(p, 4)).collect::<Vec<_>>());
    let u = chart.iter().map(|&p| kfield(p, 1)).collect();
    Some((x, GaugeParameter { f, u, complex: None }, v))
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementReport {
    pub selector: String,
    pub levels: Vec<usize>,
    pub n_faces: Vec<usize>,
    pub rel_errors: Vec<f64>,
    /// Least-squares slope of -log2(error) against the level.
    pub slope: f64,
}

/// Hamiltonian identity on smooth torus data over a sequence of refinement
/// levels; the slope is the observed convergence order in the mesh size.
pub fn refinement_sweep(sel: MomentSelector, levels: &[usize], amp: f64) -> Result<RefinementReport, MomentError> {
    let mut rel_errors = Vec::new();
    let mut n_faces = Vec::new();
    for &r in levels {
        let mesh = std::sync::Arc::new(crate::mesh_dec::build_surface(1, r).map_err(|e| MomentError::Shape(e.to_string()))?);
        let (x, zeta, v) = smooth_torus_sample(mesh.clone(), amp).ok_or_else(|| MomentError::Shape("mesh has no torus chart".into()))?;
        let zeta = if sel.is_complex() {
            GaugeParameter { complex: Some(super::maps::ComplexPart { y: vec![nalgebra::Vector2::zeros(); mesh.n_faces()], u_im: zeta.u.clone() }), ..zeta }
        } else {
            zeta
        };
        rel_errors.push(hamiltonian_check(sel, &x, &zeta, &v)?.rel_error);
        n_faces.push(mesh.n_faces());
    }
    let xs: Vec<f64> = levels.iter().map(|&l| l as f64).collect();
    let ys: Vec<f64> = rel_errors.iter().map(|e| -e.max(f64::MIN_POSITIVE).log2()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { f64::NAN };
    Ok(RefinementReport { selector: sel.name().into(), levels: levels.to_vec(), n_faces, rel_errors, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::config::random_k;
    use crate::mesh_dec::build_surface;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    const ALL: [MomentSelector; 5] = [
        MomentSelector::Flat,
        MomentSelector::Corlette,
        MomentSelector::Scalar,
        MomentSelector::ExtendedJ { alpha: 0.3, eps: -1.0 },
        MomentSelector::ExtendedI { alpha: 0.3, eps: 1.0 },
    ];

    fn random_x(seed: u64) -> Configuration {
        Configuration::random(Arc::new(build_surface(2, 0).unwrap()), &mut ChaCha8Rng::seed_from_u64(seed), 0.3, 0.5)
    }

    #[test]
    fn hamiltonian_identity_holds_for_pure_gauge_parameters() {
        for (k, sel) in ALL.into_iter().enumerate() {
            let x = random_x(10 + k as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(20 + k as u64);
            let v = TangentVector::random_vertical(&x, &mut rng, 0.5);
            let zeta = GaugeParameter::random(&x.mesh, &mut rng, false, sel.is_complex());
            let zeta = match zeta.complex {
                Some(c) => GaugeParameter { complex: Some(super::super::maps::ComplexPart { y: vec![nalgebra::Vector2::zeros(); x.n_faces()], ..c }), ..zeta },
                None => zeta,
            };
            let r = hamiltonian_check(sel, &x, &zeta, &v).unwrap();
            assert!(r.abs_error < 1e-8, "{}: {r:?}", sel.name());
        }
    }

    #[test]
    fn flat_identity_is_exact_with_vector_fields() {
        let x = random_x(30);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let v = TangentVector::random(&x, &mut rng, 0.5);
        let zeta = GaugeParameter::random(&x.mesh, &mut rng, true, true);
        let r = hamiltonian_check(MomentSelector::Flat, &x, &zeta, &v).unwrap();
        assert!(r.abs_error < 1e-8, "{r:?}");
    }

    #[test]
    fn moment_maps_are_equivariant() {
        let x = random_x(40);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let g = Su2::exp(random_k(&mut rng, 2.0));
        for sel in ALL {
            let zeta = GaugeParameter::random(&x.mesh, &mut rng, true, sel.is_complex());
            let err = equivariance_check(sel, &x, g, &zeta).unwrap();
            assert!(err < 1e-10, "{}: {err}", sel.name());
        }
    }

    #[test]
    fn smooth_sample_needs_a_torus() {
        assert!(smooth_torus_sample(Arc::new(build_surface(2, 0).unwrap()), 0.2).is_none());
        let (x, zeta, _) = smooth_torus_sample(Arc::new(build_surface(1, 1).unwrap()), 0.2).unwrap();
        zeta.check(&x.mesh).unwrap();
    }

    #[test]
    fn hamiltonian_error_decreases_under_refinement() {
        let r = refinement_sweep(MomentSelector::Scalar, &[2, 3], 0.2).unwrap();
        assert!(r.rel_errors[1] < r.rel_errors[0], "{r:?}");
        assert!(r.slope >= 1.0, "{r:?}");
    }
}
