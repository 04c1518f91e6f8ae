//! Moment maps, evaluated as linear functionals of a gauge parameter.

use super::MomentError;
use crate::fields::config::Configuration;
use crate::fields::ops::d_a1;
use crate::fields::residual::{complex_connection, complex_curvature, coupling_term, imaginary_flat_part, real_flat_part};
use crate::lie::{Coeff, Su2, G, K};
use crate::mesh_dec::faceform::{avg_to_vertices, pair_two_zero};
use crate::mesh_dec::geometry::{hamiltonian_field, scalar_curvature_unchecked, SCALAR_PER_GAUSS};
use crate::mesh_dec::mesh::SurfaceMesh;
use nalgebra::Vector2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Coefficient of psi(J eta) next to the vertical part in the extended
/// moment map of the J-family.
pub const HIGGS_SHIFT: f64 = -1.0;

/// Complex part of a parameter of the extended complexified group.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPart {
    /// Per-face vector field, added to the Hamiltonian field of f.
    pub y: Vec<Vector2<f64>>,
    /// Imaginary part of the vertex gauge field.
    pub u_im: Vec<K>,
}

/// zeta = (f, u): a mean-zero Hamiltonian f and a vertex gauge field u.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeParameter {
    pub f: Vec<f64>,
    pub u: Vec<K>,
    pub complex: Option<ComplexPart>,
}

impl GaugeParameter {
    pub fn zeros(mesh: &SurfaceMesh) -> Self {
        GaugeParameter { f: vec![0.0; mesh.n_vertices()], u: vec![K::ZERO; mesh.n_vertices()], complex: None }
    }

    /// Checks sizes and that f has zero mean.
    pub fn new(mesh: &SurfaceMesh, f: Vec<f64>, u: Vec<K>, complex: Option<ComplexPart>) -> Result<Self, MomentError> {
        let p = GaugeParameter { f, u, complex };
        p.check(mesh)?;
        Ok(p)
    }

    pub fn check(&self, mesh: &SurfaceMesh) -> Result<(), MomentError> {
        let nv = mesh.n_vertices();
        if self.f.len() != nv || self.u.len() != nv {
            return Err(MomentError::Shape(format!("expected {nv} vertex values")));
        }
        if let Some(c) = &self.complex {
            if c.y.len() != mesh.n_faces() || c.u_im.len() != nv {
                return Err(MomentError::Shape("complex part does not match the mesh".into()));
            }
        }
        let mean: f64 = self.f.iter().zip(mesh.vertex_masses()).map(|(a, m)| a * m).sum();
        let scale = 1.0 + self.f.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        if mean.abs() > 1e-12 * scale {
            return Err(MomentError::NotMeanZero(mean));
        }
        Ok(())
    }

    pub fn random<R: rand::Rng>(mesh: &SurfaceMesh, rng: &mut R, with_f: bool, complex: bool) -> Self {
        let nv = mesh.n_vertices();
        let f = if with_f {
            crate::mesh_dec::geometry::mean_zero(mesh, &(0..nv).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>())
        } else {
            vec![0.0; nv]
        };
        let u = (0..nv).map(|_| crate::fields::config::random_k(rng, 1.0)).collect();
        let complex = complex.then(|| ComplexPart {
            y: (0..mesh.n_faces()).map(|_| Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            u_im: (0..nv).map(|_| crate::fields::config::random_k(rng, 1.0)).collect(),
        });
        GaugeParameter { f, u, complex }
    }

    pub fn add(&self, o: &Self) -> Self {
        let complex = match (&self.complex, &o.complex) {
            (Some(a), Some(b)) => Some(ComplexPart {
                y: a.y.iter().zip(&b.y).map(|(p, q)| p + q).collect(),
                u_im: a.u_im.iter().zip(&b.u_im).map(|(&p, &q)| p + q).collect(),
            }),
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        };
        GaugeParameter {
            f: self.f.iter().zip(&o.f).map(|(a, b)| a + b).collect(),
            u: self.u.iter().zip(&o.u).map(|(&a, &b)| a + b).collect(),
            complex,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        GaugeParameter {
            f: self.f.iter().map(|a| a * s).collect(),
            u: self.u.iter().map(|&a| a * s).collect(),
            complex: self.complex.as_ref().map(|c| ComplexPart {
                y: c.y.iter().map(|p| p * s).collect(),
                u_im: c.u_im.iter().map(|&p| p * s).collect(),
            }),
        }
    }

    /// Constant gauge rotation acting by Ad_g on the algebra parts.
    pub fn rotate(&self, g: Su2) -> Self {
        GaugeParameter {
            f: self.f.clone(),
            u: self.u.iter().map(|&a| g.ad(a)).collect(),
            complex: self.complex.as_ref().map(|c| ComplexPart { y: c.y.clone(), u_im: c.u_im.iter().map(|&a| g.ad(a)).collect() }),
        }
    }

    /// Real coordinates: f, then u, then (if present) y and u_im.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = self.f.clone();
        out.extend(self.u.iter().flat_map(|k| k.0));
        if let Some(c) = &self.complex {
            out.extend(c.y.iter().flat_map(|p| [p[0], p[1]]));
            out.extend(c.u_im.iter().flat_map(|k| k.0));
        }
        out
    }

    /// Hamiltonian field of f plus the complex part's vector field.
    pub fn vector_field(&self, mesh: &SurfaceMesh) -> Vec<Vector2<f64>> {
        let mut eta = hamiltonian_field(mesh, &self.f);
        if let Some(c) = &self.complex {
            for (e, y) in eta.iter_mut().zip(&c.y) {
                *e += y;
            }
        }
        eta
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MomentSelector {
    Flat,
    Corlette,
    Scalar,
    ExtendedJ { alpha: f64, eps: f64 },
    ExtendedI { alpha: f64, eps: f64 },
}

impl MomentSelector {
    pub fn is_complex(self) -> bool {
        self == MomentSelector::Flat
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Flat => "flat",
            Self::Corlette => "corlette",
            Self::Scalar => "scalar",
            Self::ExtendedJ { .. } => "extended_J",
            Self::ExtendedI { .. } => "extended_I",
        }
    }
}

/// Vertical part of zeta for the connection A: u + A(eta) averaged to vertices.
pub fn vertical_part(x: &Configuration, zeta: &GaugeParameter, eta: &[Vector2<f64>]) -> Vec<K> {
    let aeta = avg_to_vertices(&x.mesh, &x.a.contract(eta));
    zeta.u.iter().zip(&aeta).map(|(&u, &a)| u + a).collect()
}

/// psi(J eta) per face.
pub fn psi_j_eta(x: &Configuration, eta: &[Vector2<f64>]) -> Vec<K> {
    let jeta: Vec<Vector2<f64>> = eta.iter().zip(&x.j.j).map(|(e, j)| j * e).collect();
    x.psi.contract(&jeta)
}

/// -sum_v f_v S_v m_v with S the scalar curvature.
fn scalar_part(x: &Configuration, f: &[f64]) -> f64 {
    let s = scalar_curvature_unchecked(&x.mesh, &x.j);
    let mut acc = 0.0;
    for ((fv, sv), m) in f.iter().zip(&s).zip(x.mesh.vertex_masses()) {
        acc -= SCALAR_PER_GAUSS * fv * sv * m;
    }
    acc
}

fn real_pairing(two: &[K], zero: &[K]) -> f64 {
    let mut acc = 0.0;
    for (a, &b) in two.iter().zip(zero) {
        acc += a.b(b);
    }
    acc
}

fn check_group(sel: MomentSelector, zeta: &GaugeParameter, x: &Configuration) -> Result<(), MomentError> {
    zeta.check(&x.mesh)?;
    match (sel.is_complex(), zeta.complex.is_some()) {
        (true, false) => Err(MomentError::Group("flat moment map needs the complex part of zeta".into())),
        (false, true) => Err(MomentError::Group(format!("{} takes a real gauge parameter", sel.name()))),
        _ => {
            if let MomentSelector::ExtendedJ { alpha, eps } | MomentSelector::ExtendedI { alpha, eps } = sel {
                crate::fields::config::check_epsilon(eps)?;
                if !alpha.is_finite() {
                    return Err(crate::fields::FieldError::InvalidAlpha(alpha).into());
                }
            }
            Ok(())
        }
    }
}

/// Complex vertex field D zeta = u + i u_im + avg(D(y)).
pub fn complex_vertical_part(x: &Configuration, zeta: &GaugeParameter) -> Vec<G> {
    let y = zeta.vector_field(&x.mesh);
    let dy = avg_to_vertices(&x.mesh, &complex_connection(&x.a, &x.psi).contract(&y));
    let c = zeta.complex.as_ref().expect("checked by caller");
    zeta.u.iter().zip(&c.u_im).zip(&dy).map(|((&u, &ui), &d)| G::from_parts(u, ui) + d).collect()
}

/// The corlette pairing sum_v B(d_A(J psi)_v, w_v).
pub fn corlette_pairing(x: &Configuration, w: &[K]) -> f64 {
    let djpsi = d_a1(&x.mesh, &x.a, &x.psi.apply_j(&x.j.j));
    pair_two_zero(&djpsi, w)
}

/// Real moment maps. The flat selector is complex valued: use
/// [`moment_eval_complex`].
pub fn moment_eval(sel: MomentSelector, x: &Configuration, zeta: &GaugeParameter) -> Result<f64, MomentError> {
    check_group(sel, zeta, x)?;
    let mesh = &x.mesh;
    Ok(match sel {
        MomentSelector::Flat => return Err(MomentError::ComplexValued),
        MomentSelector::Corlette => corlette_pairing(x, &zeta.u),
        MomentSelector::Scalar => scalar_part(x, &zeta.f),
        MomentSelector::ExtendedJ { alpha, eps } => {
            let eta = hamiltonian_field(mesh, &zeta.f);
            let w = vertical_part(x, zeta, &eta);
            let pj = avg_to_vertices(mesh, &psi_j_eta(x, &eta));
            let shifted: Vec<K> = w.iter().zip(&pj).map(|(&a, &b)| a + b * HIGGS_SHIFT).collect();
            let coupling = coupling_term(x);
            let mut cf = 0.0;
            for ((fv, c), m) in zeta.f.iter().zip(&coupling).zip(mesh.vertex_masses()) {
                cf += fv * c * m;
            }
            eps * scalar_part(x, &zeta.f) + alpha * (corlette_pairing(x, &shifted) + cf)
        }
        MomentSelector::ExtendedI { alpha, eps } => {
            let eta = hamiltonian_field(mesh, &zeta.f);
            let w = vertical_part(x, zeta, &eta);
            let pe = avg_to_vertices(mesh, &x.psi.contract(&eta));
            let re = real_pairing(&real_flat_part(mesh, &x.a, &x.psi).v, &w);
            let im = real_pairing(&imaginary_flat_part(mesh, &x.a, &x.psi).v, &pe);
            let jdot = super::action::lie_derivative_tangent(x, &eta)?;
            let lam = lambda_form(x, &jdot.iter().map(|m| -m).collect::<Vec<_>>());
            eps * scalar_part(x, &zeta.f) + alpha * (re - im - lam)
        }
    })
}

/// lambda(v) = 1/4 int B(psi(J Jdot) ^ psi), the potential term of the I-family.
pub fn lambda_form(x: &Configuration, jdot: &[nalgebra::Matrix2<f64>]) -> f64 {
    let jj: Vec<_> = x.j.j.iter().zip(jdot).map(|(j, d)| j * d).collect();
    0.25 * crate::mesh_dec::faceform::pair_integral(&x.psi.compose(&jj), &x.psi)
}

/// Flat moment map sum_v B(F_D, D zeta), complex valued.
pub fn moment_eval_complex(x: &Configuration, zeta: &GaugeParameter) -> Result<Complex64, MomentError> {
    check_group(MomentSelector::Flat, zeta, x)?;
    let fd = complex_curvature(&x.mesh, &x.a, &x.psi);
    Ok(pair_two_zero(&fd, &complex_vertical_part(x, zeta)))
}

/// Either value as a complex number.
pub fn moment_value(sel: MomentSelector, x: &Configuration, zeta: &GaugeParameter) -> Result<Complex64, MomentError> {
    if sel.is_complex() {
        moment_eval_complex(x, zeta)
    } else {
        moment_eval(sel, x, zeta).map(|v| Complex64::new(v, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::config::Configuration;
    use crate::fields::residual::{residual, System};
    use crate::fields::ops::codifferential;
    use crate::mesh_dec::mesh::build_surface;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn random_x(seed: u64) -> Configuration {
        Configuration::random(Arc::new(build_surface(2, 0).unwrap()), &mut ChaCha8Rng::seed_from_u64(seed), 0.3, 0.5)
    }

    const REAL: [MomentSelector; 4] = [
        MomentSelector::Corlette,
        MomentSelector::Scalar,
        MomentSelector::ExtendedJ { alpha: 0.3, eps: -1.0 },
        MomentSelector::ExtendedI { alpha: 0.3, eps: 1.0 },
    ];

    #[test]
    fn vacuum_values_vanish() {
        let x = Configuration::vacuum(Arc::new(build_surface(1, 1).unwrap()));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zeta = GaugeParameter::random(&x.mesh, &mut rng, true, false);
        for sel in REAL {
            assert!(moment_eval(sel, &x, &zeta).unwrap().abs() < 1e-12, "{}", sel.name());
        }
        let zc = GaugeParameter::random(&x.mesh, &mut rng, true, true);
        assert!(moment_eval_complex(&x, &zc).unwrap().norm() < 1e-12);
    }

    #[test]
    fn corlette_vanishes_without_higgs_field() {
        let x = random_x(2);
        let x = x.with_psi(crate::mesh_dec::faceform::FaceForm1::zeros(x.n_faces()));
        let zeta = GaugeParameter::random(&x.mesh, &mut ChaCha8Rng::seed_from_u64(3), true, false);
        assert_eq!(moment_eval(MomentSelector::Corlette, &x, &zeta).unwrap(), 0.0);
    }

    #[test]
    fn flat_map_splits_into_real_and_imaginary_parts() {
        let x = random_x(4);
        let zeta = GaugeParameter::random(&x.mesh, &mut ChaCha8Rng::seed_from_u64(5), true, true);
        let c = zeta.complex.as_ref().unwrap();
        // Independent assembly: B is complex bilinear, so with F = R + iI and
        // D zeta = a + ib the pairing is B(R,a) - B(I,b) + i(B(R,b) + B(I,a)).
        let y = zeta.vector_field(&x.mesh);
        let ay = avg_to_vertices(&x.mesh, &x.a.contract(&y));
        let py = avg_to_vertices(&x.mesh, &x.psi.contract(&y));
        let a: Vec<K> = zeta.u.iter().zip(&ay).map(|(&u, &v)| u + v).collect();
        let b: Vec<K> = c.u_im.iter().zip(&py).map(|(&u, &v)| u + v).collect();
        let r = real_flat_part(&x.mesh, &x.a, &x.psi).v;
        let i = imaginary_flat_part(&x.mesh, &x.a, &x.psi).v;
        let re = real_pairing(&r, &a) - real_pairing(&i, &b);
        let im = real_pairing(&r, &b) + real_pairing(&i, &a);
        let z = moment_eval_complex(&x, &zeta).unwrap();
        assert!((z.re - re).abs() < 1e-12 && (z.im - im).abs() < 1e-12, "{z} vs {re} {im}");
    }

    #[test]
    fn extended_j_pairs_with_the_coupled_residual() {
        let x = random_x(6);
        let (alpha, eps) = (0.4, -1.0);
        let sel = MomentSelector::ExtendedJ { alpha, eps };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = x.mesh.vertex_masses();
        // u-part: -alpha sum m B(d_A* psi, u).
        let zu = GaugeParameter::random(&x.mesh, &mut rng, false, false);
        let cod = codifferential(&x.mesh, &x.j.j, &x.a, &x.psi);
        let expect_u: f64 = -alpha * cod.iter().zip(&zu.u).zip(m).map(|((c, &u), m)| c.b(u) * m).sum::<f64>();
        let got_u = moment_eval(sel, &x, &zu).unwrap();
        assert!((got_u - expect_u).abs() < 1e-10 * (1.0 + expect_u.abs()), "{got_u} vs {expect_u}");
        // f-part: minus the scalar residual, plus the corlette term of the shifted vertical part.
        let zf = GaugeParameter::random(&x.mesh, &mut rng, true, false);
        let zf = GaugeParameter { u: vec![K::ZERO; x.mesh.n_vertices()], ..zf };
        let res = residual(System::CoupledHarmonic, &x, alpha, eps).unwrap();
        let scal: f64 = res.get("scalar").unwrap().iter().zip(&zf.f).zip(m).map(|((r, f), m)| r * f * m).sum();
        let eta = hamiltonian_field(&x.mesh, &zf.f);
        let w = vertical_part(&x, &zf, &eta);
        let pj = avg_to_vertices(&x.mesh, &psi_j_eta(&x, &eta));
        let shifted: Vec<K> = w.iter().zip(&pj).map(|(&a, &b)| a - b).collect();
        let expect_f = -scal + alpha * corlette_pairing(&x, &shifted);
        let got_f = moment_eval(sel, &x, &zf).unwrap();
        assert!((got_f - expect_f).abs() < 1e-10 * (1.0 + expect_f.abs()), "{got_f} vs {expect_f}");
    }

    #[test]
    fn group_mismatch_and_bad_eps_are_rejected() {
        let x = random_x(8);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let real = GaugeParameter::random(&x.mesh, &mut rng, true, false);
        let cplx = GaugeParameter::random(&x.mesh, &mut rng, true, true);
        assert!(matches!(moment_eval_complex(&x, &real), Err(MomentError::Group(_))));
        assert!(matches!(moment_eval(MomentSelector::Corlette, &x, &cplx), Err(MomentError::Group(_))));
        assert!(matches!(moment_eval(MomentSelector::Flat, &x, &cplx), Err(MomentError::ComplexValued)));
        assert!(moment_eval(MomentSelector::ExtendedI { alpha: 0.1, eps: 0.0 }, &x, &real).is_err());
        let mut off = real.clone();
        off.f[0] += 1.0;
        assert!(matches!(moment_eval(MomentSelector::Scalar, &x, &off), Err(MomentError::NotMeanZero(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn moment_maps_are_linear_in_zeta(seed in 0u64..1000, s in -2.0f64..2.0, t in -2.0f64..2.0) {
            let x = random_x(seed % 7);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b) = (GaugeParameter::random(&x.mesh, &mut rng, true, false), GaugeParameter::random(&x.mesh, &mut rng, true, false));
            let comb = a.scale(s).add(&b.scale(t));
            for sel in REAL {
                let lhs = moment_eval(sel, &x, &comb).unwrap();
                let rhs = s * moment_eval(sel, &x, &a).unwrap() + t * moment_eval(sel, &x, &b).unwrap();
                prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()), "{}", sel.name());
            }
            let (a, b) = (GaugeParameter::random(&x.mesh, &mut rng, true, true), GaugeParameter::random(&x.mesh, &mut rng, true, true));
            let lhs = moment_eval_complex(&x, &a.scale(s).add(&b.scale(t))).unwrap();
            let rhs = moment_eval_complex(&x, &a).unwrap() * s + moment_eval_complex(&x, &b).unwrap() * t;
            prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
        }
    }
}
