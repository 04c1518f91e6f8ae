//! Left-hand sides of the flat, harmonicity, Hitchin and coupled systems.

use super::circle::ComplexHiggs;
use super::config::{check_epsilon, Configuration, FieldError};
use super::ops::{codifferential, curvature, d_a1};
use crate::lie::{Coeff, G, K};
use crate::mesh_dec::faceform::{d1, density_on_faces, spread, wedge_bracket_face, FaceForm1, TwoForm};
use crate::mesh_dec::geometry::{scalar_curvature_unchecked, SCALAR_PER_GAUSS};
use crate::mesh_dec::mesh::SurfaceMesh;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum System {
    Flat,
    Harmonicity,
    Hitchin,
    CoupledHarmonic,
    CoupledHitchin,
}

impl System {
    pub const ALL: [System; 5] =
        [System::Flat, System::Harmonicity, System::Hitchin, System::CoupledHarmonic, System::CoupledHitchin];
}

/// Named residual components, each flattened to reals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualBundle {
    pub components: Vec<(String, Vec<f64>)>,
}

impl ResidualBundle {
    fn push(&mut self, name: &str, v: Vec<f64>) {
        self.components.push((name.to_string(), v));
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.components.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.components.iter().flat_map(|(_, v)| v.iter().copied()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().flat_map(|(_, v)| v).map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().flat_map(|(_, v)| v).fold(0.0, |m, x| m.max(x.abs()))
    }
}

pub(crate) fn flat_k(v: &[K]) -> Vec<f64> {
    v.iter().flat_map(|k| k.0).collect()
}

pub(crate) fn flat_g(v: &[G]) -> Vec<f64> {
    v.iter().flat_map(|g| g.0.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect()
}

/// Re F_D = F_A - 1/2 [psi ^ psi] as a weak 2-form.
pub fn real_flat_part(mesh: &SurfaceMesh, a: &FaceForm1<K>, psi: &FaceForm1<K>) -> TwoForm<K> {
    let br: Vec<K> = psi.w.iter().map(|&p| wedge_bracket_face(p, p) * 0.5).collect();
    curvature(mesh, a).sub(&spread(mesh, &br))
}

/// Im F_D = d_A psi.
pub fn imaginary_flat_part(mesh: &SurfaceMesh, a: &FaceForm1<K>, psi: &FaceForm1<K>) -> TwoForm<K> {
    d_a1(mesh, a, psi)
}

/// Complex curvature F_D of D = A + i psi.
pub fn complex_curvature(mesh: &SurfaceMesh, a: &FaceForm1<K>, psi: &FaceForm1<K>) -> TwoForm<G> {
    curvature(mesh, &complex_connection(a, psi))
}

pub fn complex_connection(a: &FaceForm1<K>, psi: &FaceForm1<K>) -> FaceForm1<G> {
    FaceForm1 { w: a.w.iter().zip(&psi.w).map(|(a, p)| [0, 1].map(|k| G::from_parts(a[k], p[k]))).collect() }
}

/// Lambda d B(Lambda F_A, J psi) at each vertex.
pub fn coupling_term(x: &Configuration) -> Vec<f64> {
    let mesh = &x.mesh;
    let lf = density_on_faces(mesh, &curvature(mesh, &x.a));
    let jpsi = x.psi.apply_j(&x.j.j);
    let w = FaceForm1 { w: jpsi.w.iter().zip(&lf).map(|(p, l)| [l.b(p[0]), l.b(p[1])]).collect() };
    d1(mesh, &w).lambda(mesh)
}

/// S - 2 pi chi / V.
pub fn scalar_defect(x: &Configuration) -> Vec<f64> {
    let t = x.mesh.curvature_target();
    scalar_curvature_unchecked(&x.mesh, &x.j).iter().map(|s| s - t).collect()
}

/// Hitchin left-hand sides F_A - [phi ^ tau phi] and dbar_A phi = d_A phi.
pub fn hitchin_parts(mesh: &SurfaceMesh, a: &FaceForm1<K>, h: &ComplexHiggs) -> (TwoForm<K>, TwoForm<G>) {
    let br: Vec<K> = h.phi.w.iter().map(|&p| wedge_bracket_face(p, [p[0].tau(), p[1].tau()]).re()).collect();
    let first = curvature(mesh, a).sub(&spread(mesh, &br));
    let ac = a.map(|k| k.complexify());
    (first, d_a1(mesh, &ac, &h.phi))
}

pub fn residual(system: System, x: &Configuration, alpha: f64, eps: f64) -> Result<ResidualBundle, FieldError> {
    let mesh = &x.mesh;
    let mut out = ResidualBundle { components: Vec::new() };
    let coupled = matches!(system, System::CoupledHarmonic | System::CoupledHitchin);
    if coupled {
        check_epsilon(eps)?;
    }
    match system {
        System::Flat => {
            let fd = complex_curvature(mesh, &x.a, &x.psi);
            out.push("F_D", flat_g(&fd.v));
        }
        System::Harmonicity | System::CoupledHarmonic => {
            out.push("F_A - [psi,psi]/2", flat_k(&real_flat_part(mesh, &x.a, &x.psi).v));
            out.push("d_A psi", flat_k(&imaginary_flat_part(mesh, &x.a, &x.psi).v));
            out.push("d_A* psi", flat_k(&codifferential(mesh, &x.j.j, &x.a, &x.psi)));
        }
        System::Hitchin | System::CoupledHitchin => {
            let h = super::circle::to_complex(&x.j.j, &x.psi);
            let (f, dbar) = hitchin_parts(mesh, &x.a, &h);
            out.push("F_A - [phi,tau phi]", flat_k(&f.v));
            out.push("dbar_A phi", flat_g(&dbar.v));
        }
    }
    if coupled {
        let sd = scalar_defect(x);
        let scalar: Vec<f64> = if system == System::CoupledHarmonic {
            let c = coupling_term(x);
            sd.iter().zip(&c).map(|(s, c)| eps * SCALAR_PER_GAUSS * s - alpha * c).collect()
        } else {
            sd.iter().map(|s| eps * SCALAR_PER_GAUSS * s).collect()
        };
        out.push("scalar", scalar);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::circle::to_complex;
    use crate::fields::config::{random_k, Configuration};
    use crate::lie::Su2;
    use crate::mesh_dec::mesh::build_surface;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn random_x(seed: u64, genus: usize) -> Configuration {
        let mesh = Arc::new(build_surface(genus, 0).unwrap());
        Configuration::random(mesh, &mut ChaCha8Rng::seed_from_u64(seed), 0.4, 1.0)
    }

    #[test]
    fn vacuum_on_flat_torus_solves_everything() {
        let x = Configuration::vacuum(Arc::new(build_surface(1, 1).unwrap()));
        for s in System::ALL {
            assert!(residual(s, &x, 0.3, -1.0).unwrap().max_abs() < 1e-12, "{s:?}");
        }
    }

    #[test]
    fn harmonicity_splits_flatness() {
        let x = random_x(1, 2);
        let fd = complex_curvature(&x.mesh, &x.a, &x.psi);
        let re = real_flat_part(&x.mesh, &x.a, &x.psi);
        let im = imaginary_flat_part(&x.mesh, &x.a, &x.psi);
        for ((z, r), i) in fd.v.iter().zip(&re.v).zip(&im.v) {
            assert!((z.re() - *r).norm() < 1e-12 && (z.im() - *i).norm() < 1e-12);
        }
    }

    #[test]
    fn coupled_scalar_decouples_at_zero_alpha() {
        let x = random_x(2, 2);
        let r = residual(System::CoupledHarmonic, &x, 0.0, -1.0).unwrap();
        let sd = scalar_defect(&x);
        for (a, b) in r.get("scalar").unwrap().iter().zip(&sd) {
            assert_eq!(*a, -SCALAR_PER_GAUSS * b);
        }
        let h1 = residual(System::CoupledHitchin, &x, 0.0, 1.0).unwrap();
        let h2 = residual(System::CoupledHitchin, &x, 0.7, 1.0).unwrap();
        assert_eq!(h1.get("scalar"), h2.get("scalar"));
        assert!(residual(System::CoupledHitchin, &x, 0.7, 0.5).is_err());
    }

    #[test]
    fn scalar_residual_has_zero_mean() {
        let x = random_x(3, 2);
        let r = residual(System::CoupledHarmonic, &x, 0.5, 1.0).unwrap();
        let mean: f64 = r.get("scalar").unwrap().iter().zip(x.mesh.vertex_masses()).map(|(a, m)| a * m).sum();
        assert!(mean.abs() < 1e-10);
    }

    #[test]
    fn hitchin_matches_harmonicity_through_circle_map() {
        let x = random_x(4, 2);
        let h = to_complex(&x.j.j, &x.psi);
        let (f, dbar) = hitchin_parts(&x.mesh, &x.a, &h);
        let re = real_flat_part(&x.mesh, &x.a, &x.psi);
        assert!(f.sub(&re).norm_sq().sqrt() < 1e-12);
        let im = imaginary_flat_part(&x.mesh, &x.a, &x.psi);
        let cod = codifferential(&x.mesh, &x.j.j, &x.a, &x.psi);
        for v in 0..x.mesh.n_vertices() {
            let expect = G::from_parts(cod[v] * (0.5 * x.mesh.mass(v)), im.v[v] * 0.5);
            assert!((dbar.v[v] - expect).norm_sq().sqrt() < 1e-12);
        }
    }

    #[test]
    fn constant_gauge_preserves_residual_norms() {
        let x = random_x(5, 2);
        let g = Su2::exp(random_k(&mut ChaCha8Rng::seed_from_u64(9), 2.0));
        let y = Configuration { a: x.a.map(|k| g.ad(k)), psi: x.psi.map(|k| g.ad(k)), ..x.clone() };
        for s in System::ALL {
            let a = residual(s, &x, 0.4, 1.0).unwrap().norm();
            let b = residual(s, &y, 0.4, 1.0).unwrap().norm();
            assert!((a - b).abs() < 1e-10 * (1.0 + a), "{s:?}");
        }
    }
}
