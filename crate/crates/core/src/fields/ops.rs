//! Curvature, covariant exterior derivative and its exact adjoint.

use super::config::FieldError;
use crate::lie::{Coeff, K};
use crate::mesh_dec::faceform::{d1, face_mean, grad, spread, wedge_bracket_face, FaceForm1, TwoForm};
use crate::mesh_dec::mesh::SurfaceMesh;
use crate::par;
use nalgebra::Matrix2;

/// A discrete form of degree 0, 1 or 2.
#[derive(Clone, Debug, PartialEq)]
pub enum Form<C: Coeff> {
    Zero(Vec<C>),
    One(FaceForm1<C>),
    Two(TwoForm<C>),
}

/// F_A = dA + 1/2 [A ^ A].
pub fn curvature<C: Coeff>(mesh: &SurfaceMesh, a: &FaceForm1<C>) -> TwoForm<C> {
    let br: Vec<C> = par::map_indexed(mesh.n_faces(), |f| wedge_bracket_face(a.w[f], a.w[f]) * 0.5);
    d1(mesh, a).add(&spread(mesh, &br))
}

/// d_A u = du + [A, u] for a vertex field; u enters through its face mean.
pub fn d_a0<C: Coeff>(mesh: &SurfaceMesh, a: &FaceForm1<C>, u: &[C]) -> FaceForm1<C> {
    let g = grad(mesh, u);
    let um = face_mean(mesh, u);
    FaceForm1 {
        w: par::map_indexed(mesh.n_faces(), |f| {
            let [a1, a2] = a.w[f];
            [g.w[f][0] + a1.bracket(um[f]), g.w[f][1] + a2.bracket(um[f])]
        }),
    }
}

/// d_A w = dw + [A ^ w] for a face 1-form.
pub fn d_a1<C: Coeff>(mesh: &SurfaceMesh, a: &FaceForm1<C>, w: &FaceForm1<C>) -> TwoForm<C> {
    let br: Vec<C> = par::map_indexed(mesh.n_faces(), |f| wedge_bracket_face(a.w[f], w.w[f]));
    d1(mesh, w).add(&spread(mesh, &br))
}

pub fn covariant_d<C: Coeff>(mesh: &SurfaceMesh, a: &FaceForm1<C>, c: &Form<C>) -> Result<Form<C>, FieldError> {
    match c {
        Form::Zero(u) => Ok(Form::One(d_a0(mesh, a, u))),
        Form::One(w) => Ok(Form::Two(d_a1(mesh, a, w))),
        Form::Two(_) => Err(FieldError::DegreeTooHigh),
    }
}

/// d_A^* psi, the transpose of [`d_a0`] for the lumped vertex product and
/// the per-face product <a, b> = int B(a ^ J b).
pub fn codifferential(mesh: &SurfaceMesh, j: &[Matrix2<f64>], a: &FaceForm1<K>, psi: &FaceForm1<K>) -> Vec<K> {
    let jpsi = psi.apply_j(j);
    let parts = par::map_indexed(mesh.n_faces(), |f| {
        let [j1, j2] = jpsi.w[f];
        let r = [j2 * 0.5, j1 * -0.5];
        let [a1, a2] = a.w[f];
        let common = (r[0].bracket(a1) + r[1].bracket(a2)) * (1.0 / 3.0);
        [-r[0] - r[1] + common, r[0] + common, r[1] + common]
    });
    let mut out = vec![K::ZERO; mesh.n_vertices()];
    for (f, p) in parts.iter().enumerate() {
        for (k, &v) in mesh.face(f).iter().enumerate() {
            out[v] += p[k];
        }
    }
    out.iter().zip(mesh.vertex_masses()).map(|(&x, &m)| x * (1.0 / m)).collect()
}

/// Per-face inner product sum_f int B(a ^ J b) of two K-valued 1-forms.
pub fn inner1(j: &[Matrix2<f64>], a: &FaceForm1<K>, b: &FaceForm1<K>) -> f64 {
    crate::mesh_dec::faceform::pair_integral(a, &b.apply_j(j))
}
