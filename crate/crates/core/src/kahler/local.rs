//! Per-face state and tangent data. Every form, structure and projection on
//! configuration space is a sum or product of per-face terms, so they are all
//! written once here against a single face.

use crate::fields::config::{Configuration, TangentVector};
use crate::lie::{Coeff, K};
use crate::mesh_dec::faceform::wedge_b_face;
use nalgebra::Matrix2;

#[derive(Clone, Copy, Debug)]
pub struct FaceState {
    pub j: Matrix2<f64>,
    pub psi: [K; 2],
    pub area: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceTangent {
    pub jdot: Matrix2<f64>,
    pub a: [K; 2],
    pub psidot: [K; 2],
}

impl FaceState {
    pub fn of(x: &Configuration, f: usize) -> Self {
        FaceState { j: x.j.j[f], psi: x.psi.w[f], area: x.mesh.area(f) }
    }

    /// psi(M) = psi o M.
    pub fn psi_of(&self, m: &Matrix2<f64>) -> [K; 2] {
        compose(self.psi, m)
    }
}

impl FaceTangent {
    pub fn of(v: &TangentVector, f: usize) -> Self {
        FaceTangent { jdot: v.jdot[f], a: v.a.w[f], psidot: v.psidot.w[f] }
    }

    pub fn zero() -> Self {
        FaceTangent { jdot: Matrix2::zeros(), a: [K::ZERO; 2], psidot: [K::ZERO; 2] }
    }

    pub fn add(&self, o: &Self) -> Self {
        FaceTangent { jdot: self.jdot + o.jdot, a: add(self.a, o.a), psidot: add(self.psidot, o.psidot) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        FaceTangent { jdot: self.jdot * s, a: scale(self.a, s), psidot: scale(self.psidot, s) }
    }
}

pub fn compose<C: Coeff>(w: [C; 2], m: &Matrix2<f64>) -> [C; 2] {
    [w[0] * m[(0, 0)] + w[1] * m[(1, 0)], w[0] * m[(0, 1)] + w[1] * m[(1, 1)]]
}

/// Jw = -w o J.
pub fn jw<C: Coeff>(w: [C; 2], j: &Matrix2<f64>) -> [C; 2] {
    scale(compose(w, j), -1.0)
}

pub fn add<C: Coeff>(a: [C; 2], b: [C; 2]) -> [C; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn sub<C: Coeff>(a: [C; 2], b: [C; 2]) -> [C; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn scale<C: Coeff>(a: [C; 2], s: f64) -> [C; 2] {
    [a[0] * s, a[1] * s]
}

/// int_f B(a ^ b).
pub fn wb(a: [K; 2], b: [K; 2]) -> f64 {
    wedge_b_face(a, b)
}

/// Assemble a tangent vector from per-face pieces.
pub fn assemble(parts: Vec<FaceTangent>) -> TangentVector {
    let n = parts.len();
    let mut v = TangentVector::zeros(n);
    for (f, p) in parts.into_iter().enumerate() {
        v.jdot[f] = p.jdot;
        v.a.w[f] = p.a;
        v.psidot.w[f] = p.psidot;
    }
    v
}

/// Apply a per-face map to every face of v.
pub fn map_faces(x: &Configuration, v: &TangentVector, g: impl Fn(&FaceState, &FaceTangent) -> FaceTangent + Sync) -> TangentVector {
    assemble(crate::par::map_indexed(x.n_faces(), |f| g(&FaceState::of(x, f), &FaceTangent::of(v, f))))
}

/// sum_f of a per-face bilinear kernel, summed in face order.
pub fn sum_faces(
    x: &Configuration,
    v: &TangentVector,
    w: &TangentVector,
    k: impl Fn(&FaceState, &FaceTangent, &FaceTangent) -> f64 + Sync,
) -> f64 {
    let parts = crate::par::map_indexed(x.n_faces(), |f| k(&FaceState::of(x, f), &FaceTangent::of(v, f), &FaceTangent::of(w, f)));
    crate::par::sum_f64(&parts)
}
