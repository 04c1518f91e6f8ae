//! Horizontal/vertical splittings of the two Ehresmann connections, their
//! curvatures, and the Nijenhuis tensor of the total structure of the
//! I-family, with finite-difference brackets of vector fields.

use super::local::{map_faces, scale, sub, FaceState, FaceTangent};
use super::structures::{apply_face, StructureSelector};
use super::KahlerError;
use crate::fd;
use crate::fields::config::{Configuration, TangentVector};
use crate::lie::K;
use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    J,
    I,
}

impl Family {
    pub fn structure(self) -> StructureSelector {
        match self {
            Family::J => StructureSelector::TotalJ,
            Family::I => StructureSelector::TotalI,
        }
    }
}

/// Horizontal lift of Jdot at one face.
pub fn lift_face(family: Family, s: &FaceState, jdot: &Matrix2<f64>) -> FaceTangent {
    let pjj = s.psi_of(&(s.j * jdot));
    match family {
        Family::J => FaceTangent { jdot: *jdot, a: s.psi_of(jdot), psidot: scale(pjj, -1.0) },
        Family::I => FaceTangent { jdot: *jdot, a: [K::ZERO; 2], psidot: scale(pjj, -0.5) },
    }
}

/// Vertical part Gamma(v).
pub fn vertical_face(family: Family, s: &FaceState, v: &FaceTangent) -> FaceTangent {
    let h = lift_face(family, s, &v.jdot);
    FaceTangent { jdot: Matrix2::zeros(), a: sub(v.a, h.a), psidot: sub(v.psidot, h.psidot) }
}

pub fn horizontal_lift(family: Family, x: &Configuration, jdot: &[Matrix2<f64>]) -> TangentVector {
    let v = TangentVector { jdot: jdot.to_vec(), ..TangentVector::zeros(x.n_faces()) };
    map_faces(x, &v, |s, t| lift_face(family, s, &t.jdot))
}

/// (horizontal, vertical) with horizontal + vertical = v.
pub fn horizontal_project(family: Family, x: &Configuration, v: &TangentVector) -> (TangentVector, TangentVector) {
    let vert = map_faces(x, v, |s, t| vertical_face(family, s, t));
    (v.sub(&vert), vert)
}

/// Ambient coordinates: the four entries of Jdot, then a and psidot.
pub fn ambient_vec(v: &TangentVector) -> Vec<f64> {
    let mut out = Vec::with_capacity(16 * v.n_faces());
    for f in 0..v.n_faces() {
        out.extend(v.jdot[f].iter());
        for k in v.a.w[f].iter().chain(&v.psidot.w[f]) {
            out.extend_from_slice(&k.0);
        }
    }
    out
}

pub fn from_ambient(c: &[f64]) -> TangentVector {
    let nf = c.len() / 16;
    let mut v = TangentVector::zeros(nf);
    for (f, ch) in c.chunks(16).enumerate() {
        v.jdot[f] = Matrix2::from_column_slice(&ch[0..4]);
        let k = |i: usize| K([ch[i], ch[i + 1], ch[i + 2]]);
        v.a.w[f] = [k(4), k(7)];
        v.psidot.w[f] = [k(10), k(13)];
    }
    v
}

fn probe_step(x: &Configuration) -> f64 {
    fd::default_step(x.to_vec().iter().fold(0.0f64, |m, a| m.max(a.abs())))
}

/// Lie bracket [U, W](x) = DW[U] - DU[W] of vector fields on the ambient
/// configuration space, by Richardson central differences.
pub fn lie_bracket<U, W>(x: &Configuration, u: U, w: W) -> Result<TangentVector, KahlerError>
where
    U: Fn(&Configuration) -> TangentVector,
    W: Fn(&Configuration) -> TangentVector,
{
    let h = probe_step(x);
    let (ux, wx) = (u(x), w(x));
    let dw = fd::derivative_vec(|t| ambient_vec(&w(&x.step_ambient(&ux, t))), h)?;
    let du = fd::derivative_vec(|t| ambient_vec(&u(&x.step_ambient(&wx, t))), h)?;
    Ok(from_ambient(&dw.iter().zip(&du).map(|(a, b)| a - b).collect::<Vec<_>>()))
}

/// Closed-form curvature of the horizontal distribution on (Jdot1, Jdot2).
pub fn curvature_closed_form(family: Family, x: &Configuration, j1: &[Matrix2<f64>], j2: &[Matrix2<f64>]) -> TangentVector {
    let mut out = TangentVector::zeros(x.n_faces());
    for f in 0..x.n_faces() {
        let s = FaceState::of(x, f);
        let c = j1[f] * j2[f] - j2[f] * j1[f];
        match family {
            Family::J => out.a.w[f] = s.psi_of(&(s.j * c)),
            Family::I => out.psidot.w[f] = scale(s.psi_of(&c), 0.25),
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub family: Family,
    pub closed_norm: f64,
    pub discrepancy: f64,
    pub relative_error: f64,
}

/// Closed-form curvature plus -Gamma[v1, v2] for the horizontal lifts of the
/// constant ambient fields Jdot1, Jdot2.
pub fn ehresmann_curvature(
    family: Family,
    x: &Configuration,
    j1: &[Matrix2<f64>],
    j2: &[Matrix2<f64>],
) -> Result<(TangentVector, CurvatureReport), KahlerError> {
    let closed = curvature_closed_form(family, x, j1, j2);
    let br = lie_bracket(x, |y| horizontal_lift(family, y, j1), |y| horizontal_lift(family, y, j2))?;
    let (_, vert) = horizontal_project(family, x, &br);
    let fd_val = vert.scale(-1.0);
    let closed_norm = closed.norm_sq().sqrt();
    let discrepancy = fd_val.sub(&closed).norm_sq().sqrt();
    let relative_error = if closed_norm > 0.0 { discrepancy / closed_norm } else { discrepancy };
    Ok((closed, CurvatureReport { family, closed_norm, discrepancy, relative_error }))
}

/// |N(v1, v2)| for the total structure of the I-family, with v1, v2 extended
/// as constant ambient fields.
pub fn nijenhuis_residual(x: &Configuration, v1: &TangentVector, v2: &TangentVector) -> Result<f64, KahlerError> {
    let st = StructureSelector::TotalI;
    let at = |y: &Configuration, v: &TangentVector| map_faces(y, v, |s, t| apply_face(st, s, t));
    let c1 = |_: &Configuration| v1.clone();
    let c2 = |_: &Configuration| v2.clone();
    let i1 = |y: &Configuration| at(y, v1);
    let i2 = |y: &Configuration| at(y, v2);
    let t1 = lie_bracket(x, i1, i2)?;
    let t2 = at(x, &lie_bracket(x, i1, c2)?);
    let t3 = at(x, &lie_bracket(x, c1, i2)?);
    let t4 = lie_bracket(x, c1, c2)?;
    Ok(t1.sub(&t2).sub(&t3).sub(&t4).norm_sq().sqrt())
}
