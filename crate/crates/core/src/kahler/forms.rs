//! Symplectic forms and metrics on configuration space, as per-face kernels.

use super::horizontal::{vertical_face, Family};
use super::local::{jw, sum_faces, wb, FaceState, FaceTangent};
use super::structures::{apply_face, StructureSelector};
use super::KahlerError;
use crate::fields::config::{check_epsilon, Configuration, TangentVector, DOF_PER_FACE};
use crate::mesh_dec::geometry::chart_tangents;
use crate::lie::K;
use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FormSelector {
    OmegaI,
    OmegaJ,
    OmegaK,
    OmegaJComplex,
    Fujiki,
    SigmaJ,
    SigmaI,
    CoupledJ { alpha: f64, eps: f64 },
    CoupledI { alpha: f64, eps: f64 },
    MetricJFamily { alpha: f64, eps: f64 },
    MetricIFamily { alpha: f64, eps: f64 },
    HkMetric,
}

impl FormSelector {
    pub fn is_metric(self) -> bool {
        matches!(self, Self::MetricJFamily { .. } | Self::MetricIFamily { .. } | Self::HkMetric)
    }

    /// The form whose metric this is, with the matching complex structure.
    pub fn metric_pair(self) -> Option<(FormSelector, StructureSelector)> {
        match self {
            Self::MetricJFamily { alpha, eps } => Some((Self::CoupledJ { alpha, eps }, StructureSelector::TotalJ)),
            Self::MetricIFamily { alpha, eps } => Some((Self::CoupledI { alpha, eps }, StructureSelector::TotalI)),
            Self::HkMetric => Some((Self::OmegaI, StructureSelector::FibreI)),
            _ => None,
        }
    }

    fn validate(self) -> Result<(), KahlerError> {
        match self {
            Self::CoupledJ { alpha, eps }
            | Self::CoupledI { alpha, eps }
            | Self::MetricJFamily { alpha, eps }
            | Self::MetricIFamily { alpha, eps } => {
                check_epsilon(eps)?;
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(crate::fields::FieldError::InvalidAlpha(alpha).into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

pub fn omega_i(_: &FaceState, v: &FaceTangent, w: &FaceTangent) -> f64 {
    wb(v.a, w.a) - wb(v.psidot, w.psidot)
}

pub fn omega_j(s: &FaceState, v: &FaceTangent, w: &FaceTangent) -> f64 {
    wb(v.a, jw(w.psidot, &s.j)) - wb(v.psidot, jw(w.a, &s.j))
}

/// Imaginary part of int B(Ddot1 ^ Ddot2).
pub fn omega_k(_: &FaceState, v: &FaceTangent, w: &FaceTangent) -> f64 {
    wb(v.a, w.psidot) + wb(v.psidot, w.a)
}

pub fn hk_metric(s: &FaceState, v: &FaceTangent, w: &FaceTangent) -> f64 {
    wb(v.a, jw(w.a, &s.j)) + wb(v.psidot, jw(w.psidot, &s.j))
}

/// 1/2 int tr(J Jdot1 Jdot2) omega.
pub fn fujiki(s: &FaceState, v: &FaceTangent, w: &FaceTangent) -> f64 {
    0.5 * s.area * (s.j * v.jdot * w.jdot).trace()
}

/// 1/2 int tr(Jdot1 Jdot2) omega.
pub fn fujiki_metric(s: &FaceState, v: &FaceTangent, w: &FaceTangent) -> f64 {
    0.5 * s.area * (v.jdot * w.jdot).trace()
}

/// Coupling form of the J-family, term by term as a sum of four integrals.
pub fn sigma_j(s: &FaceState, v: &FaceTangent, w: &FaceTangent) -> f64 {
    let j = &s.j;
    let (pv, pw) = (s.psi_of(&v.jdot), s.psi_of(&w.jdot));
    let half = |x: [K; 2]| super::local::scale(x, 0.5);
    let sub = super::local::sub;
    wb(v.a, sub(jw(w.psidot, j), pw)) - wb(w.a, sub(jw(v.psidot, j), pv)) - wb(sub(jw(v.psidot, j), half(pv)), pw)
        + wb(sub(jw(w.psidot, j), half(pw)), pv)
}

/// Coupling form of the I-family.
pub fn sigma_i(s: &FaceState, v: &FaceTangent, w: &FaceTangent) -> f64 {
    let (pjv, pjw) = (s.psi_of(&(s.j * v.jdot)), s.psi_of(&(s.j * w.jdot)));
    let (pv, pw) = (s.psi_of(&v.jdot), s.psi_of(&w.jdot));
    wb(v.a, w.a) - wb(v.psidot, w.psidot) - 0.5 * wb(pjv, w.psidot) - 0.5 * wb(v.psidot, pjw) - 0.5 * wb(pv, pw)
}

/// sigma_J(., J .) through the vertical projection.
pub fn sigma_j_metric(s: &FaceState, v: &FaceTangent, w: &FaceTangent) -> f64 {
    let (gv, gw) = (vertical_face(Family::J, s, v), vertical_face(Family::J, s, w));
    let pw = s.psi_of(&w.jdot);
    hk_metric(s, &gv, &gw) - wb(s.psi_of(&v.jdot), jw(pw, &s.j))
}

/// sigma_I(., I .) through the vertical projection.
pub fn sigma_i_metric(s: &FaceState, v: &FaceTangent, w: &FaceTangent) -> f64 {
    let (gv, gw) = (vertical_face(Family::I, s, v), vertical_face(Family::I, s, w));
    let pw = s.psi_of(&w.jdot);
    hk_metric(s, &gv, &gw) - 0.25 * wb(s.psi_of(&v.jdot), jw(pw, &s.j))
}

pub fn form_face(sel: FormSelector, s: &FaceState, v: &FaceTangent, w: &FaceTangent) -> f64 {
    match sel {
        FormSelector::OmegaI | FormSelector::OmegaJComplex => omega_i(s, v, w),
        FormSelector::OmegaJ => omega_j(s, v, w),
        FormSelector::OmegaK => omega_k(s, v, w),
        FormSelector::Fujiki => fujiki(s, v, w),
        FormSelector::SigmaJ => sigma_j(s, v, w),
        FormSelector::SigmaI => sigma_i(s, v, w),
        FormSelector::CoupledJ { alpha, eps } => eps * fujiki(s, v, w) + alpha * sigma_j(s, v, w),
        FormSelector::CoupledI { alpha, eps } => eps * fujiki(s, v, w) + alpha * sigma_i(s, v, w),
        FormSelector::MetricJFamily { alpha, eps } => eps * fujiki_metric(s, v, w) + alpha * sigma_j_metric(s, v, w),
        FormSelector::MetricIFamily { alpha, eps } => eps * fujiki_metric(s, v, w) + alpha * sigma_i_metric(s, v, w),
        FormSelector::HkMetric => hk_metric(s, v, w),
    }
}

/// Real-valued form or metric. The complex form is available through
/// [`eval_form_complex`].
pub fn eval_form(sel: FormSelector, x: &Configuration, v: &TangentVector, w: &TangentVector) -> Result<f64, KahlerError> {
    sel.validate()?;
    if sel == FormSelector::OmegaJComplex {
        return Err(KahlerError::ComplexValued);
    }
    Ok(sum_faces(x, v, w, |s, a, b| form_face(sel, s, a, b)))
}

/// Omega_J = int B(Ddot1 ^ Ddot2) = omega_I + i omega_K.
pub fn eval_form_complex(x: &Configuration, v: &TangentVector, w: &TangentVector) -> Complex64 {
    Complex64::new(sum_faces(x, v, w, omega_i), sum_faces(x, v, w, omega_k))
}

/// Per-face basis of tangent coordinates: chart tangents of J, then the six
/// coordinates of a and of psidot.
pub fn face_basis(j: &Matrix2<f64>) -> [FaceTangent; DOF_PER_FACE] {
    let t = chart_tangents(j);
    let mut out = [FaceTangent::zero(); DOF_PER_FACE];
    out[0].jdot = t[0];
    out[1].jdot = t[1];
    for i in 0..6 {
        out[2 + i].a[i / 3].0[i % 3] = 1.0;
        out[8 + i].psidot[i / 3].0[i % 3] = 1.0;
    }
    out
}

/// Gram matrix of a per-face kernel on one face, in tangent coordinates.
pub fn face_gram(s: &FaceState, k: impl Fn(&FaceState, &FaceTangent, &FaceTangent) -> f64) -> DMatrix<f64> {
    let b = face_basis(&s.j);
    DMatrix::from_fn(DOF_PER_FACE, DOF_PER_FACE, |i, j| k(s, &b[i], &b[j]))
}

/// Gram blocks of a form selector, one per face.
pub fn gram_blocks(sel: FormSelector, x: &Configuration) -> Result<Vec<DMatrix<f64>>, KahlerError> {
    sel.validate()?;
    Ok(crate::par::map_indexed(x.n_faces(), |f| face_gram(&FaceState::of(x, f), |s, a, b| form_face(sel, s, a, b))))
}

/// Matrix of a per-face structure in tangent coordinates, one block per face:
/// column i holds the coordinates of S(e_i).
pub fn structure_blocks(sel: StructureSelector, x: &Configuration) -> Vec<DMatrix<f64>> {
    crate::par::map_indexed(x.n_faces(), |f| {
        let s = FaceState::of(x, f);
        let b = face_basis(&s.j);
        let mut m = DMatrix::zeros(DOF_PER_FACE, DOF_PER_FACE);
        for (i, e) in b.iter().enumerate() {
            let img = apply_face(sel, &s, e);
            m.set_column(i, &nalgebra::DVector::from_vec(face_coords(&s.j, &img)));
        }
        m
    })
}

pub fn face_coords(j: &Matrix2<f64>, t: &FaceTangent) -> Vec<f64> {
    let c = crate::mesh_dec::geometry::tangent_coords(j, &t.jdot);
    let mut out = vec![c[0], c[1]];
    for w in [t.a, t.psidot] {
        for k in w {
            out.extend_from_slice(&k.0);
        }
    }
    out
}
