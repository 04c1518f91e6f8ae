//! Correspondence between unitary Higgs fields psi and (1,0) Higgs fields phi:
//! psi = -i (phi - tau phi), phi = (i psi - J psi) / 2.

use super::config::FieldError;
use crate::lie::{Coeff, G, K};
use crate::mesh_dec::faceform::FaceForm1;
use nalgebra::Matrix2;
use num_complex::Complex64;

/// sl(2,C)-valued face 1-form of type (1,0): phi o J = i phi.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexHiggs {
    pub phi: FaceForm1<G>,
}

impl ComplexHiggs {
    /// Wraps phi after checking the (1,0) condition to 1e-12 per face.
    pub fn new(j: &[Matrix2<f64>], phi: FaceForm1<G>) -> Result<Self, FieldError> {
        let h = ComplexHiggs { phi };
        let d = h.type_defect(j);
        if d > 1e-12 {
            return Err(FieldError::Document(format!("Higgs field is not of type (1,0): defect {d:.3e}")));
        }
        Ok(h)
    }

    /// Largest per-face norm of phi o J - i phi.
    pub fn type_defect(&self, j: &[Matrix2<f64>]) -> f64 {
        let pj = self.phi.compose(j);
        pj.w.iter()
            .zip(&self.phi.w)
            .map(|(a, b)| ((a[0] - b[0].times_i()).norm_sq() + (a[1] - b[1].times_i()).norm_sq()).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        ComplexHiggs { phi: self.phi.scale(s) }
    }
}

/// (1,0) projection (phi - i phi o J) / 2.
pub fn project_10(j: &[Matrix2<f64>], phi: &FaceForm1<G>) -> FaceForm1<G> {
    let pj = phi.compose(j);
    phi.zip(&pj, |a, b| (a - b.times_i()) * 0.5)
}

pub fn to_complex(j: &[Matrix2<f64>], psi: &FaceForm1<K>) -> ComplexHiggs {
    let jpsi = psi.apply_j(j);
    let w = psi
        .w
        .iter()
        .zip(&jpsi.w)
        .map(|(p, q)| [0, 1].map(|k| G::from_parts(q[k] * -0.5, p[k] * 0.5)))
        .collect();
    ComplexHiggs { phi: FaceForm1 { w } }
}

pub fn to_unitary(h: &ComplexHiggs) -> FaceForm1<K> {
    let i = Complex64::i();
    h.phi.map(|g| (g - g.tau()).scale(-i).re())
}
