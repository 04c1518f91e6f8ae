//! Finite-difference dd^c of the Higgs-field potential nu = int B(psi ^ J psi),
//! compared with the explicit coupling forms.

use super::forms::{eval_form, FormSelector};
use super::local::map_faces;
use super::structures::{apply_face, StructureSelector};
use super::KahlerError;
use crate::fd;
use crate::fields::config::{Configuration, TangentVector};
use crate::mesh_dec::faceform::pair_integral;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PotentialCheck {
    /// sigma_J = 1/2 dd^c nu.
    SigmaJ,
    /// sigma_I = omega_A + 1/4 dd^c nu, with omega_A = int B(a1 ^ a2).
    SigmaIDecomposition,
    /// coupled_J = eps fujiki + dd^c(alpha nu / 2); only the alpha part is
    /// differentiated.
    Phi { alpha: f64, eps: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub selector: String,
    pub inputs_hash: String,
    pub value: f64,
    pub oracle: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub tier: String,
}

impl DiagnosticReport {
    pub fn new(selector: impl Into<String>, inputs_hash: String, value: f64, oracle: f64, tier: &str) -> Self {
        let abs_error = (value - oracle).abs();
        let rel_error = abs_error / oracle.abs().max(1e-300);
        DiagnosticReport { selector: selector.into(), inputs_hash, value, oracle, abs_error, rel_error, tier: tier.to_string() }
    }
}

pub fn nu(x: &Configuration) -> f64 {
    pair_integral(&x.psi, &x.psi.apply_j(&x.j.j))
}

fn step(x: &Configuration) -> f64 {
    fd::default_step(x.to_vec().iter().fold(0.0f64, |m, a| m.max(a.abs())))
}

/// d^c nu at y applied to v: -d nu(S_y v).
pub fn dc_nu(st: StructureSelector, y: &Configuration, v: &TangentVector, h: f64) -> Result<f64, KahlerError> {
    let sv = map_faces(y, v, |s, t| apply_face(st, s, t));
    Ok(-fd::derivative(|t| nu(&y.step_ambient(&sv, t)), h)?)
}

/// dd^c nu (v1, v2) with v1, v2 extended as constant ambient fields.
pub fn ddc_nu(st: StructureSelector, x: &Configuration, v1: &TangentVector, v2: &TangentVector) -> Result<f64, KahlerError> {
    let h = step(x);
    // the inner step equals the outer one, so it is validated by the outer call
    let outer = |a: &TangentVector, b: &TangentVector| {
        fd::derivative(|t| dc_nu(st, &x.step_ambient(a, t), b, h).unwrap_or(f64::NAN), h)
    };
    Ok(outer(v1, v2)? - outer(v2, v1)?)
}

pub fn potential_and_ddc(
    x: &Configuration,
    which: PotentialCheck,
    v1: &TangentVector,
    v2: &TangentVector,
) -> Result<DiagnosticReport, KahlerError> {
    let hash = x.hash();
    let (name, value, oracle) = match which {
        PotentialCheck::SigmaJ => (
            "sigma_J potential".to_string(),
            0.5 * ddc_nu(StructureSelector::TotalJ, x, v1, v2)?,
            eval_form(FormSelector::SigmaJ, x, v1, v2)?,
        ),
        PotentialCheck::SigmaIDecomposition => {
            let omega_a = pair_integral(&v1.a, &v2.a);
            (
                "sigma_I decomposition".to_string(),
                omega_a + 0.25 * ddc_nu(StructureSelector::TotalI, x, v1, v2)?,
                eval_form(FormSelector::SigmaI, x, v1, v2)?,
            )
        }
        PotentialCheck::Phi { alpha, eps } => {
            let sel = FormSelector::CoupledJ { alpha, eps };
            let fuj = eval_form(FormSelector::Fujiki, x, v1, v2)?;
            (
                format!("Phi(alpha={alpha}, eps={eps})"),
                eps * fuj + 0.5 * alpha * ddc_nu(StructureSelector::TotalJ, x, v1, v2)?,
                eval_form(sel, x, v1, v2)?,
            )
        }
    };
    Ok(DiagnosticReport::new(name, hash, value, oracle, "finite-difference"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_dec::faceform::FaceForm1;
    use crate::mesh_dec::mesh::build_surface;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn setup(seed: u64) -> (Configuration, TangentVector, TangentVector) {
        let mesh = Arc::new(build_surface(1 + seed as usize % 2, 0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Configuration::random(mesh, &mut rng, 0.4, 1.0);
        let v = TangentVector::random(&x, &mut rng, 1.0);
        let w = TangentVector::random(&x, &mut rng, 1.0);
        (x, v, w)
    }

    #[test]
    fn potential_vanishes_to_second_order_at_zero_psi() {
        let (x, v, w) = setup(1);
        let x0 = x.with_psi(FaceForm1::zeros(x.n_faces()));
        let base = |t: &TangentVector| TangentVector { jdot: t.jdot.clone(), ..TangentVector::zeros(x.n_faces()) };
        let d = ddc_nu(StructureSelector::TotalJ, &x0, &base(&v), &base(&w)).unwrap();
        assert!(d.abs() < 1e-10);
    }

    #[test]
    fn all_potential_checks_pass() {
        for seed in 0..4 {
            let (x, v, w) = setup(seed);
            for which in [PotentialCheck::SigmaJ, PotentialCheck::SigmaIDecomposition, PotentialCheck::Phi { alpha: 0.3, eps: -1.0 }] {
                let r = potential_and_ddc(&x, which, &v, &w).unwrap();
                assert!(r.rel_error < 1e-6, "{r:?}");
            }
        }
    }
}
