//! Metric along the ray (J, A, lambda psi) on horizontal lifts.

use super::forms::{eval_form, FormSelector};
use super::horizontal::{horizontal_lift, Family};
use super::KahlerError;
use crate::fields::config::Configuration;
use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignatureProbe {
    pub family: Family,
    pub alpha: f64,
    pub eps: f64,
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    /// g(lambda) = c0 - alpha c2 lambda^2.
    pub c0: f64,
    pub c2: f64,
    /// Coefficient of the odd term, zero up to rounding.
    pub c1: f64,
    pub fit_residual: f64,
    /// Predicted zero sqrt(c0 / (alpha c2)) when it exists.
    pub lambda0: Option<f64>,
    pub sampled_sign_change: bool,
    pub all_negative: bool,
}

pub fn signature_probe(
    family: Family,
    x: &Configuration,
    jdot: &[Matrix2<f64>],
    alpha: f64,
    eps: f64,
    lambdas: &[f64],
) -> Result<SignatureProbe, KahlerError> {
    let mut distinct = lambdas.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(KahlerError::DegenerateFit("need at least three distinct lambda values".into()));
    }
    if x.psi.norm_sq() == 0.0 || jdot.iter().all(|m| m.norm() == 0.0) {
        return Err(KahlerError::DegenerateFit("psi and Jdot must be nonzero".into()));
    }
    let sel = match family {
        Family::J => FormSelector::MetricJFamily { alpha, eps },
        Family::I => FormSelector::MetricIFamily { alpha, eps },
    };
    let values = lambdas
        .iter()
        .map(|&l| {
            let y = x.with_psi(x.psi.scale(l));
            let v = horizontal_lift(family, &y, jdot);
            eval_form(sel, &y, &v, &v)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let vm = DMatrix::from_fn(lambdas.len(), 3, |i, k| lambdas[i].powi(k as i32));
    let rhs = DVector::from_vec(values.clone());
    let coef = vm
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| KahlerError::DegenerateFit(e.to_string()))?;
    let fit_residual = (&vm * &coef - &rhs).norm() / (lambdas.len() as f64).sqrt();
    let (c0, c1, c2) = (coef[0], coef[1], -coef[2] / alpha);
    let lambda0 = (c0 > 0.0 && c2 > 0.0).then(|| (c0 / (alpha * c2)).sqrt());
    let sampled_sign_change = values.iter().any(|&g| g > 0.0) && values.iter().any(|&g| g < 0.0);
    let all_negative = values.iter().all(|&g| g < 0.0);
    Ok(SignatureProbe { family, alpha, eps, lambdas: lambdas.to_vec(), values, c0, c2, c1, fit_residual, lambda0, sampled_sign_change, all_negative })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::config::TangentVector;
    use crate::mesh_dec::mesh::build_surface;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn setup() -> (Configuration, Vec<Matrix2<f64>>) {
        let mesh = Arc::new(build_surface(2, 0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = Configuration::random(mesh, &mut rng, 0.3, 1.0);
        let v = TangentVector::random(&x, &mut rng, 1.0);
        (x, v.jdot)
    }

    #[test]
    fn zero_lambda_gives_base_metric() {
        let (x, jd) = setup();
        let p = signature_probe(Family::J, &x, &jd, 0.5, 1.0, &[0.0, 1.0, 2.0]).unwrap();
        let expect: f64 = (0..x.n_faces()).map(|f| 0.5 * x.mesh.area(f) * (jd[f] * jd[f]).trace()).sum();
        assert!((p.values[0] - expect).abs() < 1e-12 && expect > 0.0);
    }

    #[test]
    fn positive_eps_changes_sign_negative_eps_does_not() {
        let (x, jd) = setup();
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
        for fam in [Family::J, Family::I] {
            let p = signature_probe(fam, &x, &jd, 0.5, 1.0, &grid).unwrap();
            assert!(p.fit_residual < 1e-10, "{}", p.fit_residual);
            let l0 = p.lambda0.expect("crossing");
            assert!(l0 < 10.0 && p.sampled_sign_change);
            let n = signature_probe(fam, &x, &jd, 0.5, -1.0, &grid).unwrap();
            assert!(n.all_negative && n.fit_residual < 1e-10);
        }
    }

    #[test]
    fn degenerate_grids_are_rejected() {
        let (x, jd) = setup();
        assert!(signature_probe(Family::J, &x, &jd, 0.5, 1.0, &[1.0, 1.0, 2.0]).is_err());
    }
}
