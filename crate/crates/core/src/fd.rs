//! Central differences with one Richardson halving.

/// Step used for a probe at a point of size `scale`: 1e-4 (1 + scale).
pub fn default_step(scale: f64) -> f64 {
    1e-4 * (1.0 + scale)
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("finite-difference step {0:e} underflows")]
pub struct StepUnderflow(pub f64);

fn check(h: f64) -> Result<(), StepUnderflow> {
    if !(h.is_finite() && h > 1e-12) {
        return Err(StepUnderflow(h));
    }
    Ok(())
}

/// d/dt g(t) at 0. Exact up to rounding for polynomials of degree <= 4.
pub fn derivative<F: Fn(f64) -> f64>(g: F, h: f64) -> Result<f64, StepUnderflow> {
    check(h)?;
    let d1 = (g(h) - g(-h)) / (2.0 * h);
    let d2 = (g(0.5 * h) - g(-0.5 * h)) / h;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Vector-valued version of [`derivative`].
pub fn derivative_vec<F: Fn(f64) -> Vec<f64>>(g: F, h: f64) -> Result<Vec<f64>, StepUnderflow> {
    check(h)?;
    let (p, m) = (g(h), g(-h));
    let (ph, mh) = (g(0.5 * h), g(-0.5 * h));
    Ok((0..p.len())
        .map(|i| {
            let d1 = (p[i] - m[i]) / (2.0 * h);
            let d2 = (ph[i] - mh[i]) / h;
            (4.0 * d2 - d1) / 3.0
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_is_exact() {
        let d = derivative(|t| 1.0 + 2.0 * t + 3.0 * t * t - t.powi(3) + 5.0 * t.powi(4), 0.1).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_function_is_fourth_order() {
        let e1 = (derivative(|t| (1.0 + t).exp(), 1e-2).unwrap() - 1f64.exp()).abs();
        let e2 = (derivative(|t| (1.0 + t).exp(), 5e-3).unwrap() - 1f64.exp()).abs();
        assert!(e1 < 1e-9 && e2 < e1 / 8.0);
    }

    #[test]
    fn underflow_is_reported() {
        assert!(derivative(|t| t, 0.0).is_err());
    }
}
