//! su(2) and its complexification sl(2,C), in the basis e_k = -(i/2) sigma_k.
//!
//! With this basis [e_i, e_j] = e_k cyclically, so the bracket is the cross
//! product of coordinate vectors. The invariant form is normalized to
//! B(e_i, e_j) = delta_ij (a positive multiple of minus the Killing form).

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Coefficient space of a discrete form: real scalars, su(2) or sl(2,C).
///
/// Mixing coefficient tags is a type error, so the runtime tag checks of a
/// dynamically typed design never arise.
pub trait Coeff:
    Copy
    + Debug
    + Default
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
    + SubAssign
{
    type Scalar: Copy
        + Debug
        + Default
        + Send
        + Sync
        + Add<Output = Self::Scalar>
        + Sub<Output = Self::Scalar>
        + Neg<Output = Self::Scalar>
        + Mul<f64, Output = Self::Scalar>
        + AddAssign;

    fn bracket(self, other: Self) -> Self;
    /// Invariant bilinear pairing (complex-bilinear on sl(2,C)).
    fn b(self, other: Self) -> Self::Scalar;
    fn norm_sq(self) -> f64;
}

impl Coeff for f64 {
    type Scalar = f64;
    fn bracket(self, _other: Self) -> Self {
        0.0
    }
    fn b(self, other: Self) -> f64 {
        self * other
    }
    fn norm_sq(self) -> f64 {
        self * self
    }
}

/// Element of su(2) in coordinates (X_1, X_2, X_3).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct K(pub [f64; 3]);

/// Element of sl(2,C) = su(2) + i su(2), complex coordinates in the same basis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct G(pub [Complex64; 3]);

impl K {
    pub const ZERO: K = K([0.0; 3]);

    pub fn basis(i: usize) -> K {
        let mut c = [0.0; 3];
        c[i] = 1.0;
        K(c)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn complexify(self) -> G {
        G(self.0.map(|x| Complex64::new(x, 0.0)))
    }
}

impl Coeff for K {
    type Scalar = f64;
    fn bracket(self, o: K) -> K {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = o.0;
        K([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }
    fn b(self, o: K) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }
    fn norm_sq(self) -> f64 {
        self.b(self)
    }
}

impl G {
    pub const ZERO: G = G([Complex64::new(0.0, 0.0); 3]);

    pub fn from_parts(re: K, im: K) -> G {
        G([0, 1, 2].map(|i| Complex64::new(re.0[i], im.0[i])))
    }

    pub fn re(self) -> K {
        K(self.0.map(|z| z.re))
    }

    pub fn im(self) -> K {
        K(self.0.map(|z| z.im))
    }

    /// Anti-involution fixing su(2): X + iY -> X - iY.
    pub fn tau(self) -> G {
        G(self.0.map(|z| z.conj()))
    }

    pub fn scale(self, s: Complex64) -> G {
        G(self.0.map(|z| z * s))
    }

    pub fn times_i(self) -> G {
        self.scale(Complex64::i())
    }
}

impl Coeff for G {
    type Scalar = Complex64;
    fn bracket(self, o: G) -> G {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = o.0;
        G([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }
    fn b(self, o: G) -> Complex64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }
    fn norm_sq(self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }
}

macro_rules! vec3_ops {
    ($t:ident, $s:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                $t([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                $t([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                $t([-self.0[0], -self.0[1], -self.0[2]])
            }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, s: f64) -> $t {
                $t([self.0[0] * s, self.0[1] * s, self.0[2] * s])
            }
        }
        impl AddAssign for $t {
            fn add_assign(&mut self, o: $t) {
                *self = *self + o;
            }
        }
        impl SubAssign for $t {
            fn sub_assign(&mut self, o: $t) {
                *self = *self - o;
            }
        }
        impl From<[$s; 3]> for $t {
            fn from(c: [$s; 3]) -> $t {
                $t(c)
            }
        }
    };
}
vec3_ops!(K, f64);
vec3_ops!(G, Complex64);

fn pauli() -> [Matrix2<Complex64>; 3] {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    [
        Matrix2::new(z, one, one, z),
        Matrix2::new(z, -i, i, z),
        Matrix2::new(one, z, z, -one),
    ]
}

/// 2x2 matrix realization of an algebra element: sum_k X_k e_k.
pub fn to_matrix(x: K) -> Matrix2<Complex64> {
    let s = pauli();
    let h = Complex64::new(0.0, -0.5);
    (s[0] * Complex64::from(x.0[0]) + s[1] * Complex64::from(x.0[1]) + s[2] * Complex64::from(x.0[2])) * h
}

/// Inverse of [`to_matrix`] on traceless anti-Hermitian matrices: X_k = -2 tr(e_k M).
pub fn from_matrix(m: &Matrix2<Complex64>) -> K {
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let ek = to_matrix(K::basis(k));
        *o = (-(ek * m).trace() * 2.0).re;
    }
    K(out)
}

/// Element of SU(2) as a unitary 2x2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2(pub Matrix2<Complex64>);

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("matrix is not in SU(2): unitarity defect {defect:.3e}")]
pub struct NotUnitary {
    pub defect: f64,
}

impl Su2 {
    pub fn identity() -> Su2 {
        Su2(Matrix2::identity())
    }

    pub fn new(m: Matrix2<Complex64>) -> Result<Su2, NotUnitary> {
        let defect = (m.adjoint() * m - Matrix2::identity()).norm() + (m.determinant() - 1.0).norm();
        if defect > 1e-10 {
            return Err(NotUnitary { defect });
        }
        Ok(Su2(m))
    }

    /// exp(u) = cos(|u|/2) I - i sin(|u|/2) (u/|u|).sigma
    pub fn exp(u: K) -> Su2 {
        let t = u.norm();
        if t < 1e-300 {
            return Su2::identity();
        }
        let s = pauli();
        let c = Complex64::from((0.5 * t).cos());
        let sn = Complex64::new(0.0, -(0.5 * t).sin() / t);
        let mut m = Matrix2::identity() * c;
        for k in 0..3 {
            m += s[k] * (sn * u.0[k]);
        }
        Su2(m)
    }

    /// Principal logarithm, inverse of [`Su2::exp`] for rotation angles below 2 pi.
    pub fn log(self) -> K {
        let s = pauli();
        let a0 = (self.0.trace() * 0.5).re;
        let a: [f64; 3] = [0, 1, 2].map(|k| ((s[k] * self.0).trace() * Complex64::i() * 0.5).re);
        let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        if na < 1e-300 {
            return K::ZERO;
        }
        let theta = 2.0 * na.atan2(a0);
        K(a.map(|x| x * theta / na))
    }

    pub fn inverse(self) -> Su2 {
        Su2(self.0.adjoint())
    }

    pub fn mul(self, o: Su2) -> Su2 {
        Su2(self.0 * o.0)
    }

    /// Adjoint action g X g^{-1}.
    pub fn ad(self, x: K) -> K {
        from_matrix(&(self.0 * to_matrix(x) * self.0.adjoint()))
    }

    pub fn ad_c(self, x: G) -> G {
        G::from_parts(self.ad(x.re()), self.ad(x.im()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k() -> impl Strategy<Value = K> {
        prop::array::uniform3(-2.0..2.0f64).prop_map(K)
    }

    fn g() -> impl Strategy<Value = G> {
        (k(), k()).prop_map(|(a, b)| G::from_parts(a, b))
    }

    #[test]
    fn basis_relations() {
        assert_eq!(K::basis(0).bracket(K::basis(1)), K::basis(2));
        assert_eq!(K::basis(1).bracket(K::basis(2)), K::basis(0));
        assert_eq!(K::basis(0).b(K::basis(0)), 1.0);
        assert_eq!(K::basis(0).b(K::basis(1)), 0.0);
    }

    #[test]
    fn bracket_matches_matrix_commutator() {
        let x = K([0.3, -1.2, 0.7]);
        let y = K([1.1, 0.4, -0.5]);
        let (mx, my) = (to_matrix(x), to_matrix(y));
        let c = from_matrix(&(mx * my - my * mx));
        assert!((c - x.bracket(y)).norm() < 1e-14);
    }

    #[test]
    fn b_is_quarter_negative_trace_form() {
        // B(X,Y) = -2 tr(XY) in the matrix realization
        let x = K([0.3, -1.2, 0.7]);
        let y = K([1.1, 0.4, -0.5]);
        let t = (to_matrix(x) * to_matrix(y)).trace() * -2.0;
        assert!((t.re - x.b(y)).abs() < 1e-14 && t.im.abs() < 1e-14);
    }

    #[test]
    fn tau_fixes_real_and_flips_imaginary() {
        let e = K::basis(0).complexify();
        assert_eq!(e.tau(), e);
        assert_eq!(e.times_i().tau(), -e.times_i());
    }

    #[test]
    fn exp_log_round_trip() {
        let u = K([0.4, -0.9, 1.3]);
        let g = Su2::exp(u);
        assert!(Su2::new(g.0).is_ok());
        assert!((g.log() - u).norm() < 1e-13);
    }

    #[test]
    fn rejects_non_unitary() {
        let m = Matrix2::identity() * Complex64::from(2.0);
        assert!(Su2::new(m).is_err());
    }

    proptest! {
        #[test]
        fn jacobi(x in k(), y in k(), z in k()) {
            let j = x.bracket(y.bracket(z)) + y.bracket(z.bracket(x)) + z.bracket(x.bracket(y));
            prop_assert!(j.norm() < 1e-14);
        }

        #[test]
        fn antisymmetry(x in g(), y in g()) {
            prop_assert!((x.bracket(y) + y.bracket(x)).norm_sq() < 1e-28);
        }

        #[test]
        fn ad_invariance(x in k(), y in k(), z in k()) {
            prop_assert!((z.bracket(x).b(y) + x.b(z.bracket(y))).abs() < 1e-14);
        }

        #[test]
        fn ad_invariance_complex(x in g(), y in g(), z in g()) {
            prop_assert!((z.bracket(x).b(y) + x.b(z.bracket(y))).norm() < 1e-13);
        }

        #[test]
        fn tau_involution(x in g()) {
            prop_assert_eq!(x.tau().tau(), x);
        }

        #[test]
        fn circle_map_lands_in_k(x in g()) {
            // psi = -i(phi - tau phi) has zero imaginary part
            let psi = (x - x.tau()).scale(-Complex64::i());
            prop_assert!(psi.im().norm() < 1e-15);
        }

        #[test]
        fn ad_preserves_b(u in k(), x in k(), y in k()) {
            let g = Su2::exp(u);
            prop_assert!((g.ad(x).b(g.ad(y)) - x.b(y)).abs() < 1e-12);
            prop_assert!((g.ad(x.bracket(y)) - g.ad(x).bracket(g.ad(y))).norm() < 1e-12);
        }
    }
}
