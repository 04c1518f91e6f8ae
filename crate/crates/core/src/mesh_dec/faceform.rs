//! Per-face constant 1-forms, vertex 0-forms and weak (vertex-functional) 2-forms.
//!
//! A 2-form F is stored through its integrals against the hat functions,
//! F_v = int F lambda_v, so that d of a face 1-form is defined weakly by
//! <d w, zeta> = -sum_f int_f d zeta ^ w. This makes d(grad u) = 0 exactly and
//! turns every integration by parts between degrees 0, 1 and 2 into an exact
//! matrix transpose.

use super::mesh::SurfaceMesh;
use crate::lie::Coeff;
use crate::par;
use nalgebra::{Matrix2, Vector2};

/// Covector pair (w(e1), w(e2)) per face.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceForm1<C: Coeff> {
    pub w: Vec<[C; 2]>,
}

/// Weak 2-form: integrals against vertex hat functions.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm<C: Coeff> {
    pub v: Vec<C>,
}

impl<C: Coeff> FaceForm1<C> {
    pub fn zeros(n_faces: usize) -> Self {
        FaceForm1 { w: vec![[C::default(); 2]; n_faces] }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn map<D: Coeff>(&self, g: impl Fn(C) -> D + Sync + Send) -> FaceForm1<D> {
        FaceForm1 { w: self.w.iter().map(|&[a, b]| [g(a), g(b)]).collect() }
    }

    pub fn zip(&self, o: &Self, g: impl Fn(C, C) -> C) -> Self {
        FaceForm1 { w: self.w.iter().zip(&o.w).map(|(a, b)| [g(a[0], b[0]), g(a[1], b[1])]).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|a| a * s)
    }

    /// Precomposition with a per-face endomorphism: w(C)_j = sum_k w_k C_kj.
    pub fn compose(&self, c: &[Matrix2<f64>]) -> Self {
        FaceForm1 {
            w: par::map_indexed(self.w.len(), |f| {
                let [a, b] = self.w[f];
                let m = &c[f];
                [a * m[(0, 0)] + b * m[(1, 0)], a * m[(0, 1)] + b * m[(1, 1)]]
            }),
        }
    }

    /// Jw = -w o J.
    pub fn apply_j(&self, j: &[Matrix2<f64>]) -> Self {
        self.compose(j).scale(-1.0)
    }

    /// Contraction w(y) per face.
    pub fn contract(&self, y: &[Vector2<f64>]) -> Vec<C> {
        self.w.iter().zip(y).map(|(&[a, b], y)| a * y[0] + b * y[1]).collect()
    }

    pub fn norm_sq(&self) -> f64 {
        self.w.iter().map(|[a, b]| a.norm_sq() + b.norm_sq()).sum()
    }
}

impl<C: Coeff> TwoForm<C> {
    pub fn zeros(n_vertices: usize) -> Self {
        TwoForm { v: vec![C::default(); n_vertices] }
    }

    pub fn add(&self, o: &Self) -> Self {
        TwoForm { v: self.v.iter().zip(&o.v).map(|(&a, &b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        TwoForm { v: self.v.iter().zip(&o.v).map(|(&a, &b)| a - b).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        TwoForm { v: self.v.iter().map(|&a| a * s).collect() }
    }

    /// Lambda_omega: pointwise density F_v / m_v.
    pub fn lambda(&self, mesh: &SurfaceMesh) -> Vec<C> {
        self.v.iter().zip(mesh.vertex_masses()).map(|(&a, &m)| a * (1.0 / m)).collect()
    }

    pub fn norm_sq(&self) -> f64 {
        self.v.iter().map(|a| a.norm_sq()).sum()
    }
}

/// int_f a ^ b over one face, with the bracket as product.
pub fn wedge_bracket_face<C: Coeff>(a: [C; 2], b: [C; 2]) -> C {
    (a[0].bracket(b[1]) - a[1].bracket(b[0])) * 0.5
}

/// int_f B(a ^ b) over one face.
pub fn wedge_b_face<C: Coeff>(a: [C; 2], b: [C; 2]) -> C::Scalar {
    (a[0].b(b[1]) - a[1].b(b[0])) * 0.5
}

/// int_Sigma B(a ^ b). Independent of the face areas: the frame triangle has
/// coordinate area 1/2.
pub fn pair_integral<C: Coeff>(a: &FaceForm1<C>, b: &FaceForm1<C>) -> C::Scalar {
    let parts = par::map_indexed(a.w.len(), |f| wedge_b_face(a.w[f], b.w[f]));
    let mut s = C::Scalar::default();
    for p in parts {
        s += p;
    }
    s
}

/// Face means of a vertex field.
pub fn face_mean<C: Coeff>(mesh: &SurfaceMesh, u: &[C]) -> Vec<C> {
    par::map_indexed(mesh.n_faces(), |f| {
        let [a, b, c] = mesh.face(f);
        (u[a] + u[b] + u[c]) * (1.0 / 3.0)
    })
}

/// Gradient of the piecewise-linear interpolant.
pub fn grad<C: Coeff>(mesh: &SurfaceMesh, u: &[C]) -> FaceForm1<C> {
    FaceForm1 {
        w: par::map_indexed(mesh.n_faces(), |f| {
            let [a, b, c] = mesh.face(f);
            [u[b] - u[a], u[c] - u[a]]
        }),
    }
}

fn scatter<C: Coeff>(mesh: &SurfaceMesh, per_face: Vec<[C; 3]>) -> TwoForm<C> {
    let mut out = TwoForm::zeros(mesh.n_vertices());
    for (f, vals) in per_face.into_iter().enumerate() {
        for (k, &v) in mesh.face(f).iter().enumerate() {
            out.v[v] += vals[k];
        }
    }
    out
}

/// Weak exterior derivative of a face 1-form.
pub fn d1<C: Coeff>(mesh: &SurfaceMesh, w: &FaceForm1<C>) -> TwoForm<C> {
    let parts = par::map_indexed(mesh.n_faces(), |f| {
        let [w1, w2] = w.w[f];
        [(w2 - w1) * 0.5, w2 * -0.5, w1 * 0.5]
    });
    scatter(mesh, parts)
}

/// Weak 2-form of a per-face integral distributed as a constant density.
pub fn spread<C: Coeff>(mesh: &SurfaceMesh, face_integrals: &[C]) -> TwoForm<C> {
    scatter(mesh, face_integrals.iter().map(|&x| [x * (1.0 / 3.0); 3]).collect())
}

/// Mass-weighted average of per-face values at each vertex; the transpose of
/// [`face_mean`] under the lumped and per-face L2 products.
pub fn avg_to_vertices<C: Coeff>(mesh: &SurfaceMesh, g: &[C]) -> Vec<C> {
    let mut out = vec![C::default(); mesh.n_vertices()];
    for (f, &x) in g.iter().enumerate() {
        let w = mesh.area(f) / 3.0;
        for &v in &mesh.face(f) {
            out[v] += x * w;
        }
    }
    out.iter().zip(mesh.vertex_masses()).map(|(&a, &m)| a * (1.0 / m)).collect()
}

/// Face average of vertex densities (used for Lambda F on a face).
pub fn density_on_faces<C: Coeff>(mesh: &SurfaceMesh, two: &TwoForm<C>) -> Vec<C> {
    face_mean(mesh, &two.lambda(mesh))
}

/// sum_v B(F_v, u_v): the pairing of a weak 2-form with a 0-form.
pub fn pair_two_zero<C: Coeff>(f: &TwoForm<C>, u: &[C]) -> C::Scalar {
    let mut s = C::Scalar::default();
    for (a, &b) in f.v.iter().zip(u) {
        s += a.b(b);
    }
    s
}

/// Lumped L2 product sum_v m_v B(u_v, w_v).
pub fn pair_zero<C: Coeff>(mesh: &SurfaceMesh, u: &[C], w: &[C]) -> C::Scalar {
    let mut s = C::Scalar::default();
    for ((a, &b), &m) in u.iter().zip(w).zip(mesh.vertex_masses()) {
        s += a.b(b) * m;
    }
    s
}
