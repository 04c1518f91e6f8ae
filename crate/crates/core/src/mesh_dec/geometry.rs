//! Per-face complex structures and the geometry they induce.
//!
//! On face f, omega(e1, e2) = c_f = 2 area_f, i.e. Omega = c_f [[0,1],[-1,0]],
//! and the metric g = omega(., J.) has Gram matrix Omega J. Every traceless J
//! with J^2 = -1 and positive g is J = [[-r, -q], [p, r]] with p > 0 and
//! q = (1 + r^2)/p; solvers use (log p, r) as unconstrained coordinates.
//!
//! Curvature comes from the conforming piecewise-flat metric whose squared
//! edge lengths average the two adjacent face metrics. Using the face metrics
//! directly would leave edge lengths discontinuous, and the resulting angle
//! defects do not converge to the Gauss curvature once J varies.

use super::faceform::{face_mean, grad, FaceForm1};
use super::mesh::SurfaceMesh;
use crate::par;
use nalgebra::{Matrix2, Matrix2x3, Vector2};
use std::f64::consts::PI;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GeometryError {
    #[error("face {face}: J^2 + 1 has norm {defect:.3e}")]
    NotComplex { face: usize, defect: f64 },
    #[error("face {0}: induced metric is not positive definite")]
    Degenerate(usize),
    #[error("face {0}: neighbour centroids are collinear, gradient reconstruction impossible")]
    Isolated(usize),
    #[error("expected {expected} per-face entries, got {got}")]
    SizeMismatch { expected: usize, got: usize },
}

/// Per-face complex structure in the face frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexStructureField {
    pub j: Vec<Matrix2<f64>>,
}

pub fn omega_matrix(c: f64) -> Matrix2<f64> {
    Matrix2::new(0.0, c, -c, 0.0)
}

/// J from chart coordinates (log p, r).
pub fn j_from_chart(logp: f64, r: f64) -> Matrix2<f64> {
    let p = logp.exp();
    let q = (1.0 + r * r) / p;
    Matrix2::new(-r, -q, p, r)
}

pub fn chart_from_j(j: &Matrix2<f64>) -> (f64, f64) {
    (j[(1, 0)].ln(), j[(1, 1)])
}

/// Tangent basis of the chart at J: (dJ/dlog p, dJ/dr).
pub fn chart_tangents(j: &Matrix2<f64>) -> [Matrix2<f64>; 2] {
    let p = j[(1, 0)];
    let r = j[(1, 1)];
    let q = (1.0 + r * r) / p;
    [Matrix2::new(0.0, q, p, 0.0), Matrix2::new(-1.0, -2.0 * r / p, 0.0, 1.0)]
}

/// Chart coordinates of a tangent vector Jdot (inverse of [`chart_tangents`]).
pub fn tangent_coords(j: &Matrix2<f64>, jdot: &Matrix2<f64>) -> [f64; 2] {
    [jdot[(1, 0)] / j[(1, 0)], jdot[(1, 1)]]
}

/// Equilateral reference structure: all corner angles pi/3.
pub fn reference_j() -> Matrix2<f64> {
    let s = 3f64.sqrt();
    Matrix2::new(-1.0 / s, -2.0 / s, 2.0 / s, 1.0 / s)
}

impl ComplexStructureField {
    pub fn reference(mesh: &SurfaceMesh) -> Self {
        ComplexStructureField { j: vec![reference_j(); mesh.n_faces()] }
    }

    pub fn from_chart(coords: &[(f64, f64)]) -> Self {
        ComplexStructureField { j: coords.iter().map(|&(a, b)| j_from_chart(a, b)).collect() }
    }

    pub fn chart(&self) -> Vec<(f64, f64)> {
        self.j.iter().map(chart_from_j).collect()
    }

    /// Checks J^2 = -1 (1e-12) and positivity of omega(v, Jv) on every face.
    pub fn validate(&self, mesh: &SurfaceMesh) -> Result<(), GeometryError> {
        if self.j.len() != mesh.n_faces() {
            return Err(GeometryError::SizeMismatch { expected: mesh.n_faces(), got: self.j.len() });
        }
        for (f, j) in self.j.iter().enumerate() {
            let defect = (j * j + Matrix2::identity()).norm();
            if defect > 1e-12 {
                return Err(GeometryError::NotComplex { face: f, defect });
            }
            let g = metric(mesh.omega_coeff(f), j);
            if !(g[(0, 0)] > 0.0 && g.determinant() > 0.0) {
                return Err(GeometryError::Degenerate(f));
            }
        }
        Ok(())
    }
}

/// Gram matrix of g = omega(., J.) in the face frame.
pub fn metric(c: f64, j: &Matrix2<f64>) -> Matrix2<f64> {
    omega_matrix(c) * j
}

/// Interior angle between frame vectors p and q (q counter-clockwise from p).
pub fn angle(c: f64, j: &Matrix2<f64>, p: Vector2<f64>, q: Vector2<f64>) -> f64 {
    let g = metric(c, j);
    let det = p[0] * q[1] - p[1] * q[0];
    (c * det).atan2(p.dot(&(g * q)))
}

/// Corner angles at v0, v1, v2 of a face.
pub fn corner_angles(c: f64, j: &Matrix2<f64>) -> [f64; 3] {
    let e1 = Vector2::new(1.0, 0.0);
    let e2 = Vector2::new(0.0, 1.0);
    [angle(c, j, e1, e2), angle(c, j, e2 - e1, -e1), angle(c, j, -e2, e1 - e2)]
}

/// Frame vectors of the local edges (v0 v1), (v1 v2), (v2 v0).
fn local_edges() -> [Vector2<f64>; 3] {
    [Vector2::new(1.0, 0.0), Vector2::new(-1.0, 1.0), Vector2::new(0.0, -1.0)]
}

/// Squared edge lengths of the conforming piecewise-flat metric: each edge
/// gets the mean of its squared lengths under the metrics of its two faces.
pub fn edge_lengths_sq(mesh: &SurfaceMesh, j: &ComplexStructureField) -> Vec<f64> {
    let per_face = par::map_indexed(mesh.n_faces(), |f| {
        let g = metric(mesh.omega_coeff(f), &j.j[f]);
        local_edges().map(|t| t.dot(&(g * t)))
    });
    let mut out = vec![0.0; mesh.n_edges()];
    for (f, l) in per_face.iter().enumerate() {
        for (k, (e, _)) in mesh.face_edges(f).into_iter().enumerate() {
            out[e] += 0.5 * l[k];
        }
    }
    out
}

/// Corner angles at v0, v1, v2 from the squared lengths of the local edges,
/// or None when the triangle inequality fails.
pub fn angles_from_lengths(l2: [f64; 3]) -> Option<[f64; 3]> {
    let l = l2.map(f64::sqrt);
    let corner = |opp: usize, x: usize, y: usize| {
        let c = (l2[x] + l2[y] - l2[opp]) / (2.0 * l[x] * l[y]);
        (c.abs() < 1.0).then(|| c.acos())
    };
    Some([corner(1, 0, 2)?, corner(2, 0, 1)?, corner(0, 1, 2)?])
}

fn face_lengths(mesh: &SurfaceMesh, edges: &[f64], f: usize) -> [f64; 3] {
    mesh.face_edges(f).map(|(e, _)| edges[e])
}

/// Angle defects K_v = 2 pi - sum of incident corner angles of the
/// conforming metric. Degenerate triangles contribute clamped angles.
pub fn angle_defects(mesh: &SurfaceMesh, j: &ComplexStructureField) -> Vec<f64> {
    let edges = edge_lengths_sq(mesh, j);
    let ang = par::map_indexed(mesh.n_faces(), |f| {
        let l2 = face_lengths(mesh, &edges, f);
        angles_from_lengths(l2).unwrap_or_else(|| {
            let l = l2.map(f64::sqrt);
            let corner = |o: usize, x: usize, y: usize| ((l2[x] + l2[y] - l2[o]) / (2.0 * l[x] * l[y])).clamp(-1.0, 1.0).acos();
            [corner(1, 0, 2), corner(2, 0, 1), corner(0, 1, 2)]
        })
    });
    let mut k = vec![2.0 * PI; mesh.n_vertices()];
    for (f, a) in ang.iter().enumerate() {
        for (i, &v) in mesh.face(f).iter().enumerate() {
            k[v] -= a[i];
        }
    }
    k
}

/// Riemannian scalar curvature per unit Gauss curvature on a surface.
pub const SCALAR_PER_GAUSS: f64 = 2.0;

/// Vertex curvature S_v = K_v / m_v, normalized so that sum_v S_v m_v = 2 pi chi
/// (Gauss curvature; the constant-curvature target is 2 pi chi / V).
pub fn scalar_curvature(mesh: &SurfaceMesh, j: &ComplexStructureField) -> Result<Vec<f64>, GeometryError> {
    for (f, jf) in j.j.iter().enumerate() {
        let g = metric(mesh.omega_coeff(f), jf);
        if !(g[(0, 0)] > 0.0 && g.determinant() > 0.0) {
            return Err(GeometryError::Degenerate(f));
        }
    }
    let edges = edge_lengths_sq(mesh, j);
    if let Some(f) = (0..mesh.n_faces()).find(|&f| angles_from_lengths(face_lengths(mesh, &edges, f)).is_none()) {
        return Err(GeometryError::Degenerate(f));
    }
    Ok(scalar_curvature_unchecked(mesh, j))
}

/// [`scalar_curvature`] without the positivity check; used on ambient
/// finite-difference probes where J is only approximately complex.
pub fn scalar_curvature_unchecked(mesh: &SurfaceMesh, j: &ComplexStructureField) -> Vec<f64> {
    angle_defects(mesh, j).iter().zip(mesh.vertex_masses()).map(|(k, m)| k / m).collect()
}

/// Hamiltonian vector field of f: i_eta omega = df on every face.
pub fn hamiltonian_field(mesh: &SurfaceMesh, f: &[f64]) -> Vec<Vector2<f64>> {
    let g = grad(mesh, f);
    (0..mesh.n_faces())
        .map(|k| {
            let c = mesh.omega_coeff(k);
            let [g1, g2] = g.w[k];
            Vector2::new(g2 / c, -g1 / c)
        })
        .collect()
}

/// Contraction i_y omega as a face 1-form: (-c y^2, c y^1).
pub fn contract_omega(mesh: &SurfaceMesh, y: &[Vector2<f64>]) -> FaceForm1<f64> {
    FaceForm1 {
        w: y.iter().enumerate().map(|(f, y)| {
            let c = mesh.omega_coeff(f);
            [-c * y[1], c * y[0]]
        })
        .collect(),
    }
}

/// Remove the omega-weighted mean of a vertex function.
pub fn mean_zero(mesh: &SurfaceMesh, f: &[f64]) -> Vec<f64> {
    let m = mesh.vertex_masses();
    let s: f64 = f.iter().zip(m).map(|(a, b)| a * b).sum::<f64>() / mesh.total_volume();
    f.iter().map(|a| a - s).collect()
}

/// Map from the frame of neighbour n to the frame of face f across their
/// shared edge: fixes the edge and intertwines J_n with J_f, so it is the
/// conformal unfolding of n onto the plane of f.
fn unfolding(
    mesh: &SurfaceMesh,
    j: &ComplexStructureField,
    f: usize,
    k: usize,
    n: usize,
) -> (Matrix2<f64>, Vector2<f64>) {
    let t = mesh.face(f);
    let (a, b) = (t[k], t[(k + 1) % 3]);
    let (fa, fb) = (k, (k + 1) % 3);
    let na = mesh.local_index(n, a).expect("shared vertex");
    let nb = mesh.local_index(n, b).expect("shared vertex");
    let pf = |i| SurfaceMesh::corner(i);
    let tf = pf(fb) - pf(fa);
    let tn = pf(nb) - pf(na);
    let mf = Matrix2::from_columns(&[tf, j.j[f] * tf]);
    let mn = Matrix2::from_columns(&[tn, j.j[n] * tn]);
    let tmat = mf * mn.try_inverse().expect("edge vectors are independent of their rotation");
    let centroid = Vector2::new(1.0 / 3.0, 1.0 / 3.0);
    let d = pf(fa) + tmat * (centroid - pf(na)) - centroid;
    (tmat, d)
}

/// Least-squares gradient M = dy of a per-face vector field, from the three
/// edge neighbours unfolded into the face frame.
pub fn vector_gradient(
    mesh: &SurfaceMesh,
    j: &ComplexStructureField,
    y: &[Vector2<f64>],
) -> Result<Vec<Matrix2<f64>>, GeometryError> {
    let out = par::map_indexed(mesh.n_faces(), |f| {
        let nb = mesh.face_neighbors(f);
        let mut dm = Matrix2x3::zeros();
        let mut ym = Matrix2x3::zeros();
        for (k, &n) in nb.iter().enumerate() {
            let (t, d) = unfolding(mesh, j, f, k, n);
            dm.set_column(k, &d);
            ym.set_column(k, &(t * y[n] - y[f]));
        }
        let ddt = dm * dm.transpose();
        let inv = ddt.try_inverse().filter(|_| ddt.determinant().abs() > 1e-14 * ddt.norm_squared());
        inv.map(|inv| ym * dm.transpose() * inv).ok_or(GeometryError::Isolated(f))
    });
    out.into_iter().collect()
}

/// L_y J = J M - M J with M the reconstructed gradient of y.
pub fn lie_derivative_j(
    mesh: &SurfaceMesh,
    y: &[Vector2<f64>],
    j: &ComplexStructureField,
) -> Result<Vec<Matrix2<f64>>, GeometryError> {
    if y.len() != mesh.n_faces() {
        return Err(GeometryError::SizeMismatch { expected: mesh.n_faces(), got: y.len() });
    }
    let m = vector_gradient(mesh, j, y)?;
    Ok(m.iter().zip(&j.j).map(|(m, j)| j * m - m * j).collect())
}

/// Face means of a vertex function, re-exported for callers that only need geometry.
pub fn vertex_to_face(mesh: &SurfaceMesh, u: &[f64]) -> Vec<f64> {
    face_mean(mesh, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_dec::mesh::build_surface;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_j(mesh: &SurfaceMesh, rng: &mut ChaCha8Rng, amp: f64) -> ComplexStructureField {
        let (lp, r) = chart_from_j(&reference_j());
        ComplexStructureField::from_chart(
            &(0..mesh.n_faces())
                .map(|_| (lp + amp * rng.gen_range(-1.0..1.0), r + amp * rng.gen_range(-1.0..1.0)))
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn chart_is_exactly_complex() {
        let j = j_from_chart(0.3, -0.7);
        assert!((j * j + Matrix2::identity()).norm() < 1e-15);
        let (a, b) = chart_from_j(&j);
        assert!((a - 0.3).abs() < 1e-15 && (b + 0.7).abs() < 1e-15);
    }

    #[test]
    fn chart_tangents_anticommute() {
        let j = j_from_chart(-0.2, 0.4);
        for t in chart_tangents(&j) {
            assert!((t * j + j * t).norm() < 1e-14);
        }
        let h = 1e-6;
        let fd = (j_from_chart(-0.2 + h, 0.4) - j_from_chart(-0.2 - h, 0.4)) / (2.0 * h);
        assert!((fd - chart_tangents(&j)[0]).norm() < 1e-8);
    }

    #[test]
    fn reference_structure_is_equilateral() {
        for a in corner_angles(0.1, &reference_j()) {
            assert!((a - PI / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn reference_j_rotates_dx_into_dy_type_covector() {
        // in an orthonormal frame J is the rotation by 90 degrees and -dx o J = dy
        let rot = Matrix2::new(0.0, -1.0, 1.0, 0.0);
        let dx = FaceForm1::<f64> { w: vec![[1.0, 0.0]] };
        let jdx = dx.apply_j(&[rot]);
        assert_eq!(jdx.w[0], [0.0, 1.0]);
        assert_eq!(jdx.apply_j(&[rot]).w[0], [-1.0, 0.0]);
    }

    #[test]
    fn flat_torus_has_zero_curvature() {
        let m = build_surface(1, 1).unwrap();
        let s = scalar_curvature(&m, &ComplexStructureField::reference(&m)).unwrap();
        assert!(s.iter().all(|x| x.abs() < 1e-12));
        assert_eq!(m.curvature_target(), 0.0);
    }

    #[test]
    fn gauss_bonnet_for_random_structures() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for genus in 1..=2 {
            let m = build_surface(genus, 1).unwrap();
            let j = random_j(&m, &mut rng, 0.5);
            j.validate(&m).unwrap();
            let s = scalar_curvature(&m, &j).unwrap();
            let total: f64 = s.iter().zip(m.vertex_masses()).map(|(a, b)| a * b).sum();
            assert!((total / (2.0 * PI) - m.euler_characteristic() as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn angles_match_law_of_cosines() {
        let m = build_surface(2, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let j = random_j(&m, &mut rng, 0.6);
        let s = scalar_curvature(&m, &j).unwrap();
        // oracle: edge lengths looked up by endpoints, averaged over the faces
        let len2 = |f: usize, a: usize, b: usize| {
            let t = m.face(f);
            let pos = |v| SurfaceMesh::corner(t.iter().position(|&w| w == v).unwrap());
            let d = pos(b) - pos(a);
            d.dot(&(metric(m.omega_coeff(f), &j.j[f]) * d))
        };
        let edge = |a: usize, b: usize| {
            let fs: Vec<usize> = (0..m.n_faces()).filter(|&f| m.face(f).contains(&a) && m.face(f).contains(&b)).collect();
            assert_eq!(fs.len(), 2);
            fs.iter().map(|&f| len2(f, a, b)).sum::<f64>() / 2.0
        };
        let mut k = vec![2.0 * PI; m.n_vertices()];
        for t in m.faces() {
            let (a2, b2, c2) = (edge(t[1], t[2]), edge(t[2], t[0]), edge(t[0], t[1])); // opposite v0, v1, v2
            let cos = |opp: f64, x: f64, y: f64| ((x + y - opp) / (2.0 * (x * y).sqrt())).acos();
            k[t[0]] -= cos(a2, b2, c2);
            k[t[1]] -= cos(b2, a2, c2);
            k[t[2]] -= cos(c2, a2, b2);
        }
        for v in 0..m.n_vertices() {
            assert!((k[v] / m.mass(v) - s[v]).abs() < 1e-9 * (1.0 + s[v].abs()));
        }
    }

    #[test]
    fn degenerate_metric_is_reported() {
        let m = build_surface(1, 0).unwrap();
        let mut j = ComplexStructureField::reference(&m);
        j.j[4] = -j.j[4];
        assert_eq!(j.validate(&m).unwrap_err(), GeometryError::Degenerate(4));
        assert!(scalar_curvature(&m, &j).is_err());
    }

    #[test]
    fn hamiltonian_field_recontracts_to_df() {
        let m = build_surface(2, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let f = mean_zero(&m, &(0..m.n_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
        let eta = hamiltonian_field(&m, &f);
        let back = contract_omega(&m, &eta);
        let df = grad(&m, &f);
        for k in 0..m.n_faces() {
            assert!((back.w[k][0] - df.w[k][0]).abs() < 1e-12 && (back.w[k][1] - df.w[k][1]).abs() < 1e-12);
        }
        let eta2 = hamiltonian_field(&m, &f.iter().map(|x| 2.5 * x).collect::<Vec<_>>());
        assert!(eta.iter().zip(&eta2).all(|(a, b)| (a * 2.5 - b).norm() < 1e-12));
    }

    #[test]
    fn lie_derivative_of_constant_chart_field_vanishes() {
        let m = build_surface(1, 1).unwrap();
        let j = ComplexStructureField::reference(&m);
        let yc = Vector2::new(0.3, -0.8);
        let y: Vec<_> = (0..m.n_faces()).map(|f| m.face_chart_frame(f).unwrap().try_inverse().unwrap() * yc).collect();
        let l = lie_derivative_j(&m, &y, &j).unwrap();
        assert!(l.iter().all(|x| x.norm() < 1e-10));
        let zero = lie_derivative_j(&m, &vec![Vector2::zeros(); m.n_faces()], &j).unwrap();
        assert!(zero.iter().all(|x| x.norm() == 0.0));
    }
}
