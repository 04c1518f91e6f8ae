use super::faceform::FaceForm1;
use super::mesh::SurfaceMesh;
use crate::lie::Coeff;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CochainError {
    #[error("coboundary of a degree-{0} cochain is not defined on a surface")]
    DegreeTooHigh(u8),
    #[error("expected {expected} values for a degree-{degree} cochain, got {got}")]
    SizeMismatch { degree: u8, expected: usize, got: usize },
}

/// Simplicial k-cochain: one coefficient per vertex, edge or face.
///
/// Edge values are oriented from the lower to the higher vertex index.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain<C: Coeff> {
    pub degree: u8,
    pub values: Vec<C>,
}

fn cell_count(mesh: &SurfaceMesh, degree: u8) -> usize {
    match degree {
        0 => mesh.n_vertices(),
        1 => mesh.n_edges(),
        _ => mesh.n_faces(),
    }
}

impl<C: Coeff> Cochain<C> {
    pub fn new(mesh: &SurfaceMesh, degree: u8, values: Vec<C>) -> Result<Self, CochainError> {
        let expected = cell_count(mesh, degree);
        if values.len() != expected || degree > 2 {
            return Err(CochainError::SizeMismatch { degree, expected, got: values.len() });
        }
        Ok(Cochain { degree, values })
    }

    pub fn zeros(mesh: &SurfaceMesh, degree: u8) -> Self {
        Cochain { degree, values: vec![C::default(); cell_count(mesh, degree)] }
    }
}

/// Simplicial coboundary d: C^k -> C^{k+1}.
pub fn coboundary<C: Coeff>(mesh: &SurfaceMesh, c: &Cochain<C>) -> Result<Cochain<C>, CochainError> {
    let expected = cell_count(mesh, c.degree);
    if c.degree < 2 && c.values.len() != expected {
        return Err(CochainError::SizeMismatch { degree: c.degree, expected, got: c.values.len() });
    }
    match c.degree {
        0 => Ok(Cochain {
            degree: 1,
            values: mesh.edges().iter().map(|&[a, b]| c.values[b] - c.values[a]).collect(),
        }),
        1 => Ok(Cochain {
            degree: 2,
            values: (0..mesh.n_faces())
                .map(|f| {
                    let mut s = C::default();
                    for (e, sign) in mesh.face_edges(f) {
                        s += c.values[e] * sign;
                    }
                    s
                })
                .collect(),
        }),
        d => Err(CochainError::DegreeTooHigh(d)),
    }
}

/// Face average of the Whitney interpolant of a 1-cochain.
///
/// With c_k the value on local edge k seen from the face and kappa their sum,
/// the average is w(e1) = c_0 - kappa/3, w(e2) = kappa/3 - c_2.
pub fn whitney<C: Coeff>(mesh: &SurfaceMesh, c: &Cochain<C>) -> Result<FaceForm1<C>, CochainError> {
    if c.degree != 1 || c.values.len() != mesh.n_edges() {
        return Err(CochainError::SizeMismatch { degree: 1, expected: mesh.n_edges(), got: c.values.len() });
    }
    let w = (0..mesh.n_faces())
        .map(|f| {
            let fe = mesh.face_edges(f);
            let l = fe.map(|(e, s)| c.values[e] * s);
            let kappa = (l[0] + l[1] + l[2]) * (1.0 / 3.0);
            [l[0] - kappa, kappa - l[2]]
        })
        .collect();
    Ok(FaceForm1 { w })
}

/// Edge integrals of a per-face constant form, averaged over the two faces
/// sharing each edge.
pub fn unwhitney<C: Coeff>(mesh: &SurfaceMesh, w: &FaceForm1<C>) -> Result<Cochain<C>, CochainError> {
    if w.w.len() != mesh.n_faces() {
        return Err(CochainError::SizeMismatch { degree: 1, expected: mesh.n_faces(), got: w.w.len() });
    }
    let mut values = vec![C::default(); mesh.n_edges()];
    for f in 0..mesh.n_faces() {
        let [w1, w2] = w.w[f];
        let along = [w1, w2 - w1, -w2];
        for (k, (e, s)) in mesh.face_edges(f).into_iter().enumerate() {
            values[e] += along[k] * (0.5 * s);
        }
    }
    Ok(Cochain { degree: 1, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_dec::mesh::build_surface;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random0(mesh: &SurfaceMesh, rng: &mut ChaCha8Rng) -> Cochain<f64> {
        Cochain::new(mesh, 0, (0..mesh.n_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn d_of_constant_vanishes() {
        let m = build_surface(2, 0).unwrap();
        let c = Cochain::new(&m, 0, vec![3.5; m.n_vertices()]).unwrap();
        assert!(coboundary(&m, &c).unwrap().values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dd_is_exactly_zero() {
        let m = build_surface(2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = random0(&m, &mut rng);
        let dd = coboundary(&m, &coboundary(&m, &c).unwrap()).unwrap();
        assert!(dd.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn face_sums_match_signed_edge_oracle() {
        let m = build_surface(2, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c: Cochain<f64> =
            Cochain::new(&m, 1, (0..m.n_edges()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let d = coboundary(&m, &c).unwrap();
        // oracle: look each boundary edge up by its endpoints
        for (f, t) in m.faces().iter().enumerate() {
            let mut s = 0.0;
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let e = m.edges().iter().position(|&[x, y]| x == a.min(b) && y == a.max(b)).unwrap();
                s += if a < b { c.values[e] } else { -c.values[e] };
            }
            assert!((s - d.values[f]).abs() < 1e-14);
        }
    }

    #[test]
    fn degree_two_is_rejected() {
        let m = build_surface(1, 0).unwrap();
        let c: Cochain<f64> = Cochain::zeros(&m, 2);
        assert_eq!(coboundary(&m, &c).unwrap_err(), CochainError::DegreeTooHigh(2));
    }

    #[test]
    fn whitney_of_exact_cochain_is_affine_gradient() {
        let m = build_surface(2, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random0(&m, &mut rng);
        let w = whitney(&m, &coboundary(&m, &u).unwrap()).unwrap();
        for (f, t) in m.faces().iter().enumerate() {
            let g = [u.values[t[1]] - u.values[t[0]], u.values[t[2]] - u.values[t[0]]];
            assert!((w.w[f][0] - g[0]).abs() < 1e-14 && (w.w[f][1] - g[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn round_trip_fixes_exact_cochains() {
        let m = build_surface(1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let du = coboundary(&m, &random0(&m, &mut rng)).unwrap();
        let back = unwhitney(&m, &whitney(&m, &du).unwrap()).unwrap();
        for (a, b) in back.values.iter().zip(&du.values) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn round_trip_only_damps_circulation() {
        // The composite subtracts a sixth of the circulation difference of the
        // two faces at each edge: identity on closed cochains, contracting on
        // the curl, but not idempotent.
        let m = build_surface(2, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c: Cochain<f64> =
            Cochain::new(&m, 1, (0..m.n_edges()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let mut x = c.clone();
        let curl = |x: &Cochain<f64>| coboundary(&m, x).unwrap().values.iter().map(|v| v * v).sum::<f64>();
        let c0 = curl(&x);
        for _ in 0..3 {
            x = unwhitney(&m, &whitney(&m, &x).unwrap()).unwrap();
        }
        assert!(curl(&x) < 0.5 * c0);
    }

    #[test]
    fn size_mismatch_is_reported() {
        let m = build_surface(1, 0).unwrap();
        let bad = Cochain::<f64> { degree: 1, values: vec![0.0; 3] };
        assert!(whitney(&m, &bad).is_err());
        assert!(unwhitney::<f64>(&m, &FaceForm1 { w: vec![[0.0; 2]; 2] }).is_err());
    }
}
