use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Largest accepted refinement level; each level multiplies the face count by 4.
pub const MAX_REFINEMENT: usize = 6;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MeshError {
    #[error("genus {0} is not supported (need genus >= 1)")]
    UnsupportedGenus(usize),
    #[error("refinement level {0} exceeds the cap {MAX_REFINEMENT}")]
    RefinementOverflow(usize),
    #[error("edge {0:?} is not shared by exactly two oppositely oriented faces")]
    NonManifoldEdge([usize; 2]),
    #[error("face {0} has non-positive area")]
    BadArea(usize),
    #[error("face {0} references a vertex out of range or repeats a vertex")]
    BadFace(usize),
    #[error("Euler characteristic {chi} does not match genus {genus}")]
    EulerMismatch { chi: i64, genus: usize },
}

/// Oriented closed triangulated surface with per-face area (the 2-form omega).
///
/// Face f = (v0, v1, v2) carries the affine frame e1 = v1 - v0, e2 = v2 - v0;
/// all per-face tensors (J, 1-form components, vector fields) are expressed in
/// it. Local edge k of a face runs from v_k to v_{k+1 mod 3}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceMesh {
    n_vertices: usize,
    faces: Vec<[usize; 3]>,
    areas: Vec<f64>,
    genus: usize,
    edges: Vec<[usize; 2]>,
    /// Per face and local edge: (global edge, +1 if the local direction matches).
    face_edges: Vec<[(usize, f64); 3]>,
    /// Per face and local edge: the face across that edge.
    face_neighbors: Vec<[usize; 3]>,
    vertex_faces: Vec<Vec<usize>>,
    vertex_mass: Vec<f64>,
    /// Unwrapped chart coordinates of the face corners, when a global flat
    /// chart exists (the periodic torus).
    corner_chart: Option<Vec<[[f64; 2]; 3]>>,
}

/// Local corner coordinates of v0, v1, v2 in the face frame.
pub const CORNERS: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

impl SurfaceMesh {
    /// Assemble a mesh from faces, validating manifoldness and Euler characteristic.
    pub fn from_faces(
        n_vertices: usize,
        faces: Vec<[usize; 3]>,
        areas: Vec<f64>,
        genus: usize,
        corner_chart: Option<Vec<[[f64; 2]; 3]>>,
    ) -> Result<SurfaceMesh, MeshError> {
        for (f, t) in faces.iter().enumerate() {
            if t.iter().any(|&v| v >= n_vertices) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(MeshError::BadFace(f));
            }
            if !(areas[f] > 0.0) {
                return Err(MeshError::BadArea(f));
            }
        }
        let mut index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut incident: Vec<Vec<(usize, usize, f64)>> = Vec::new();
        let mut face_edges = vec![[(0usize, 0.0f64); 3]; faces.len()];
        for (f, t) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = [a.min(b), a.max(b)];
                let e = *index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    incident.push(Vec::new());
                    edges.len() - 1
                });
                let s = if a < b { 1.0 } else { -1.0 };
                face_edges[f][k] = (e, s);
                incident[e].push((f, k, s));
            }
        }
        let mut face_neighbors = vec![[usize::MAX; 3]; faces.len()];
        for (e, inc) in incident.iter().enumerate() {
            if inc.len() != 2 || inc[0].2 == inc[1].2 {
                return Err(MeshError::NonManifoldEdge(edges[e]));
            }
            face_neighbors[inc[0].0][inc[0].1] = inc[1].0;
            face_neighbors[inc[1].0][inc[1].1] = inc[0].0;
        }
        let chi = n_vertices as i64 - edges.len() as i64 + faces.len() as i64;
        if chi != 2 - 2 * genus as i64 {
            return Err(MeshError::EulerMismatch { chi, genus });
        }
        let mut vertex_faces = vec![Vec::new(); n_vertices];
        let mut vertex_mass = vec![0.0; n_vertices];
        for (f, t) in faces.iter().enumerate() {
            for &v in t {
                vertex_faces[v].push(f);
                vertex_mass[v] += areas[f] / 3.0;
            }
        }
        Ok(SurfaceMesh {
            n_vertices,
            faces,
            areas,
            genus,
            edges,
            face_edges,
            face_neighbors,
            vertex_faces,
            vertex_mass,
            corner_chart,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }
    pub fn genus(&self) -> usize {
        self.genus
    }
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }
    pub fn face(&self, f: usize) -> [usize; 3] {
        self.faces[f]
    }
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }
    pub fn face_edges(&self, f: usize) -> [(usize, f64); 3] {
        self.face_edges[f]
    }
    pub fn face_neighbors(&self, f: usize) -> [usize; 3] {
        self.face_neighbors[f]
    }
    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }
    pub fn areas(&self) -> &[f64] {
        &self.areas
    }
    pub fn area(&self, f: usize) -> f64 {
        self.areas[f]
    }
    /// omega(e1, e2) on face f: twice the area, since the frame triangle has
    /// coordinate area 1/2.
    pub fn omega_coeff(&self, f: usize) -> f64 {
        2.0 * self.areas[f]
    }
    pub fn vertex_masses(&self) -> &[f64] {
        &self.vertex_mass
    }
    pub fn mass(&self, v: usize) -> f64 {
        self.vertex_mass[v]
    }
    pub fn total_volume(&self) -> f64 {
        self.areas.iter().sum()
    }
    /// Right-hand side of the constant-curvature equation, 2 pi chi / V.
    pub fn curvature_target(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.euler_characteristic() as f64 / self.total_volume()
    }

    pub fn has_chart(&self) -> bool {
        self.corner_chart.is_some()
    }

    /// Chart position of a vertex (wrapped into the unit square).
    pub fn vertex_chart(&self) -> Option<Vec<[f64; 2]>> {
        let cc = self.corner_chart.as_ref()?;
        let mut out = vec![[0.0; 2]; self.n_vertices];
        for (f, t) in self.faces.iter().enumerate() {
            for k in 0..3 {
                out[t[k]] = cc[f][k].map(|x| x.rem_euclid(1.0));
            }
        }
        Some(out)
    }

    /// Chart coordinates of the face centroid (unwrapped).
    pub fn face_centroid_chart(&self, f: usize) -> Option<[f64; 2]> {
        let c = self.corner_chart.as_ref()?[f];
        Some([(c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0])
    }

    /// Matrix whose columns are the chart images of e1, e2 on face f.
    pub fn face_chart_frame(&self, f: usize) -> Option<Matrix2<f64>> {
        let c = self.corner_chart.as_ref()?[f];
        Some(Matrix2::new(
            c[1][0] - c[0][0],
            c[2][0] - c[0][0],
            c[1][1] - c[0][1],
            c[2][1] - c[0][1],
        ))
    }

    /// Local index of vertex v in face f.
    pub fn local_index(&self, f: usize, v: usize) -> Option<usize> {
        self.faces[f].iter().position(|&w| w == v)
    }

    /// Frame position of local corner k.
    pub fn corner(k: usize) -> Vector2<f64> {
        Vector2::new(CORNERS[k][0], CORNERS[k][1])
    }

    /// One 1-to-4 subdivision; areas are split evenly.
    pub fn subdivide(&self) -> SurfaceMesh {
        let nv = self.n_vertices;
        let ne = self.edges.len();
        let mut faces = Vec::with_capacity(4 * self.faces.len());
        let mut areas = Vec::with_capacity(4 * self.faces.len());
        let mut chart = self.corner_chart.as_ref().map(|_| Vec::with_capacity(4 * self.faces.len()));
        for (f, t) in self.faces.iter().enumerate() {
            let m = [0, 1, 2].map(|k| nv + self.face_edges[f][k].0);
            // m[k] is the midpoint of local edge k = (v_k, v_{k+1})
            faces.push([t[0], m[0], m[2]]);
            faces.push([t[1], m[1], m[0]]);
            faces.push([t[2], m[2], m[1]]);
            faces.push([m[0], m[1], m[2]]);
            for _ in 0..4 {
                areas.push(self.areas[f] / 4.0);
            }
            if let (Some(out), Some(cc)) = (chart.as_mut(), self.corner_chart.as_ref()) {
                let c = cc[f];
                let mid = |a: [f64; 2], b: [f64; 2]| [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
                let mc = [mid(c[0], c[1]), mid(c[1], c[2]), mid(c[2], c[0])];
                out.push([c[0], mc[0], mc[2]]);
                out.push([c[1], mc[1], mc[0]]);
                out.push([c[2], mc[2], mc[1]]);
                out.push([mc[0], mc[1], mc[2]]);
            }
        }
        SurfaceMesh::from_faces(nv + ne, faces, areas, self.genus, chart)
            .expect("subdivision preserves manifold structure")
    }

    /// Replace face areas (rescaled so they stay positive); used for OFF input
    /// and non-uniform area tests.
    pub fn with_areas(&self, areas: Vec<f64>) -> Result<SurfaceMesh, MeshError> {
        SurfaceMesh::from_faces(
            self.n_vertices,
            self.faces.clone(),
            areas,
            self.genus,
            self.corner_chart.clone(),
        )
    }
}

/// Periodic 3x3 torus grid; each square is split along its diagonal.
fn torus_base() -> SurfaceMesh {
    let n = 3;
    let id = |i: usize, j: usize| (i % n) + n * (j % n);
    let mut faces = Vec::new();
    let mut chart = Vec::new();
    let s = 1.0 / n as f64;
    for j in 0..n {
        for i in 0..n {
            let (x0, y0, x1, y1) = (i as f64 * s, j as f64 * s, (i + 1) as f64 * s, (j + 1) as f64 * s);
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            chart.push([[x0, y0], [x1, y0], [x1, y1]]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            chart.push([[x0, y0], [x1, y1], [x0, y1]]);
        }
    }
    let nf = faces.len();
    SurfaceMesh::from_faces(n * n, faces, vec![1.0 / nf as f64; nf], 1, Some(chart))
        .expect("torus base mesh is valid")
}

/// Octagon a b a^-1 b^-1 c d c^-1 d^-1 with three boundary segments per side,
/// an inner ring of 24 vertices and a centre vertex.
fn genus2_base() -> SurfaceMesh {
    // boundary points p_0..p_23, side i spans p_{3i}..p_{3i+3}
    let mut p = [usize::MAX; 24];
    let mut next = 1; // vertex 0 is the single corner class
    for i in 0..8 {
        p[3 * i] = 0;
    }
    for i in [0usize, 1, 4, 5] {
        for j in 1..3 {
            p[3 * i + j] = next;
            p[3 * (i + 2) + (3 - j)] = next;
            next += 1;
        }
    }
    let q: Vec<usize> = (0..24).map(|k| next + k).collect();
    let centre = next + 24;
    let mut faces = Vec::new();
    for k in 0..24 {
        let k1 = (k + 1) % 24;
        faces.push([p[k], p[k1], q[k1]]);
        faces.push([p[k], q[k1], q[k]]);
    }
    for k in 0..24 {
        faces.push([q[k], q[(k + 1) % 24], centre]);
    }
    let nf = faces.len();
    SurfaceMesh::from_faces(centre + 1, faces, vec![1.0 / nf as f64; nf], 2, None)
        .expect("octagon mesh is valid")
}

/// Closed surface of the given genus at the given refinement level, with
/// uniform face areas summing to 1.
pub fn build_surface(genus: usize, refinement: usize) -> Result<SurfaceMesh, MeshError> {
    if refinement > MAX_REFINEMENT {
        return Err(MeshError::RefinementOverflow(refinement));
    }
    let mut m = match genus {
        1 => torus_base(),
        2 => genus2_base(),
        g => return Err(MeshError::UnsupportedGenus(g)),
    };
    for _ in 0..refinement {
        m = m.subdivide();
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_counts() {
        let t = build_surface(1, 0).unwrap();
        assert_eq!((t.n_vertices(), t.n_edges(), t.n_faces()), (9, 27, 18));
        assert_eq!(t.euler_characteristic(), 0);
        let g = build_surface(2, 0).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges(), g.n_faces()), (34, 108, 72));
        assert_eq!(g.euler_characteristic(), -2);
    }

    #[test]
    fn refinement_preserves_chi() {
        for r in 0..3 {
            let g = build_surface(2, r).unwrap();
            assert_eq!(g.euler_characteristic(), -2);
            assert_eq!(g.n_faces(), 72 * 4usize.pow(r as u32));
            assert!((g.total_volume() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_requests() {
        assert_eq!(build_surface(0, 0).unwrap_err(), MeshError::UnsupportedGenus(0));
        assert_eq!(build_surface(3, 0).unwrap_err(), MeshError::UnsupportedGenus(3));
        assert_eq!(
            build_surface(1, MAX_REFINEMENT + 1).unwrap_err(),
            MeshError::RefinementOverflow(MAX_REFINEMENT + 1)
        );
    }

    #[test]
    fn masses_sum_to_volume() {
        let g = build_surface(2, 1).unwrap();
        let s: f64 = g.vertex_masses().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn neighbours_are_symmetric() {
        let g = build_surface(2, 0).unwrap();
        for f in 0..g.n_faces() {
            for &n in &g.face_neighbors(f) {
                assert!(g.face_neighbors(n).contains(&f));
                assert_ne!(n, f);
            }
        }
    }

    #[test]
    fn torus_chart_frames_have_uniform_area() {
        let t = build_surface(1, 1).unwrap();
        for f in 0..t.n_faces() {
            let e = t.face_chart_frame(f).unwrap();
            assert!((e.determinant() - 1.0 / 36.0).abs() < 1e-14);
        }
    }
}
