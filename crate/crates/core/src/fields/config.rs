//! Configurations x = (J, A, psi) and tangent vectors (Jdot, a, psidot).
//!
//! A and psi are stored in the per-face representation. Flat coordinate
//! vectors use 14 reals per face: the J chart (log p, r), then A(e1), A(e2),
//! psi(e1), psi(e2). Tangent vectors use the matching chart coordinates of
//! Jdot, so forms and structures act block-diagonally per face.

use crate::lie::K;
use crate::mesh_dec::faceform::FaceForm1;
use crate::mesh_dec::geometry::{chart_tangents, j_from_chart, tangent_coords, ComplexStructureField, GeometryError};
use crate::mesh_dec::mesh::SurfaceMesh;
use nalgebra::Matrix2;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::sync::Arc;

pub const DOF_PER_FACE: usize = 14;
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FieldError {
    #[error("epsilon must be -1 or 1, got {0}")]
    InvalidEpsilon(f64),
    #[error("coupling constant must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("covariant derivative of a 2-form is not defined on a surface")]
    DegreeTooHigh,
    #[error("expected {expected} entries, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("face {face}: Jdot J + J Jdot has norm {defect:.3e}")]
    NotTangent { face: usize, defect: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    NotUnitary(#[from] crate::lie::NotUnitary),
    #[error("configuration document: {0}")]
    Document(String),
}

pub fn check_epsilon(eps: f64) -> Result<f64, FieldError> {
    if eps == 1.0 || eps == -1.0 {
        Ok(eps)
    } else {
        Err(FieldError::InvalidEpsilon(eps))
    }
}

#[derive(Clone, Debug)]
pub struct Configuration {
    pub mesh: Arc<SurfaceMesh>,
    pub j: ComplexStructureField,
    pub a: FaceForm1<K>,
    pub psi: FaceForm1<K>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub jdot: Vec<Matrix2<f64>>,
    pub a: FaceForm1<K>,
    pub psidot: FaceForm1<K>,
}

fn put_k(out: &mut [f64], x: K) {
    out.copy_from_slice(&x.0);
}

fn get_k(s: &[f64]) -> K {
    K([s[0], s[1], s[2]])
}

pub(crate) fn random_k<R: Rng>(rng: &mut R, amp: f64) -> K {
    K([0, 1, 2].map(|_| rng.gen_range(-amp..=amp)))
}

pub(crate) fn random_form<R: Rng>(rng: &mut R, n: usize, amp: f64) -> FaceForm1<K> {
    FaceForm1 { w: (0..n).map(|_| [random_k(rng, amp), random_k(rng, amp)]).collect() }
}

impl Configuration {
    pub fn new(
        mesh: Arc<SurfaceMesh>,
        j: ComplexStructureField,
        a: FaceForm1<K>,
        psi: FaceForm1<K>,
    ) -> Result<Self, FieldError> {
        j.validate(&mesh)?;
        let nf = mesh.n_faces();
        for len in [a.len(), psi.len()] {
            if len != nf {
                return Err(FieldError::SizeMismatch { expected: nf, got: len });
            }
        }
        Ok(Configuration { mesh, j, a, psi })
    }

    /// (J_ref, 0, 0).
    pub fn vacuum(mesh: Arc<SurfaceMesh>) -> Self {
        let nf = mesh.n_faces();
        Configuration { j: ComplexStructureField::reference(&mesh), a: FaceForm1::zeros(nf), psi: FaceForm1::zeros(nf), mesh }
    }

    /// Random configuration near the reference structure.
    pub fn random<R: Rng>(mesh: Arc<SurfaceMesh>, rng: &mut R, j_amp: f64, field_amp: f64) -> Self {
        let base = crate::mesh_dec::geometry::chart_from_j(&crate::mesh_dec::geometry::reference_j());
        let nf = mesh.n_faces();
        let chart: Vec<(f64, f64)> = (0..nf)
            .map(|_| (base.0 + rng.gen_range(-j_amp..=j_amp), base.1 + rng.gen_range(-j_amp..=j_amp)))
            .collect();
        Configuration {
            j: ComplexStructureField::from_chart(&chart),
            a: random_form(rng, nf, field_amp),
            psi: random_form(rng, nf, field_amp),
            mesh,
        }
    }

    pub fn n_faces(&self) -> usize {
        self.mesh.n_faces()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = vec![0.0; DOF_PER_FACE * self.n_faces()];
        for (f, chunk) in out.chunks_mut(DOF_PER_FACE).enumerate() {
            let (lp, r) = crate::mesh_dec::geometry::chart_from_j(&self.j.j[f]);
            chunk[0] = lp;
            chunk[1] = r;
            put_k(&mut chunk[2..5], self.a.w[f][0]);
            put_k(&mut chunk[5..8], self.a.w[f][1]);
            put_k(&mut chunk[8..11], self.psi.w[f][0]);
            put_k(&mut chunk[11..14], self.psi.w[f][1]);
        }
        out
    }

    pub fn from_vec(mesh: Arc<SurfaceMesh>, v: &[f64]) -> Self {
        let nf = mesh.n_faces();
        assert_eq!(v.len(), DOF_PER_FACE * nf, "coordinate vector length");
        let mut j = Vec::with_capacity(nf);
        let mut a = Vec::with_capacity(nf);
        let mut psi = Vec::with_capacity(nf);
        for c in v.chunks(DOF_PER_FACE) {
            j.push(j_from_chart(c[0], c[1]));
            a.push([get_k(&c[2..5]), get_k(&c[5..8])]);
            psi.push([get_k(&c[8..11]), get_k(&c[11..14])]);
        }
        Configuration { mesh, j: ComplexStructureField { j }, a: FaceForm1 { w: a }, psi: FaceForm1 { w: psi } }
    }

    /// x + t v, moving J along its chart to first order (J follows the chart
    /// line through the tangent coordinates of v).
    pub fn step(&self, v: &TangentVector, t: f64) -> Self {
        let mut x = self.to_vec();
        for (xi, vi) in x.iter_mut().zip(v.to_vec(self)) {
            *xi += t * vi;
        }
        Configuration::from_vec(self.mesh.clone(), &x)
    }

    /// x + t v with J moved linearly in the ambient matrix space (J + t Jdot).
    /// Only J^2 = -1 to first order; used by finite-difference probes of
    /// quantities that are polynomial in J.
    pub fn step_ambient(&self, v: &TangentVector, t: f64) -> Self {
        Configuration {
            mesh: self.mesh.clone(),
            j: ComplexStructureField { j: self.j.j.iter().zip(&v.jdot).map(|(j, d)| j + d * t).collect() },
            a: self.a.add(&v.a.scale(t)),
            psi: self.psi.add(&v.psidot.scale(t)),
        }
    }

    pub fn with_psi(&self, psi: FaceForm1<K>) -> Self {
        Configuration { psi, ..self.clone() }
    }

    pub fn with_j(&self, j: ComplexStructureField) -> Self {
        Configuration { j, ..self.clone() }
    }

    pub fn to_document(&self) -> ConfigurationDocument {
        ConfigurationDocument {
            version: FORMAT_VERSION,
            mesh: MeshRef::of(&self.mesh),
            j: self.j.j.iter().map(|m| [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]).collect(),
            a: self.a.w.clone(),
            psi: self.psi.w.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("configuration serializes")
    }

    pub fn from_json(mesh: Arc<SurfaceMesh>, s: &str) -> Result<Self, FieldError> {
        let doc: ConfigurationDocument = serde_json::from_str(s).map_err(|e| FieldError::Document(e.to_string()))?;
        if doc.version != FORMAT_VERSION {
            return Err(FieldError::Document(format!("unsupported version {}", doc.version)));
        }
        if doc.mesh != MeshRef::of(&mesh) {
            return Err(FieldError::Document("document was written for a different mesh".into()));
        }
        let j = ComplexStructureField { j: doc.j.iter().map(|e| Matrix2::new(e[0], e[1], e[2], e[3])).collect() };
        Configuration::new(mesh, j, FaceForm1 { w: doc.a }, FaceForm1 { w: doc.psi })
    }

    /// SHA-256 of the canonical JSON document, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.to_document()).expect("configuration serializes");
        hex_digest(&bytes)
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshRef {
    pub genus: usize,
    pub n_vertices: usize,
    pub n_faces: usize,
    pub faces_sha256: String,
}

impl MeshRef {
    pub fn of(mesh: &SurfaceMesh) -> Self {
        let bytes: Vec<u8> = mesh.faces().iter().flatten().flat_map(|&v| (v as u64).to_le_bytes()).collect();
        MeshRef {
            genus: mesh.genus(),
            n_vertices: mesh.n_vertices(),
            n_faces: mesh.n_faces(),
            faces_sha256: hex_digest(&bytes),
        }
    }
}

/// Serialized configuration: J entries row-major per face, A and psi per face.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfigurationDocument {
    pub version: u32,
    pub mesh: MeshRef,
    pub j: Vec<[f64; 4]>,
    pub a: Vec<[K; 2]>,
    pub psi: Vec<[K; 2]>,
}

impl TangentVector {
    pub fn zeros(n_faces: usize) -> Self {
        TangentVector { jdot: vec![Matrix2::zeros(); n_faces], a: FaceForm1::zeros(n_faces), psidot: FaceForm1::zeros(n_faces) }
    }

    pub fn vertical(a: FaceForm1<K>, psidot: FaceForm1<K>) -> Self {
        TangentVector { jdot: vec![Matrix2::zeros(); a.len()], a, psidot }
    }

    pub fn is_vertical(&self) -> bool {
        self.jdot.iter().all(|m| m.norm() == 0.0)
    }

    pub fn n_faces(&self) -> usize {
        self.jdot.len()
    }

    pub fn check(&self, x: &Configuration) -> Result<(), FieldError> {
        for (f, (d, j)) in self.jdot.iter().zip(&x.j.j).enumerate() {
            let defect = (d * j + j * d).norm();
            if defect > 1e-12 * (1.0 + d.norm()) {
                return Err(FieldError::NotTangent { face: f, defect });
            }
        }
        Ok(())
    }

    pub fn random<R: Rng>(x: &Configuration, rng: &mut R, amp: f64) -> Self {
        let nf = x.n_faces();
        let jdot = x
            .j
            .j
            .iter()
            .map(|j| {
                let [t1, t2] = chart_tangents(j);
                t1 * rng.gen_range(-amp..amp) + t2 * rng.gen_range(-amp..amp)
            })
            .collect();
        TangentVector { jdot, a: random_form(rng, nf, amp), psidot: random_form(rng, nf, amp) }
    }

    pub fn random_vertical<R: Rng>(x: &Configuration, rng: &mut R, amp: f64) -> Self {
        let nf = x.n_faces();
        TangentVector::vertical(random_form(rng, nf, amp), random_form(rng, nf, amp))
    }

    pub fn add(&self, o: &Self) -> Self {
        TangentVector {
            jdot: self.jdot.iter().zip(&o.jdot).map(|(a, b)| a + b).collect(),
            a: self.a.add(&o.a),
            psidot: self.psidot.add(&o.psidot),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        TangentVector { jdot: self.jdot.iter().map(|a| a * s).collect(), a: self.a.scale(s), psidot: self.psidot.scale(s) }
    }

    /// Chart coordinates, 14 per face.
    pub fn to_vec(&self, x: &Configuration) -> Vec<f64> {
        let mut out = vec![0.0; DOF_PER_FACE * self.n_faces()];
        for (f, chunk) in out.chunks_mut(DOF_PER_FACE).enumerate() {
            let [c0, c1] = tangent_coords(&x.j.j[f], &self.jdot[f]);
            chunk[0] = c0;
            chunk[1] = c1;
            put_k(&mut chunk[2..5], self.a.w[f][0]);
            put_k(&mut chunk[5..8], self.a.w[f][1]);
            put_k(&mut chunk[8..11], self.psidot.w[f][0]);
            put_k(&mut chunk[11..14], self.psidot.w[f][1]);
        }
        out
    }

    pub fn from_vec(x: &Configuration, v: &[f64]) -> Self {
        let nf = x.n_faces();
        assert_eq!(v.len(), DOF_PER_FACE * nf, "tangent vector length");
        let mut out = TangentVector::zeros(nf);
        for (f, c) in v.chunks(DOF_PER_FACE).enumerate() {
            let [t1, t2] = chart_tangents(&x.j.j[f]);
            out.jdot[f] = t1 * c[0] + t2 * c[1];
            out.a.w[f] = [get_k(&c[2..5]), get_k(&c[5..8])];
            out.psidot.w[f] = [get_k(&c[8..11]), get_k(&c[11..14])];
        }
        out
    }

    pub fn norm_sq(&self) -> f64 {
        self.jdot.iter().map(|m| m.norm_squared()).sum::<f64>() + self.a.norm_sq() + self.psidot.norm_sq()
    }
}
