//! Finite gauge transformations by a vertex field of SU(2) elements.

use super::config::{Configuration, FieldError};
use crate::lie::{Su2, K};
use crate::mesh_dec::faceform::FaceForm1;
use crate::par;

/// A -> g A g^-1 - (dg) g^-1, psi -> g psi g^-1, J unchanged.
///
/// On each face g is represented by exp of the mean of the vertex logarithms
/// and dg g^-1 along e_k by log(g_k g_0^-1), so constant g acts by exact
/// conjugation and the derivative at the identity is the infinitesimal action.
pub fn gauge_transform(g: &[Su2], x: &Configuration) -> Result<Configuration, FieldError> {
    let mesh = &x.mesh;
    if g.len() != mesh.n_vertices() {
        return Err(FieldError::SizeMismatch { expected: mesh.n_vertices(), got: g.len() });
    }
    for gv in g {
        Su2::new(gv.0)?;
    }
    let logs: Vec<K> = g.iter().map(|gv| gv.log()).collect();
    let per_face = par::map_indexed(mesh.n_faces(), |f| {
        let t = mesh.face(f);
        let gf = Su2::exp((logs[t[0]] + logs[t[1]] + logs[t[2]]) * (1.0 / 3.0));
        let g0inv = g[t[0]].inverse();
        let mc = [g[t[1]].mul(g0inv).log(), g[t[2]].mul(g0inv).log()];
        let [a1, a2] = x.a.w[f];
        let [p1, p2] = x.psi.w[f];
        ([gf.ad(a1) - mc[0], gf.ad(a2) - mc[1]], [gf.ad(p1), gf.ad(p2)])
    });
    let (a, psi): (Vec<_>, Vec<_>) = per_face.into_iter().unzip();
    Ok(Configuration { mesh: x.mesh.clone(), j: x.j.clone(), a: FaceForm1 { w: a }, psi: FaceForm1 { w: psi } })
}
