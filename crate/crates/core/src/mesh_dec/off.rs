//! ASCII OFF reader and writer. Vertex lines carry chart coordinates when the
//! mesh has a flat chart and zeros otherwise; face areas are not stored and
//! are re-initialized uniformly on read.

use super::mesh::{MeshError, SurfaceMesh};
use std::fmt::Write as _;

#[derive(Debug, thiserror::Error)]
pub enum OffError {
    #[error("malformed OFF input: {0}")]
    Parse(String),
    #[error("only triangular faces are supported (face {0})")]
    NonTriangle(usize),
    #[error("Euler characteristic {0} is not that of an orientable closed surface of genus >= 1")]
    BadTopology(i64),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

pub fn write_off(mesh: &SurfaceMesh) -> String {
    let mut s = String::from("OFF\n");
    let _ = writeln!(s, "{} {} {}", mesh.n_vertices(), mesh.n_faces(), mesh.n_edges());
    let chart = mesh.vertex_chart();
    for v in 0..mesh.n_vertices() {
        let [x, y] = chart.as_ref().map_or([0.0, 0.0], |c| c[v]);
        let _ = writeln!(s, "{x:.17} {y:.17} 0");
    }
    for t in mesh.faces() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    s
}

pub fn read_off(text: &str) -> Result<SurfaceMesh, OffError> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| OffError::Parse("empty input".into()))?;
    if header != "OFF" {
        return Err(OffError::Parse(format!("expected OFF header, found {header:?}")));
    }
    let counts: Vec<usize> = lines
        .next()
        .ok_or_else(|| OffError::Parse("missing counts line".into()))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| OffError::Parse(format!("bad count {t:?}"))))
        .collect::<Result<_, _>>()?;
    if counts.len() < 2 {
        return Err(OffError::Parse("counts line needs vertex and face counts".into()));
    }
    let (nv, nf) = (counts[0], counts[1]);
    for i in 0..nv {
        let l = lines.next().ok_or_else(|| OffError::Parse(format!("missing vertex line {i}")))?;
        if l.split_whitespace().count() < 3 {
            return Err(OffError::Parse(format!("vertex line {i} needs three coordinates")));
        }
    }
    let mut faces = Vec::with_capacity(nf);
    for f in 0..nf {
        let l = lines.next().ok_or_else(|| OffError::Parse(format!("missing face line {f}")))?;
        let idx: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| OffError::Parse(format!("bad index {t:?} in face {f}"))))
            .collect::<Result<_, _>>()?;
        if idx.first() != Some(&3) || idx.len() != 4 {
            return Err(OffError::NonTriangle(f));
        }
        faces.push([idx[1], idx[2], idx[3]]);
    }
    let ne = {
        let mut e: Vec<[usize; 2]> =
            faces.iter().flat_map(|t| (0..3).map(move |k| [t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3])])).collect();
        e.sort_unstable();
        e.dedup();
        e.len()
    };
    let chi = nv as i64 - ne as i64 + nf as i64;
    if chi > 0 || chi % 2 != 0 {
        return Err(OffError::BadTopology(chi));
    }
    let genus = ((2 - chi) / 2) as usize;
    Ok(SurfaceMesh::from_faces(nv, faces, vec![1.0 / nf as f64; nf], genus, None)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_dec::mesh::build_surface;

    #[test]
    fn round_trip_preserves_combinatorics() {
        for g in 1..=2 {
            let m = build_surface(g, 1).unwrap();
            let back = read_off(&write_off(&m)).unwrap();
            assert_eq!(back.faces(), m.faces());
            assert_eq!(back.genus(), g);
            assert!((back.total_volume() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_sphere_and_garbage() {
        let tetra = "OFF\n4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 1 2 3\n3 0 3 2\n";
        assert!(matches!(read_off(tetra), Err(OffError::BadTopology(2))));
        assert!(matches!(read_off("PLY\n"), Err(OffError::Parse(_))));
        assert!(matches!(read_off("OFF\n1 1 0\n0 0 0\n4 0 0 0 0\n"), Err(OffError::NonTriangle(0))));
    }
}
