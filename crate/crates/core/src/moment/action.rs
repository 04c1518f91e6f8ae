//! Infinitesimal actions of the gauge and Hamiltonian groups on configurations.

use super::maps::{complex_vertical_part, psi_j_eta, vertical_part, GaugeParameter};
use super::MomentError;
use crate::fields::config::{Configuration, TangentVector};
use crate::fields::ops::{curvature, d_a0, d_a1};
use crate::fields::residual::{complex_connection, complex_curvature};
use crate::lie::{Coeff, G, K};
use crate::mesh_dec::faceform::{avg_to_vertices, density_on_faces, face_mean, FaceForm1, TwoForm};
use crate::mesh_dec::geometry::lie_derivative_j;
use crate::mesh_dec::mesh::SurfaceMesh;
use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionVariant {
    /// Real extended gauge action.
    P,
    /// P composed with the shift T(f, u) = (f, u + 2 psi(J eta)).
    PTilde,
    /// Complexified action on flat connections.
    Pc,
    /// Complexified action on Higgs pairs.
    Pc0,
}

/// L_y J projected onto the tangent space at J.
pub fn lie_derivative_tangent(x: &Configuration, y: &[Vector2<f64>]) -> Result<Vec<Matrix2<f64>>, MomentError> {
    let l = lie_derivative_j(&x.mesh, y, &x.j)?;
    Ok(l.iter().zip(&x.j.j).map(|(l, j)| (l + j * l * j) * 0.5).collect())
}

/// i_y F for a weak 2-form, using its face density.
pub fn contract_two<C: Coeff>(mesh: &SurfaceMesh, two: &TwoForm<C>, y: &[Vector2<f64>]) -> FaceForm1<C> {
    let dens = density_on_faces(mesh, two);
    FaceForm1 {
        w: dens
            .iter()
            .zip(y)
            .enumerate()
            .map(|(f, (&d, y))| {
                let c = mesh.omega_coeff(f);
                [d * (-c * y[1]), d * (c * y[0])]
            })
            .collect(),
    }
}

fn bracket_faces(psi: &FaceForm1<K>, u: &[K]) -> FaceForm1<K> {
    FaceForm1 { w: psi.w.iter().zip(u).map(|(p, &u)| [p[0].bracket(u), p[1].bracket(u)]).collect() }
}

/// T(f, u) = (f, u + 2 avg psi(J eta_f)).
pub fn shift(x: &Configuration, zeta: &GaugeParameter) -> GaugeParameter {
    let eta = crate::mesh_dec::geometry::hamiltonian_field(&x.mesh, &zeta.f);
    let pj = avg_to_vertices(&x.mesh, &psi_j_eta(x, &eta));
    GaugeParameter { f: zeta.f.clone(), u: zeta.u.iter().zip(&pj).map(|(&u, &p)| u + p * 2.0).collect(), complex: None }
}

fn real_action(x: &Configuration, zeta: &GaugeParameter) -> Result<TangentVector, MomentError> {
    let mesh = &x.mesh;
    let eta = crate::mesh_dec::geometry::hamiltonian_field(mesh, &zeta.f);
    let lj = lie_derivative_tangent(x, &eta)?;
    let w = vertical_part(x, zeta, &eta);
    let a = d_a0(mesh, &x.a, &w).add(&contract_two(mesh, &curvature(mesh, &x.a), &eta));
    let pe = avg_to_vertices(mesh, &x.psi.contract(&eta));
    let psidot = d_a0(mesh, &x.a, &pe)
        .add(&contract_two(mesh, &d_a1(mesh, &x.a, &x.psi), &eta))
        .add(&bracket_faces(&x.psi, &face_mean(mesh, &w)));
    Ok(TangentVector { jdot: lj.iter().map(|m| -m).collect(), a: a.scale(-1.0), psidot: psidot.scale(-1.0) })
}

fn flat_action(x: &Configuration, zeta: &GaugeParameter) -> Result<TangentVector, MomentError> {
    let mesh = &x.mesh;
    let y = zeta.vector_field(mesh);
    let lj = lie_derivative_tangent(x, &y)?;
    let d = complex_connection(&x.a, &x.psi);
    let dz = complex_vertical_part(x, zeta);
    let ddot = d_a0(mesh, &d, &dz).add(&contract_two(mesh, &complex_curvature(mesh, &x.a, &x.psi), &y));
    Ok(TangentVector {
        jdot: lj.iter().map(|m| -m).collect(),
        a: ddot.map(|g: G| -g.re()),
        psidot: ddot.map(|g: G| -g.im()),
    })
}

fn higgs_action(x: &Configuration, zeta: &GaugeParameter) -> Result<TangentVector, MomentError> {
    let mesh = &x.mesh;
    let c = zeta.complex.as_ref().expect("checked by caller");
    let y = zeta.vector_field(mesh);
    let lj = lie_derivative_tangent(x, &y)?;
    let a = d_a0(mesh, &x.a, &zeta.u)
        .add(&d_a0(mesh, &x.a, &c.u_im).apply_j(&x.j.j))
        .add(&contract_two(mesh, &curvature(mesh, &x.a), &y));
    let (u0, u1) = (face_mean(mesh, &zeta.u), face_mean(mesh, &c.u_im));
    let jpsi = x.psi.apply_j(&x.j.j);
    // [psi, u0] carries the sign of the real gauge action, so that the
    // imaginary direction is I applied to the real one.
    let psidot = bracket_faces(&x.psi, &u0)
        .sub(&bracket_faces(&jpsi, &u1))
        .add(&contract_two(mesh, &d_a1(mesh, &x.a, &x.psi), &y));
    Ok(TangentVector { jdot: lj.iter().map(|m| -m).collect(), a: a.scale(-1.0), psidot: psidot.scale(-1.0) })
}

/// zeta . x for the chosen action.
pub fn infinitesimal_action(variant: ActionVariant, x: &Configuration, zeta: &GaugeParameter) -> Result<TangentVector, MomentError> {
    zeta.check(&x.mesh)?;
    let complex = matches!(variant, ActionVariant::Pc | ActionVariant::Pc0);
    if complex != zeta.complex.is_some() {
        return Err(MomentError::Group(format!("{variant:?} and the parameter's group differ")));
    }
    match variant {
        ActionVariant::P => real_action(x, zeta),
        ActionVariant::PTilde => real_action(x, &shift(x, zeta)),
        ActionVariant::Pc => flat_action(x, zeta),
        ActionVariant::Pc0 => higgs_action(x, zeta),
    }
}
