//! Discrete exterior calculus on closed oriented triangulated surfaces.

pub mod cochain;
pub mod faceform;
pub mod geometry;
pub mod mesh;
pub mod off;

pub use cochain::{coboundary, unwhitney, whitney, Cochain, CochainError};
pub use faceform::{pair_integral, FaceForm1, TwoForm};
pub use geometry::{
    hamiltonian_field, lie_derivative_j, scalar_curvature, ComplexStructureField, GeometryError,
};
pub use mesh::{build_surface, MeshError, SurfaceMesh};
