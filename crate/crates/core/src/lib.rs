//! Discrete model of universal moduli constructions for flat SU(2) / SL(2,C)
//! connections and Higgs bundles over a triangulated surface with varying
//! complex structure.
//!
//! Layers, bottom up: [`lie`] (algebra), [`mesh_dec`] (surface calculus),
//! [`fields`] (gauge fields and equations), [`kahler`] (structures and forms
//! on configuration space), [`moment`] (moment maps and actions) and
//! [`solve`] (solvers, gauge fixing, moduli metrics).

pub mod fd;
pub mod fields;
pub mod kahler;
pub mod lie;
pub mod mesh_dec;
pub mod moment;
pub mod par;
pub mod solve;
