//! Finite element model of an elastic block pressed onto a rigid foundation.
//!
//! The block `{(x1,x2,x3) : 0 < x1 < 2, 0 < x2 < 1, d(x1,x2) < x3 < 1}` is
//! clamped at `x1 = 0`, loaded by tractions on `x3 = 1` and `x1 = 2`, and may
//! touch the half-space `x3 <= 0` with its bottom face. [`assemble`] produces
//! the data of the generalized equation solved by `scd_core::newton`.

pub mod assembly;
pub mod element;
pub mod mesh;
pub mod vtk;

pub use assembly::{
    assemble, assemble_full_load, assemble_full_stiffness, ContactModel, LoadCase, Loads,
};
pub use element::Material;
pub use mesh::{build_mesh, mesh_sizes, Geometry, Mesh, MeshSizes, MeshSpec};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FemError {
    #[error("invalid material: E = {e}, nu = {nu} (need E > 0 and 0 < nu < 0.5)")]
    InvalidMaterial { e: f64, nu: f64 },
    #[error("element {element} is degenerate (Jacobian determinant {det:.3e})")]
    DegenerateElement { element: usize, det: f64 },
    #[error("refinement level {0} is out of range")]
    InvalidLevel(u32),
    #[error("friction coefficient {0} must be finite and non-negative")]
    InvalidFriction(f64),
}
