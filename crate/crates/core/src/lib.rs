//! Semismooth* Newton method for generalized equations `0 in f(x) + Q(x)`
//! driven by subspace containing derivatives (SCD) of the multifunction `Q`.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: sparse storage, ILU(0), GMRES, power method.
//! - [`subspaces`]: bases of `n`-dimensional subspaces of `R^{2n}`, duality, metric.
//! - [`scd`]: the [`scd::ScdMap`] interface and a few elementary instances.
//! - [`coulomb`]: the per-node Coulomb friction map and its product.
//! - [`newton`]: the globalized solver.
//! - [`oracles`]: sampling-based checks used by tests and diagnostics.
//! - [`synthetic`]: random contact problems with known solutions.

pub mod coulomb;
pub mod error;
pub mod linalg;
pub mod newton;
pub mod oracles;
pub mod scd;
pub mod subspaces;
pub mod synthetic;

pub use error::ScdError;
pub use subspaces::Side;
