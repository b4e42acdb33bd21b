//! Experiment driver for the frictional contact benchmark.
//!
//! One run builds the finite element model for a `(lev, geometry, load)`
//! triple, solves it with the semismooth* Newton method and writes a
//! convergence table, the contact states and a JSON summary.

pub mod config;
pub mod run;
pub mod warm;

pub use config::{CliArgs, ConfigError, ExperimentConfig, VariantName};
pub use run::{run_experiment, run_from, ExperimentOutput, Start};
pub use warm::{interpolate_nodal, interpolate_warm_start, StoredSolution};

pub const EXIT_SOLVER_FAILURE: i32 = 2;
pub const EXIT_CONFIG_ERROR: i32 = 3;
