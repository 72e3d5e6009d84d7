//! Energy-stable splitting schemes for the two-dimensional
//! Cahn-Hilliard-Navier-Stokes system on a MAC grid.

pub mod error;
pub mod grid;
pub mod mms;
pub mod norms;
pub mod ops;
pub mod physics;
pub mod scenarios;
pub mod scheme;
pub mod solvers;

pub use error::{Error, Result};
pub use grid::{CellField, FaceField, GridSpec, VelocityField};
pub use physics::{DiagnosticsRecord, PhysParams, SchemeState};
