//! Shock-layer profiles of the isentropic gas with capillarity and their
//! spectral stability via an adjoint compound-matrix Evans function.

pub mod band;
pub mod contour;
pub mod error;
pub mod evans;
pub mod gas;
pub mod io;
pub mod ode;
pub mod profile;
pub mod quad;
pub mod sweep;

pub use contour::{ContourResult, ContourSample, ContourSpec};
pub use error::{Error, Result};
pub use evans::{EvansEvaluation, EvansSystem, ScanReport};
pub use gas::{GasParams, HfBound};
pub use io::{Table, TableKind};
pub use ode::{OdeStats, Tolerances};
pub use profile::{Classification, MeshOptions, ProfileSolution, ShootOptions, ValidationReport};
pub use sweep::{PointOptions, SweepConfig, SweepRecord};
