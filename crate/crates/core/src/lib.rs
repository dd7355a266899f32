//! Makespan scheduling of unit-length jobs with precedence constraints on
//! identical parallel machines: an exact solver for small instances, greedy
//! baselines, and a guess-and-recurse approximation scheme with tooling to
//! audit its intermediate quantities.

pub mod audit;
pub mod baselines;
pub mod bench;
pub mod corpus;
pub mod eps;
pub mod error;
pub mod generate;
pub mod io;
pub mod laminar;
pub mod model;
pub mod oracle;
pub mod params;
pub mod qptas;

pub use eps::Eps;
pub use error::{Error, Result};
pub use model::{
    validate_schedule, Instance, JobId, JobSet, Schedule, ValidationReport, Violation,
};
