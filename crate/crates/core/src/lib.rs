//! Simulation of myopic baby naming.
//!
//! Parents pick the name whose current popularity is closest to the
//! popularity they want for their child. This crate provides the building
//! blocks for studying where that leads:
//!
//! * [`distributions`]: discrete rank power laws, log-normal preference
//!   sampling, discretized preference masses and log-log fitting.
//! * [`population`]: the [`NameTable`] frequency distribution at a step.
//! * [`dynamics`]: the step map (mass flow and Monte Carlo), closed-form
//!   power-law iteration, stability and satisfiability diagnostics.
//! * [`metrics`]: parent error measures, rank correlation, concentration
//!   and distribution distances.
//! * [`ingestion`]: SSA `yobYYYY.txt` parsing, empirical tables, name list
//!   statistics and Welch's t-test.
//! * [`mutation`]: inventing new names by penalized edit distance.

pub mod distributions;
pub mod dynamics;
mod error;
pub mod ingestion;
pub mod metrics;
pub mod mutation;
pub mod population;
pub mod rng;
mod special;

pub use distributions::{DiscretePrefMass, LogNormalParams, PowerLawFit, PowerLawParams};
pub use dynamics::{PreferenceModel, StepMode, Trajectory};
pub use error::{Error, Result};
pub use population::{NameTable, ParentOutcome};
