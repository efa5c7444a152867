//! Collective excitation of a trapped condensate by sweeping a Gaussian well
//! across a harmonic trap: the ground state is carried diabatically through a
//! narrow avoided crossing and ends in the first excited motional state.
//!
//! Units are those of the trap: time `ωt`, length `sqrt(ħ/mω)`, energy `ħω`.

pub mod analysis;
pub mod banded;
pub mod config;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod optimize;
pub mod potential;
pub mod propagate;
pub mod spectrum;

pub use error::{Error, Result};
pub use grid::{Grid, WaveFunction};
pub use potential::{PotentialParams, SweepSchedule};
