//! Simulation and computational angle-of-arrival estimation for a pair of conformal
//! frequency-diverse metasurface antennas.
//!
//! The pipeline is: [`forward`] synthesises port voltages for both apertures, [`sensing`]
//! cross-correlates them into a sensing matrix `H` and measurement vectors `g`, and
//! [`estimator`] inverts `g = H f` for the angle profile. [`io`] persists every artifact and
//! [`sweep`] runs seeded Monte-Carlo campaigns over bands, distances and SNRs.

pub mod error;
pub mod estimator;
pub mod forward;
pub mod grid;
pub mod io;
pub mod plot;
pub mod rng;
pub mod sensing;
pub mod sweep;

pub use error::{Error, Result};
pub use estimator::{
    estimate_aoa, matched_filter, svd_spectrum, EstimationResult, SolverSettings, SvdSpectrum,
};
pub use forward::{ApertureConfig, LayoutParams, MetaElement, PortId, SourceSpec};
pub use grid::{AngleGrid, FrequencyGrid};
pub use io::ExperimentConfig;
pub use sensing::{MeasurementVector, SensingMatrix};
pub use sweep::{run_sweep, SweepReport, SweepSpec};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
