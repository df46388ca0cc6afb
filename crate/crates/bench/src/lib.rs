//! Shared fixtures for the criterion benchmarks in `benches/`.

use conformal_aoa::{AngleGrid, ApertureConfig, ExperimentConfig, FrequencyGrid};

/// Default-config apertures plus the full-band frequency grid and 72-bin angle grid.
pub struct Fixture {
    pub apertures: (ApertureConfig, ApertureConfig),
    pub freqs: FrequencyGrid,
    pub angles: AngleGrid,
    pub ref_distance: f64,
}

pub fn fixture() -> Fixture {
    let cfg = ExperimentConfig::default();
    Fixture {
        apertures: cfg.build_apertures().expect("default config is valid"),
        freqs: cfg.frequency_grid().expect("default grid"),
        angles: cfg.angle_grid().expect("default angles"),
        ref_distance: cfg.ref_distance_m,
    }
}
