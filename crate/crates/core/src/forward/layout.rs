//! Seeded random placement of elements on the two semicircular apertures.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::aperture::{ApertureConfig, ApertureGeometry, GainModel, PortId};
use super::element::{FeedSide, MetaElement};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// Parameters of the random layout generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayoutParams {
    pub radius_m: f64,
    pub siw_width_m: f64,
    pub rel_permittivity: f64,
    pub elements_per_aperture: usize,
    /// Elements on the `before` side of the feed; the rest go after it.
    pub elements_before_feed: usize,
    pub design_band_hz: (f64, f64),
    pub q_range: (f64, f64),
    pub radiated_fraction_range: (f64, f64),
    /// Apply a uniform `+-1%` multiplicative resonance shift to model bending.
    pub bending_detuning: bool,
    pub gain: GainModel,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            radius_m: 0.045,
            siw_width_m: 0.015,
            rel_permittivity: 2.2,
            elements_per_aperture: 17,
            elements_before_feed: 8,
            design_band_hz: (8.5e9, 11.5e9),
            q_range: (25.0, 60.0),
            radiated_fraction_range: (0.30, 0.40),
            bending_detuning: false,
            gain: GainModel::default(),
        }
    }
}

const BENDING_DETUNING: f64 = 0.01;

impl LayoutParams {
    /// Upper semicircle for port 1, lower for port 2, each fed at its arc midpoint.
    pub fn geometry(&self, port: PortId) -> ApertureGeometry {
        let (start, end) = match port {
            PortId::One => (0.0, PI),
            PortId::Two => (PI, 2.0 * PI),
        };
        ApertureGeometry {
            port_id: port,
            radius: self.radius_m,
            siw_width: self.siw_width_m,
            rel_permittivity: self.rel_permittivity,
            feed_azimuth: 0.5 * (start + end),
            arc_span: (start, end),
            gain: self.gain,
        }
    }

    /// Draws one aperture. Each feed side gets jittered azimuths (one per equal sub-arc) and
    /// stratified resonances, so that every quarter covers the whole design band.
    pub fn generate(&self, port: PortId, seed: u64) -> Result<ApertureConfig> {
        self.validate()?;
        let geometry = self.geometry(port);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[port.number() as u64]));
        let (start, end) = geometry.arc_span;
        let feed = geometry.feed_azimuth;
        let counts = [
            (FeedSide::Before, self.elements_before_feed, start, feed),
            (
                FeedSide::After,
                self.elements_per_aperture - self.elements_before_feed,
                feed,
                end,
            ),
        ];
        let mut elements = Vec::with_capacity(self.elements_per_aperture);
        for (side, n, lo, hi) in counts {
            if n == 0 {
                continue;
            }
            let (b_lo, b_hi) = self.design_band_hz;
            let strata = (b_hi - b_lo) / n as f64;
            let mut resonances: Vec<f64> = (0..n)
                .map(|i| b_lo + strata * (i as f64 + rng.random::<f64>()))
                .collect();
            resonances.shuffle(&mut rng);
            let slot = (hi - lo) / n as f64;
            for (i, f0) in resonances.into_iter().enumerate() {
                let azimuth = lo + slot * (i as f64 + rng.random::<f64>());
                let q = rng.random_range(self.q_range.0..=self.q_range.1);
                let (p_lo, p_hi) = self.radiated_fraction_range;
                let fraction = rng.random_range(p_lo..=p_hi);
                let f0 = if self.bending_detuning {
                    let shift = rng.random_range(-BENDING_DETUNING..=BENDING_DETUNING);
                    (f0 * (1.0 + shift)).clamp(b_lo, b_hi)
                } else {
                    f0
                };
                elements.push(MetaElement::calibrated(f0, q, fraction, azimuth, side)?);
            }
        }
        ApertureConfig::new(geometry, elements)
    }

    pub fn generate_pair(&self, seed: u64) -> Result<(ApertureConfig, ApertureConfig)> {
        Ok((
            self.generate(PortId::One, seed)?,
            self.generate(PortId::Two, seed)?,
        ))
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("radius_m", self.radius_m),
            ("siw_width_m", self.siw_width_m),
            ("rel_permittivity", self.rel_permittivity),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("must be positive, got {v}")));
            }
        }
        if self.elements_before_feed > self.elements_per_aperture {
            return Err(Error::config(
                "elements_before_feed",
                format!(
                    "{} exceeds elements_per_aperture ({})",
                    self.elements_before_feed, self.elements_per_aperture
                ),
            ));
        }
        let (b_lo, b_hi) = self.design_band_hz;
        if !(b_lo > 0.0 && b_hi > b_lo && b_hi.is_finite()) {
            return Err(Error::config(
                "design_band_hz",
                format!("must be an increasing positive pair, got [{b_lo}, {b_hi}]"),
            ));
        }
        let (q_lo, q_hi) = self.q_range;
        if !(q_lo > 0.0 && q_hi >= q_lo && q_hi.is_finite()) {
            return Err(Error::config(
                "q_range",
                format!("must be a positive non-decreasing pair, got [{q_lo}, {q_hi}]"),
            ));
        }
        let (p_lo, p_hi) = self.radiated_fraction_range;
        if !(0.0 <= p_lo && p_lo <= p_hi && p_hi < 1.0) {
            return Err(Error::config(
                "radiated_fraction_range",
                format!("must satisfy 0 <= lo <= hi < 1, got [{p_lo}, {p_hi}]"),
            ));
        }
        Ok(())
    }
}
