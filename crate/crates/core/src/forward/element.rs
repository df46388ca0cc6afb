use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which guided wave, leaving the feed, serves an element.
///
/// `Before` elements sit at azimuths below the feed, `After` elements above it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedSide {
    Before,
    After,
}

/// One resonant radiator on the guided-wave aperture, modelled as a Lorentzian polarizability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaElement {
    /// Hz.
    pub resonance_freq: f64,
    pub quality_factor: f64,
    pub coupling_amp: f64,
    /// Radians, measured counter-clockwise from +x on the cylinder cross-section.
    pub azimuth: f64,
    pub side: FeedSide,
}

impl MetaElement {
    /// Element whose radiated power fraction at `resonance_freq` equals `peak_fraction`.
    pub fn calibrated(
        resonance_freq: f64,
        quality_factor: f64,
        peak_fraction: f64,
        azimuth: f64,
        side: FeedSide,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&peak_fraction) {
            return Err(Error::Domain(format!(
                "resonant radiated fraction must lie in [0, 1), got {peak_fraction}"
            )));
        }
        if !(quality_factor > 0.0 && quality_factor.is_finite()) {
            return Err(Error::Domain(format!(
                "quality factor must be positive, got {quality_factor}"
            )));
        }
        let elem = Self {
            resonance_freq,
            quality_factor,
            coupling_amp: peak_fraction.sqrt() / quality_factor,
            azimuth,
            side,
        };
        elem.validate()?;
        Ok(elem)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.resonance_freq,
            self.quality_factor,
            self.coupling_amp,
            self.azimuth,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("element parameters must be finite".into()));
        }
        if self.resonance_freq <= 0.0 {
            return Err(Error::Domain(format!(
                "resonance frequency must be positive, got {}",
                self.resonance_freq
            )));
        }
        if self.quality_factor <= 0.0 {
            return Err(Error::Domain(format!(
                "quality factor must be positive, got {}",
                self.quality_factor
            )));
        }
        if self.coupling_amp < 0.0 {
            return Err(Error::Domain(format!(
                "coupling amplitude must be non-negative, got {}",
                self.coupling_amp
            )));
        }
        if self.peak_radiated_fraction() >= 1.0 {
            return Err(Error::Domain(format!(
                "element at {} Hz would radiate {:.3} of the guided power; coupling too strong",
                self.resonance_freq,
                self.peak_radiated_fraction()
            )));
        }
        Ok(())
    }

    /// Radiated fraction at `resonance_freq`, i.e. `(A * Q)^2`.
    pub fn resonant_radiated_fraction(&self) -> f64 {
        (self.coupling_amp * self.quality_factor).powi(2)
    }

    /// Supremum of the radiated fraction over all frequencies.
    ///
    /// `|alpha|^2 / A^2 = 1 / ((u - 1)^2 + u / Q^2)` with `u = (f0 / f)^2`; the minimum of the
    /// denominator over `u > 0` is `1/Q^2 - 1/(4 Q^4)` for `Q > 1/sqrt(2)`, else 1 (as `f -> inf`).
    pub fn peak_radiated_fraction(&self) -> f64 {
        let q2 = self.quality_factor * self.quality_factor;
        let a2 = self.coupling_amp * self.coupling_amp;
        if 2.0 * q2 > 1.0 {
            a2 / (1.0 / q2 - 1.0 / (4.0 * q2 * q2))
        } else {
            a2
        }
    }
}

/// `alpha(f) = A f^2 / (f0^2 - f^2 + j f f0 / Q)`.
pub fn lorentzian_response(elem: &MetaElement, f: f64) -> Result<Complex64> {
    if !f.is_finite() || f <= 0.0 {
        return Err(Error::Domain(format!(
            "frequency must be finite and positive, got {f}"
        )));
    }
    Ok(lorentzian_unchecked(elem, f))
}

#[inline]
pub(crate) fn lorentzian_unchecked(elem: &MetaElement, f: f64) -> Complex64 {
    let f0 = elem.resonance_freq;
    let denom = Complex64::new(f0 * f0 - f * f, f * f0 / elem.quality_factor);
    elem.coupling_amp * f * f / denom
}

/// Fraction of incident guided power the element radiates at `f`: `|alpha(f)|^2`.
pub fn radiated_fraction(elem: &MetaElement, f: f64) -> Result<f64> {
    Ok(lorentzian_response(elem, f)?.norm_sqr())
}

/// Guided-wave transmission past the element. Reflection is neglected, so
/// `|t|^2 = 1 - radiated_fraction` and `t` is taken real and non-negative.
pub fn transmission(elem: &MetaElement, f: f64) -> Result<f64> {
    Ok(transmission_from_alpha(lorentzian_response(elem, f)?))
}

#[inline]
pub(crate) fn transmission_from_alpha(alpha: Complex64) -> f64 {
    (1.0 - alpha.norm_sqr()).max(0.0).sqrt()
}
