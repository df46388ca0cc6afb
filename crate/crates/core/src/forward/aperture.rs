use std::f64::consts::{FRAC_PI_2, PI};

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::element::{lorentzian_unchecked, transmission_from_alpha, FeedSide, MetaElement};
use crate::error::{Error, Result};
use crate::grid::{AngleGrid, FrequencyGrid};
use crate::SPEED_OF_LIGHT;

/// Which of the two coaxial ports an aperture is connected to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum PortId {
    One,
    Two,
}

impl PortId {
    pub fn number(self) -> u8 {
        match self {
            PortId::One => 1,
            PortId::Two => 2,
        }
    }
}

impl TryFrom<u8> for PortId {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(PortId::One),
            2 => Ok(PortId::Two),
            other => Err(Error::Domain(format!("port id must be 1 or 2, got {other}"))),
        }
    }
}

impl From<PortId> for u8 {
    fn from(p: PortId) -> u8 {
        p.number()
    }
}

/// Embedded element pattern on the cylinder.
///
/// In the lit half-space (`psi < pi/2`) the gain is `max(cos(psi)^exponent, shadow_floor)`.
/// Behind the shadow boundary it decays as `shadow_floor * exp(-shadow_decay * (psi - pi/2))`,
/// a creeping-wave term. With `shadow_floor = 0` elements facing away contribute exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GainModel {
    pub exponent: f64,
    pub shadow_floor: f64,
    /// Per radian past the shadow boundary.
    pub shadow_decay: f64,
}

impl GainModel {
    /// Pure `max(0, cos psi)^exponent` clamp.
    pub fn hard_shadow(exponent: f64) -> Self {
        Self {
            exponent,
            shadow_floor: 0.0,
            shadow_decay: 0.0,
        }
    }

    pub fn gain(&self, psi: f64) -> f64 {
        if psi < FRAC_PI_2 {
            psi.cos().max(0.0).powf(self.exponent).max(self.shadow_floor)
        } else if self.shadow_floor == 0.0 {
            0.0
        } else {
            self.shadow_floor * (-self.shadow_decay * (psi - FRAC_PI_2)).exp()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.exponent > 0.0 && self.exponent.is_finite()) {
            return Err(Error::Domain(format!(
                "gain exponent must be positive, got {}",
                self.exponent
            )));
        }
        if !(0.0..1.0).contains(&self.shadow_floor) {
            return Err(Error::Domain(format!(
                "shadow floor must lie in [0, 1), got {}",
                self.shadow_floor
            )));
        }
        if !(self.shadow_decay >= 0.0 && self.shadow_decay.is_finite()) {
            return Err(Error::Domain(format!(
                "shadow decay must be non-negative, got {}",
                self.shadow_decay
            )));
        }
        Ok(())
    }
}

impl Default for GainModel {
    fn default() -> Self {
        Self {
            exponent: 1.0,
            shadow_floor: 0.3,
            shadow_decay: 0.5,
        }
    }
}

/// Physical parameters of one semicircular guided-wave aperture.
#[derive(Debug, Clone, PartialEq)]
pub struct ApertureGeometry {
    pub port_id: PortId,
    /// Metres.
    pub radius: f64,
    /// Metres.
    pub siw_width: f64,
    pub rel_permittivity: f64,
    /// Radians.
    pub feed_azimuth: f64,
    /// Covered azimuth interval `[start, end]`, radians, `start < end`.
    pub arc_span: (f64, f64),
    pub gain: GainModel,
}

/// One conformal aperture: geometry plus its elements, ordered by feed side and then by
/// arc length from the feed.
#[derive(Debug, Clone, PartialEq)]
pub struct ApertureConfig {
    geometry: ApertureGeometry,
    elements: Vec<MetaElement>,
    /// `(side, arc length)` per element, same order as `elements`.
    arc_lengths: Vec<f64>,
    positions: Vec<(f64, f64)>,
}

impl ApertureConfig {
    /// Validates the geometry and sorts the elements into feed order.
    pub fn new(geometry: ApertureGeometry, mut elements: Vec<MetaElement>) -> Result<Self> {
        let g = &geometry;
        for (name, v) in [
            ("radius", g.radius),
            ("siw_width", g.siw_width),
            ("rel_permittivity", g.rel_permittivity),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        let (start, end) = g.arc_span;
        if !(start.is_finite() && end.is_finite() && start < end && end - start <= 2.0 * PI + 1e-12)
        {
            return Err(Error::Domain(format!(
                "arc span [{start}, {end}] must be increasing and at most a full turn"
            )));
        }
        if !(start..=end).contains(&g.feed_azimuth) {
            return Err(Error::Domain(format!(
                "feed azimuth {} lies outside the arc span",
                g.feed_azimuth
            )));
        }
        g.gain.validate()?;
        for (i, e) in elements.iter().enumerate() {
            e.validate()?;
            if !(start..=end).contains(&e.azimuth) {
                return Err(Error::Domain(format!(
                    "element {i} azimuth {:.6} rad lies outside the arc span [{start:.6}, {end:.6}]",
                    e.azimuth
                )));
            }
            let consistent = match e.side {
                FeedSide::Before => e.azimuth <= g.feed_azimuth,
                FeedSide::After => e.azimuth >= g.feed_azimuth,
            };
            if !consistent {
                return Err(Error::Domain(format!(
                    "element {i} at {:.6} rad is on the wrong side of the feed",
                    e.azimuth
                )));
            }
        }
        let feed = g.feed_azimuth;
        elements.sort_by(|a, b| {
            a.side
                .cmp(&b.side)
                .then((a.azimuth - feed).abs().total_cmp(&(b.azimuth - feed).abs()))
        });
        let arc_lengths = elements
            .iter()
            .map(|e| g.radius * (e.azimuth - feed).abs())
            .collect();
        let positions = elements
            .iter()
            .map(|e| (g.radius * e.azimuth.cos(), g.radius * e.azimuth.sin()))
            .collect();
        Ok(Self {
            geometry,
            elements,
            arc_lengths,
            positions,
        })
    }

    pub fn geometry(&self) -> &ApertureGeometry {
        &self.geometry
    }

    pub fn port_id(&self) -> PortId {
        self.geometry.port_id
    }

    pub fn radius(&self) -> f64 {
        self.geometry.radius
    }

    pub fn elements(&self) -> &[MetaElement] {
        &self.elements
    }

    /// Arc length from the feed to element `index`, metres.
    pub fn arc_length(&self, index: usize) -> Result<f64> {
        self.arc_lengths.get(index).copied().ok_or(Error::Index {
            index,
            len: self.elements.len(),
        })
    }

    /// Cartesian position of element `index` on the cross-section, metres.
    pub fn position(&self, index: usize) -> Result<(f64, f64)> {
        self.positions.get(index).copied().ok_or(Error::Index {
            index,
            len: self.elements.len(),
        })
    }

    /// TE10 cutoff `c / (2 w sqrt(eps_r))`.
    pub fn cutoff_freq(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.geometry.siw_width * self.geometry.rel_permittivity.sqrt())
    }

    /// Replaces the elements, keeping the geometry.
    pub fn with_elements(&self, elements: Vec<MetaElement>) -> Result<Self> {
        Self::new(self.geometry.clone(), elements)
    }
}

/// Transmit probe location and excitation.
///
/// The azimuth is kept in degrees, the unit used by every file format, so that a source
/// read back from disk is bit-identical to the one written.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub angle_deg: f64,
    /// Metres from the cylinder axis.
    pub distance: f64,
    pub amplitude: Complex64,
}

impl SourceSpec {
    pub fn new(angle_deg: f64, distance: f64) -> Self {
        Self {
            angle_deg,
            distance,
            amplitude: Complex64::new(1.0, 0.0),
        }
    }

    pub fn with_amplitude(self, amplitude: Complex64) -> Self {
        Self { amplitude, ..self }
    }

    /// Azimuth in radians.
    pub fn angle(&self) -> f64 {
        self.angle_deg.to_radians()
    }

    pub fn position(&self) -> (f64, f64) {
        let a = self.angle();
        (self.distance * a.cos(), self.distance * a.sin())
    }

    pub(crate) fn validate_for(&self, aperture: &ApertureConfig) -> Result<()> {
        if !(self.angle_deg.is_finite() && self.distance.is_finite()) {
            return Err(Error::Domain("source angle and distance must be finite".into()));
        }
        if !(self.amplitude.re.is_finite() && self.amplitude.im.is_finite()) {
            return Err(Error::Domain("source amplitude must be finite".into()));
        }
        if self.distance <= aperture.radius() {
            return Err(Error::Domain(format!(
                "source distance {} m must exceed the aperture radius {} m",
                self.distance,
                aperture.radius()
            )));
        }
        Ok(())
    }
}

/// `beta_g = sqrt(eps_r k0^2 - (pi / w)^2)`, rad/m.
pub fn guided_wavenumber(aperture: &ApertureConfig, f: f64) -> Result<f64> {
    if !f.is_finite() {
        return Err(Error::Domain(format!("frequency must be finite, got {f}")));
    }
    let cutoff = aperture.cutoff_freq();
    if f <= cutoff {
        return Err(Error::BelowCutoff {
            freq_hz: f,
            cutoff_hz: cutoff,
        });
    }
    let g = aperture.geometry();
    let k0 = 2.0 * PI * f / SPEED_OF_LIGHT;
    let kc = PI / g.siw_width;
    Ok((g.rel_permittivity * k0 * k0 - kc * kc).max(0.0).sqrt())
}

/// Guided-wave amplitude reaching element `elem_index` at `f`: propagation phase times the
/// depletion by every element between it and the feed on the same side.
pub fn guided_amplitude(aperture: &ApertureConfig, elem_index: usize, f: f64) -> Result<Complex64> {
    let n = aperture.elements().len();
    if elem_index >= n {
        return Err(Error::Index {
            index: elem_index,
            len: n,
        });
    }
    let beta = guided_wavenumber(aperture, f)?;
    let target = &aperture.elements()[elem_index];
    let depletion: f64 = aperture.elements()[..elem_index]
        .iter()
        .filter(|e| e.side == target.side)
        .map(|e| transmission_from_alpha(lorentzian_unchecked(e, f)))
        .product();
    let phase = -beta * aperture.arc_lengths[elem_index];
    Ok(Complex64::from_polar(depletion, phase))
}

/// Element gain toward the source, using the angle `psi` between the element's outward normal
/// and the element-to-source direction.
pub fn element_gain(elem: &MetaElement, aperture: &ApertureConfig, source: &SourceSpec) -> f64 {
    let r = aperture.radius();
    let (px, py) = (r * elem.azimuth.cos(), r * elem.azimuth.sin());
    gain_at(elem.azimuth, (px, py), &aperture.geometry().gain, source).0
}

/// Returns `(gain, distance)` from the element at `pos` to the source.
fn gain_at(azimuth: f64, pos: (f64, f64), model: &GainModel, source: &SourceSpec) -> (f64, f64) {
    let (sx, sy) = source.position();
    let (vx, vy) = (sx - pos.0, sy - pos.1);
    let dist = vx.hypot(vy);
    let cos_psi = ((azimuth.cos() * vx + azimuth.sin() * vy) / dist).clamp(-1.0, 1.0);
    (model.gain(cos_psi.acos()), dist)
}

/// Frequency-dependent, angle-independent factors `G_n(f) * alpha_n(f)` for every element.
struct FrequencyTerms {
    k: f64,
    drive: Vec<Complex64>,
}

fn frequency_terms(aperture: &ApertureConfig, f: f64) -> Result<FrequencyTerms> {
    let beta = guided_wavenumber(aperture, f)?;
    let mut drive = Vec::with_capacity(aperture.elements.len());
    let mut depletion = [1.0f64, 1.0f64];
    for (e, &s) in aperture.elements.iter().zip(&aperture.arc_lengths) {
        let slot = match e.side {
            FeedSide::Before => 0,
            FeedSide::After => 1,
        };
        let alpha = lorentzian_unchecked(e, f);
        let guided = Complex64::from_polar(depletion[slot], -beta * s);
        drive.push(guided * alpha);
        depletion[slot] *= transmission_from_alpha(alpha);
    }
    Ok(FrequencyTerms {
        k: 2.0 * PI * f / SPEED_OF_LIGHT,
        drive,
    })
}

/// Angle-dependent, frequency-independent factors `(gain_n, r_n)`.
struct SourceTerms {
    amplitude: Complex64,
    paths: Vec<(f64, f64)>,
}

fn source_terms(aperture: &ApertureConfig, source: &SourceSpec) -> Result<SourceTerms> {
    source.validate_for(aperture)?;
    let model = &aperture.geometry().gain;
    let paths = aperture
        .elements
        .iter()
        .zip(&aperture.positions)
        .map(|(e, &pos)| gain_at(e.azimuth, pos, model, source))
        .collect();
    Ok(SourceTerms {
        amplitude: source.amplitude,
        paths,
    })
}

fn combine(freq: &FrequencyTerms, src: &SourceTerms) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (drive, &(gain, r)) in freq.drive.iter().zip(&src.paths) {
        if gain == 0.0 {
            continue;
        }
        acc += drive * Complex64::from_polar(gain / r, -freq.k * r);
    }
    src.amplitude * acc
}

/// Port voltage `V(f)` for a source, as the superposition of every element's contribution
/// `G_n alpha_n g_n exp(-j k r_n) / r_n`. Time convention `exp(+j w t)`.
pub fn received_signal(aperture: &ApertureConfig, source: &SourceSpec, f: f64) -> Result<Complex64> {
    let src = source_terms(aperture, source)?;
    let freq = frequency_terms(aperture, f)?;
    Ok(combine(&freq, &src))
}

/// Received signal at every (frequency, angle) cell. Rows are frequencies, columns angles.
pub fn pattern_sweep(
    aperture: &ApertureConfig,
    angles: &AngleGrid,
    freqs: &FrequencyGrid,
    distance: f64,
) -> Result<Array2<Complex64>> {
    if angles.is_empty() || freqs.is_empty() {
        return Err(Error::Shape("pattern sweep needs non-empty grids".into()));
    }
    let sources = (0..angles.len())
        .map(|j| source_terms(aperture, &SourceSpec::new(angles.values_deg()[j], distance)))
        .collect::<Result<Vec<_>>>()?;
    let rows = freqs
        .values()
        .par_iter()
        .map(|&f| {
            let terms = frequency_terms(aperture, f)?;
            Ok(sources.iter().map(|s| combine(&terms, s)).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
    Ok(Array2::from_shape_vec((freqs.len(), angles.len()), flat).expect("row lengths match grid"))
}
