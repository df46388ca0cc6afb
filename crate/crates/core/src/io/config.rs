//! TOML experiment configuration. Every key is optional except inside tables that are given
//! explicitly; unknown keys are rejected.
//!
//! ```toml
//! rng_seed = 1
//! ref_distance_m = 0.16
//! angle_count = 72
//! noise_on_ports = false
//!
//! [layout]
//! radius_m = 0.045
//! elements_per_aperture = 17
//!
//! [layout.gain]
//! shadow_floor = 0.3
//!
//! [frequency]
//! f_min_hz = 8.5e9
//! f_max_hz = 11.5e9
//! count = 301
//!
//! [solver]
//! tol = 1e-8
//!
//! [[apertures]]          # optional: replaces the generated layout of one port
//! port_id = 1
//! [[apertures.elements]]
//! f0_hz = 9.1e9
//! q = 40.0
//! azimuth_deg = 30.0
//! radiated_fraction = 0.35   # or coupling_amp
//! side = "before"
//!
//! [sweep]
//! distances_m = [0.21, 0.26, 0.335]
//! snr_db = [inf, 20.0]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_text, write_text};
use crate::error::{Error, Result};
use crate::estimator::SolverSettings;
use crate::forward::{ApertureConfig, FeedSide, LayoutParams, MetaElement, PortId, SourceSpec};
use crate::grid::{AngleGrid, FrequencyGrid, FrequencyGridSpec};
use crate::sweep::SweepSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    pub f0_hz: f64,
    pub q: f64,
    pub azimuth_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radiated_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_amp: Option<f64>,
    pub side: FeedSide,
}

impl ElementSpec {
    fn to_element(self) -> std::result::Result<MetaElement, String> {
        let azimuth = self.azimuth_deg.to_radians();
        let elem = match (self.radiated_fraction, self.coupling_amp) {
            (Some(p), None) => MetaElement::calibrated(self.f0_hz, self.q, p, azimuth, self.side),
            (None, Some(a)) => {
                let e = MetaElement {
                    resonance_freq: self.f0_hz,
                    quality_factor: self.q,
                    coupling_amp: a,
                    azimuth,
                    side: self.side,
                };
                e.validate().map(|_| e)
            }
            _ => return Err("give exactly one of `radiated_fraction` and `coupling_amp`".into()),
        };
        elem.map_err(|e| e.to_string())
    }

    pub fn from_element(e: &MetaElement) -> Self {
        Self {
            f0_hz: e.resonance_freq,
            q: e.quality_factor,
            azimuth_deg: e.azimuth.to_degrees(),
            radiated_fraction: None,
            coupling_amp: Some(e.coupling_amp),
            side: e.side,
        }
    }
}

/// Explicit element list for one port.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApertureSpec {
    pub port_id: PortId,
    pub elements: Vec<ElementSpec>,
}

impl ApertureSpec {
    pub fn from_aperture(ap: &ApertureConfig) -> Self {
        Self {
            port_id: ap.port_id(),
            elements: ap.elements().iter().map(ElementSpec::from_element).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Seeds the random element layout.
    pub rng_seed: u64,
    /// Distance at which the sensing matrix is characterised, metres.
    pub ref_distance_m: f64,
    /// Uniform azimuth bins over the full circle.
    pub angle_count: usize,
    /// Add noise to each port before correlation instead of to the correlated vector.
    pub noise_on_ports: bool,
    pub layout: LayoutParams,
    pub frequency: FrequencyGridSpec,
    pub solver: SolverSettings,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub apertures: Vec<ApertureSpec>,
    pub sweep: SweepSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            rng_seed: 1,
            ref_distance_m: 0.16,
            angle_count: 72,
            noise_on_ports: false,
            layout: LayoutParams::default(),
            frequency: FrequencyGridSpec {
                f_min_hz: 8.5e9,
                f_max_hz: 11.5e9,
                count: 301,
            },
            solver: SolverSettings::default(),
            apertures: Vec::new(),
            sweep: SweepSpec::default(),
        }
    }
}

fn prefixed(prefix: &str, e: Error) -> Error {
    match e {
        Error::Config { key, message } => Error::config(format!("{prefix}.{key}"), message),
        other => Error::config(prefix, other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.layout.validate().map_err(|e| prefixed("layout", e))?;
        self.layout
            .gain
            .validate()
            .map_err(|e| Error::config("layout.gain", e.to_string()))?;
        if self.angle_count == 0 {
            return Err(Error::config("angle_count", "must be at least 1"));
        }
        if !(self.ref_distance_m > self.layout.radius_m && self.ref_distance_m.is_finite()) {
            return Err(Error::config(
                "ref_distance_m",
                format!(
                    "must exceed the cylinder radius {} m, got {}",
                    self.layout.radius_m, self.ref_distance_m
                ),
            ));
        }
        let freqs = self.frequency_grid()?;
        let cutoff = self.cutoff_freq();
        if freqs.f_min() <= cutoff {
            return Err(Error::config(
                "frequency.f_min_hz",
                format!("{} Hz is at or below the guided-mode cutoff {cutoff} Hz", freqs.f_min()),
            ));
        }
        self.solver.validate()?;
        self.sweep.validate()?;
        for (i, b) in self.sweep.bands.iter().enumerate() {
            if b.f_min_hz <= cutoff {
                return Err(Error::config(
                    format!("sweep.bands[{i}].f_min_hz"),
                    format!("{} Hz is at or below the guided-mode cutoff {cutoff} Hz", b.f_min_hz),
                ));
            }
        }
        for (i, &d) in self.sweep.distances_m.iter().enumerate() {
            if d <= self.layout.radius_m {
                return Err(Error::config(
                    format!("sweep.distances_m[{i}]"),
                    format!("{d} m is inside the cylinder"),
                ));
            }
        }
        let mut ports = Vec::new();
        for (i, ap) in self.apertures.iter().enumerate() {
            if ports.contains(&ap.port_id) {
                return Err(Error::config(
                    format!("apertures[{i}].port_id"),
                    format!("port {} is given twice", ap.port_id.number()),
                ));
            }
            ports.push(ap.port_id);
            for (k, e) in ap.elements.iter().enumerate() {
                e.to_element()
                    .map_err(|m| Error::config(format!("apertures[{i}].elements[{k}]"), m))?;
            }
        }
        Ok(())
    }

    /// `c / (2 w sqrt(eps_r))` for the configured waveguide.
    pub fn cutoff_freq(&self) -> f64 {
        crate::SPEED_OF_LIGHT / (2.0 * self.layout.siw_width_m * self.layout.rel_permittivity.sqrt())
    }

    pub fn frequency_grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::try_from(self.frequency).map_err(|e| Error::config("frequency", e.to_string()))
    }

    pub fn angle_grid(&self) -> Result<AngleGrid> {
        AngleGrid::new(self.angle_count).map_err(|e| Error::config("angle_count", e.to_string()))
    }

    /// Generated layout for both ports, with any explicit `[[apertures]]` substituted.
    pub fn build_apertures(&self) -> Result<(ApertureConfig, ApertureConfig)> {
        let (mut a1, mut a2) = self.layout.generate_pair(self.rng_seed)?;
        for (i, spec) in self.apertures.iter().enumerate() {
            let elements = spec
                .elements
                .iter()
                .enumerate()
                .map(|(k, e)| {
                    e.to_element()
                        .map_err(|m| Error::config(format!("apertures[{i}].elements[{k}]"), m))
                })
                .collect::<Result<Vec<_>>>()?;
            let target = match spec.port_id {
                PortId::One => &mut a1,
                PortId::Two => &mut a2,
            };
            *target = target
                .with_elements(elements)
                .map_err(|e| Error::config(format!("apertures[{i}]"), e.to_string()))?;
        }
        Ok((a1, a2))
    }

    pub fn source(&self, angle_deg: f64, distance_m: f64) -> Result<SourceSpec> {
        let s = SourceSpec::new(angle_deg, distance_m);
        if !(angle_deg.is_finite() && distance_m > self.layout.radius_m && distance_m.is_finite()) {
            return Err(Error::config(
                "source",
                format!("angle {angle_deg} deg at {distance_m} m is not a valid source position"),
            ));
        }
        Ok(s)
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Dotted key path of the item at `offset`: the enclosing `[table]` plus the key on that line.
fn key_path_at(text: &str, offset: usize) -> String {
    let offset = offset.min(text.len());
    let line_start = text[..offset].rfind('\n').map_or(0, |i| i + 1);
    let line_end = text[offset..].find('\n').map_or(text.len(), |i| offset + i);
    let line = text[line_start..line_end].trim();
    let header = |l: &str| {
        l.trim_start_matches('[')
            .split(']')
            .next()
            .unwrap_or("")
            .trim()
            .to_string()
    };
    if line.starts_with('[') {
        return header(line);
    }
    let table = text[..line_start]
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| l.starts_with('['))
        .map(header)
        .unwrap_or_default();
    let key = line.split('=').next().unwrap_or("").trim().trim_matches('"');
    match (table.is_empty(), key.is_empty()) {
        (true, _) => key.to_string(),
        (false, true) => table,
        (false, false) => format!("{table}.{key}"),
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    if let Err(e) = text.parse::<toml::Table>() {
        let line = e.span().map(|s| line_of_offset(text, s.start));
        return Err(Error::parse(line, e.message().to_string()));
    }
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let key = e
            .span()
            .map(|s| key_path_at(text, s.start))
            .filter(|k| !k.is_empty())
            .unwrap_or_else(|| "<root>".to_string());
        Error::config(key, e.message().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn dump_config(cfg: &ExperimentConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::config("<root>", e.to_string()))
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config(&read_text(path)?).map_err(|e| e.with_path(path))
}

pub fn save_config(path: &Path, cfg: &ExperimentConfig) -> Result<()> {
    write_text(path, &dump_config(cfg)?)
}
