//! Frequency and angle sampling grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform frequency sweep, inclusive of both endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FrequencyGridSpec", into = "FrequencyGridSpec")]
pub struct FrequencyGrid {
    f_min: f64,
    f_max: f64,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyGridSpec {
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub count: usize,
}

impl FrequencyGrid {
    /// Builds `count` uniformly spaced points over `[f_min, f_max]`.
    ///
    /// A single point is allowed for degenerate sweeps; it sits at `f_min`.
    pub fn new(f_min: f64, f_max: f64, count: usize) -> Result<Self> {
        if !(f_min.is_finite() && f_max.is_finite()) || f_min <= 0.0 {
            return Err(Error::Domain(format!(
                "frequency bounds must be finite and positive, got [{f_min}, {f_max}]"
            )));
        }
        if count == 0 {
            return Err(Error::Domain("frequency grid needs at least one point".into()));
        }
        if count >= 2 && f_max <= f_min {
            return Err(Error::Domain(format!(
                "f_max ({f_max}) must exceed f_min ({f_min})"
            )));
        }
        let values = if count == 1 {
            vec![f_min]
        } else {
            let step = (f_max - f_min) / (count - 1) as f64;
            (0..count)
                .map(|i| if i == count - 1 { f_max } else { f_min + step * i as f64 })
                .collect()
        };
        Ok(Self { f_min, f_max, values })
    }

    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    pub fn f_max(&self) -> f64 {
        self.f_max
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bandwidth(&self) -> f64 {
        self.f_max - self.f_min
    }

    pub fn spec(&self) -> FrequencyGridSpec {
        FrequencyGridSpec {
            f_min_hz: self.f_min,
            f_max_hz: self.f_max,
            count: self.values.len(),
        }
    }

    /// Index of the grid point matching `freq` to within a small fraction of the spacing.
    pub fn index_of(&self, freq: f64) -> Option<usize> {
        let n = self.values.len();
        if n == 1 {
            let tol = 1e-9 * self.f_min.abs().max(1.0);
            return ((freq - self.f_min).abs() <= tol).then_some(0);
        }
        let step = (self.f_max - self.f_min) / (n - 1) as f64;
        let pos = (freq - self.f_min) / step;
        let idx = pos.round();
        if idx < 0.0 || idx >= n as f64 || (pos - idx).abs() > 1e-6 {
            return None;
        }
        Some(idx as usize)
    }
}

impl TryFrom<FrequencyGridSpec> for FrequencyGrid {
    type Error = Error;

    fn try_from(spec: FrequencyGridSpec) -> Result<Self> {
        FrequencyGrid::new(spec.f_min_hz, spec.f_max_hz, spec.count)
    }
}

impl From<FrequencyGrid> for FrequencyGridSpec {
    fn from(grid: FrequencyGrid) -> Self {
        grid.spec()
    }
}

/// Azimuth bins covering the full horizon. Bin `j` is centred on `j * step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AngleGridRepr", into = "AngleGridRepr")]
pub struct AngleGrid {
    step_deg: f64,
    values_deg: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct AngleGridRepr {
    values_deg: Vec<f64>,
}

impl AngleGrid {
    pub fn new(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Domain("angle grid needs at least one bin".into()));
        }
        let step_deg = 360.0 / count as f64;
        let values_deg = (0..count).map(|j| step_deg * j as f64).collect();
        Ok(Self { step_deg, values_deg })
    }

    /// Grid built from arbitrary bin centres, e.g. after a permutation.
    /// The step is still `360 / len`.
    pub fn from_values(values_deg: Vec<f64>) -> Result<Self> {
        if values_deg.is_empty() {
            return Err(Error::Domain("angle grid needs at least one bin".into()));
        }
        if values_deg.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("angle values must be finite".into()));
        }
        Ok(Self {
            step_deg: 360.0 / values_deg.len() as f64,
            values_deg,
        })
    }

    pub fn len(&self) -> usize {
        self.values_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values_deg.is_empty()
    }

    pub fn step_deg(&self) -> f64 {
        self.step_deg
    }

    pub fn values_deg(&self) -> &[f64] {
        &self.values_deg
    }

    pub fn radians(&self, j: usize) -> f64 {
        self.values_deg[j].to_radians()
    }

    /// Bin whose centre matches `angle_deg` (mod 360) to within a millidegree.
    pub fn index_of(&self, angle_deg: f64) -> Option<usize> {
        let wrapped = angle_deg.rem_euclid(360.0);
        self.values_deg.iter().position(|&v| {
            let d = (v.rem_euclid(360.0) - wrapped).abs();
            d.min(360.0 - d) < 1e-3
        })
    }

    /// Circular distance between two angles, expressed in bins of this grid.
    pub fn circular_bin_error(&self, a_deg: f64, b_deg: f64) -> f64 {
        circular_bin_error(a_deg, b_deg, self.step_deg)
    }
}

impl TryFrom<AngleGridRepr> for AngleGrid {
    type Error = Error;

    fn try_from(repr: AngleGridRepr) -> Result<Self> {
        AngleGrid::from_values(repr.values_deg)
    }
}

impl From<AngleGrid> for AngleGridRepr {
    fn from(grid: AngleGrid) -> Self {
        AngleGridRepr {
            values_deg: grid.values_deg,
        }
    }
}

/// `min(|a - b|, 360 - |a - b|) / step`, with both angles wrapped to `[0, 360)`.
pub fn circular_bin_error(a_deg: f64, b_deg: f64, step_deg: f64) -> f64 {
    let d = (a_deg.rem_euclid(360.0) - b_deg.rem_euclid(360.0)).abs();
    d.min(360.0 - d) / step_deg
}
