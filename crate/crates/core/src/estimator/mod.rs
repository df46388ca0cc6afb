//! AoA inversion of `g = H f` and SVD diagnostics of `H`.

mod cgs;
mod svd;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use cgs::{cgs_solve, CgsOutcome, CgsStop};
pub use svd::singular_values;

use crate::error::{Error, Result};
use crate::grid::AngleGrid;
use crate::sensing::{MeasurementVector, SensingMatrix};

/// Iterative solver settings for the normal equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub tol: f64,
    /// Defaults to `min(N, 20)` when unset.
    pub max_iter: Option<usize>,
    /// Tikhonov weight added to the diagonal of `H^H H`.
    pub tikhonov: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: None,
            tikhonov: 0.0,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::config("solver.tol", format!("must be positive, got {}", self.tol)));
        }
        if self.max_iter == Some(0) {
            return Err(Error::config("solver.max_iter", "must be at least 1"));
        }
        if !(self.tikhonov >= 0.0 && self.tikhonov.is_finite()) {
            return Err(Error::config(
                "solver.tikhonov",
                format!("must be non-negative, got {}", self.tikhonov),
            ));
        }
        Ok(())
    }
}

/// Iteration cap used when none is configured. The early stop regularises the badly
/// conditioned normal equations.
pub fn default_max_iter(n: usize) -> usize {
    n.clamp(1, 20)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CgsNormalEq,
    MatchedFilter,
}

/// Complex estimate `f_est` over the angle bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoAProfile {
    pub values: Vec<Complex64>,
    pub angles: AngleGrid,
}

impl AoAProfile {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub bin_index: usize,
    pub angle_deg: f64,
    pub profile: AoAProfile,
    /// Relative residual of the solved system; zero for the matched filter.
    pub residual_norm: f64,
    pub iterations: usize,
    pub method: Method,
    pub stop: Option<CgsStop>,
}

/// Index of the largest magnitude; ties go to the smallest index.
pub fn argmax_magnitude(values: &[Complex64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, z) in values.iter().enumerate() {
        let m = z.norm();
        if m.is_nan() {
            continue;
        }
        match best {
            Some((_, bm)) if m <= bm => {}
            _ => best = Some((i, m)),
        }
    }
    best.map(|(i, _)| i)
}

fn check_measurement(h: &SensingMatrix, g: &MeasurementVector) -> Result<()> {
    if g.len() != h.rows() {
        return Err(Error::Shape(format!(
            "measurement has {} entries, sensing matrix has {} rows",
            g.len(),
            h.rows()
        )));
    }
    if g.entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Domain("measurement has non-finite entries".into()));
    }
    if g.entries.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::Degenerate(
            "measurement vector is all zero; no angle can be read out".into(),
        ));
    }
    Ok(())
}

/// `H^H v`
fn adjoint_apply(h: &Array2<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    h.columns()
        .into_iter()
        .map(|col| col.iter().zip(v).map(|(a, b)| a.conj() * b).sum())
        .collect()
}

fn readout(
    values: Vec<Complex64>,
    angles: &AngleGrid,
    residual_norm: f64,
    iterations: usize,
    method: Method,
    stop: Option<CgsStop>,
) -> Result<EstimationResult> {
    let bin_index = argmax_magnitude(&values)
        .ok_or_else(|| Error::Degenerate("estimate has no finite magnitude".into()))?;
    Ok(EstimationResult {
        bin_index,
        angle_deg: angles.values_deg()[bin_index],
        profile: AoAProfile {
            values,
            angles: angles.clone(),
        },
        residual_norm,
        iterations,
        method,
        stop,
    })
}

/// Normal-equations solver for one sensing matrix; caches `H^H H + lambda I` so that many
/// measurements can be inverted against the same matrix.
#[derive(Debug, Clone)]
pub struct NormalEquations<'a> {
    h: &'a SensingMatrix,
    gram: Array2<Complex64>,
    settings: SolverSettings,
}

impl<'a> NormalEquations<'a> {
    pub fn new(h: &'a SensingMatrix, settings: SolverSettings) -> Result<Self> {
        settings.validate()?;
        let e = h.entries();
        let n = h.cols();
        let cols: Vec<Vec<Complex64>> = (0..n).map(|j| e.column(j).to_vec()).collect();
        let mut gram = Array2::zeros((n, n));
        for a in 0..n {
            for b in a..n {
                let v: Complex64 = cols[a].iter().zip(&cols[b]).map(|(x, y)| x.conj() * y).sum();
                gram[[a, b]] = v;
                gram[[b, a]] = v.conj();
            }
            gram[[a, a]] += settings.tikhonov;
        }
        Ok(Self { h, gram, settings })
    }

    pub fn gram(&self) -> &Array2<Complex64> {
        &self.gram
    }

    pub fn estimate(&self, g: &MeasurementVector) -> Result<EstimationResult> {
        check_measurement(self.h, g)?;
        self.estimate_entries(&g.entries)
    }

    /// Same as [`estimate`](Self::estimate) on a raw vector that has already been checked
    /// for length.
    pub(crate) fn estimate_entries(&self, g: &[Complex64]) -> Result<EstimationResult> {
        // Unit-norm right-hand side keeps the iteration independent of the overall scale of g.
        let scale = cgs::norm(g);
        if scale == 0.0 {
            return Err(Error::Degenerate(
                "measurement vector is all zero; no angle can be read out".into(),
            ));
        }
        let unit: Vec<Complex64> = g.iter().map(|z| z / scale).collect();
        let rhs = adjoint_apply(self.h.entries(), &unit);
        let max_iter = self.settings.max_iter.unwrap_or(default_max_iter(self.h.cols()));
        let out = cgs_solve(&self.gram, &rhs, self.settings.tol, max_iter)?;
        let values = out.x.into_iter().map(|z| z * scale).collect();
        readout(
            values,
            self.h.angles(),
            out.residual,
            out.iterations,
            Method::CgsNormalEq,
            Some(out.stop),
        )
    }
}

/// Solves `(H^H H + lambda I) f = H^H g` with CGS and reads the angle off `argmax |f|`.
pub fn estimate_aoa(
    h: &SensingMatrix,
    g: &MeasurementVector,
    settings: SolverSettings,
) -> Result<EstimationResult> {
    NormalEquations::new(h, settings)?.estimate(g)
}

/// `f_est = H^H g` baseline.
pub fn matched_filter(h: &SensingMatrix, g: &MeasurementVector) -> Result<EstimationResult> {
    check_measurement(h, g)?;
    let values = adjoint_apply(h.entries(), &g.entries);
    readout(values, h.angles(), 0.0, 0, Method::MatchedFilter, None)
}

/// Singular values of `H` normalised by the largest one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdSpectrum {
    pub values: Vec<f64>,
}

impl SvdSpectrum {
    /// Number of normalised values at or above `threshold`.
    pub fn effective_rank(&self, threshold: f64) -> usize {
        self.values.iter().filter(|&&v| v >= threshold).count()
    }
}

pub fn svd_spectrum(h: &SensingMatrix) -> Result<SvdSpectrum> {
    normalized_singular_values(h.entries())
}

pub fn normalized_singular_values(a: &Array2<Complex64>) -> Result<SvdSpectrum> {
    if a.is_empty() {
        return Err(Error::Degenerate("matrix is empty".into()));
    }
    let sv = singular_values(a);
    let lead = sv[0];
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::Degenerate(
            "matrix is all zero; spectrum cannot be normalised".into(),
        ));
    }
    let mut values: Vec<f64> = sv.iter().map(|s| s / lead).collect();
    values[0] = 1.0;
    Ok(SvdSpectrum { values })
}
