//! Cross-correlation sensing matrix and measurement vectors.
//!
//! Row `i` of the sensing matrix is frequency `i`, column `j` is reference angle `j`, and each
//! entry is `V1 * conj(V2)` so that any phase common to both ports cancels.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{pattern_sweep, received_signal, ApertureConfig, SourceSpec};
use crate::grid::{AngleGrid, FrequencyGrid};
use crate::rng;

/// Complex `M x N` sensing matrix with its grids and reference distance.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    entries: Array2<Complex64>,
    freqs: FrequencyGrid,
    angles: AngleGrid,
    ref_distance: f64,
}

impl SensingMatrix {
    pub fn new(
        entries: Array2<Complex64>,
        freqs: FrequencyGrid,
        angles: AngleGrid,
        ref_distance: f64,
    ) -> Result<Self> {
        if entries.dim() != (freqs.len(), angles.len()) {
            return Err(Error::Shape(format!(
                "matrix is {:?} but grids are {} x {}",
                entries.dim(),
                freqs.len(),
                angles.len()
            )));
        }
        if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Domain("sensing matrix has non-finite entries".into()));
        }
        Ok(Self {
            entries,
            freqs,
            angles,
            ref_distance,
        })
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn freqs(&self) -> &FrequencyGrid {
        &self.freqs
    }

    pub fn angles(&self) -> &AngleGrid {
        &self.angles
    }

    pub fn ref_distance(&self) -> f64 {
        self.ref_distance
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.entries.column(j).to_vec()
    }

    /// Reorders columns (and the angle grid with them): new column `k` is old column `perm[k]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        let n = self.cols();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Shape("not a permutation of the columns".into()));
        }
        let entries = Array2::from_shape_fn((self.rows(), n), |(i, k)| self.entries[[i, perm[k]]]);
        let values = perm.iter().map(|&p| self.angles.values_deg()[p]).collect();
        Self::new(
            entries,
            self.freqs.clone(),
            AngleGrid::from_values(values)?,
            self.ref_distance,
        )
    }
}

/// Noise realisation recorded alongside a measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

/// Length-`M` cross-correlated measurement of one source.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector {
    pub entries: Vec<Complex64>,
    pub freqs: FrequencyGrid,
    pub truth: Option<SourceSpec>,
    pub noise: Option<NoiseSpec>,
}

impl MeasurementVector {
    pub fn new(entries: Vec<Complex64>, freqs: FrequencyGrid) -> Result<Self> {
        if entries.len() != freqs.len() {
            return Err(Error::Shape(format!(
                "vector has {} entries but the frequency grid has {}",
                entries.len(),
                freqs.len()
            )));
        }
        Ok(Self {
            entries,
            freqs,
            truth: None,
            noise: None,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        mean_power(&self.entries)
    }

    /// Multiplies every entry by `c`, keeping metadata.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z * c).collect(),
            ..self.clone()
        }
    }
}

#[inline]
pub fn cross_correlate(v1: Complex64, v2: Complex64) -> Complex64 {
    v1 * v2.conj()
}

/// `H(i, j) = p1(i, j) * conj(p2(i, j))`.
pub fn build_sensing_matrix(
    p1: &Array2<Complex64>,
    p2: &Array2<Complex64>,
    freqs: &FrequencyGrid,
    angles: &AngleGrid,
    ref_distance: f64,
) -> Result<SensingMatrix> {
    let expected = (freqs.len(), angles.len());
    if p1.dim() != expected || p2.dim() != expected {
        return Err(Error::Shape(format!(
            "patterns are {:?} and {:?}, grids require {:?}",
            p1.dim(),
            p2.dim(),
            expected
        )));
    }
    let mut entries = p1.clone();
    entries.zip_mut_with(p2, |a, &b| *a = cross_correlate(*a, b));
    SensingMatrix::new(entries, freqs.clone(), angles.clone(), ref_distance)
}

/// Sweeps both apertures at `ref_distance` and correlates them.
pub fn simulate_sensing_matrix(
    apertures: (&ApertureConfig, &ApertureConfig),
    freqs: &FrequencyGrid,
    angles: &AngleGrid,
    ref_distance: f64,
) -> Result<SensingMatrix> {
    let p1 = pattern_sweep(apertures.0, angles, freqs, ref_distance)?;
    let p2 = pattern_sweep(apertures.1, angles, freqs, ref_distance)?;
    build_sensing_matrix(&p1, &p2, freqs, angles, ref_distance)
}

/// Noiseless cross-correlated measurement `V1(f_i) conj(V2(f_i))` for one source.
pub fn measure(
    source: &SourceSpec,
    freqs: &FrequencyGrid,
    apertures: (&ApertureConfig, &ApertureConfig),
) -> Result<MeasurementVector> {
    let entries = freqs
        .values()
        .iter()
        .map(|&f| {
            Ok(cross_correlate(
                received_signal(apertures.0, source, f)?,
                received_signal(apertures.1, source, f)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut g = MeasurementVector::new(entries, freqs.clone())?;
    g.truth = Some(*source);
    Ok(g)
}

fn mean_power(v: &[Complex64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64
}

fn noise_sigma(signal_power: f64, snr_db: f64) -> f64 {
    // per real component
    (signal_power / 10f64.powf(snr_db / 10.0) / 2.0).sqrt()
}

fn add_awgn<R: Rng>(v: &mut [Complex64], snr_db: f64, rng: &mut R) {
    let sigma = noise_sigma(mean_power(v), snr_db);
    for z in v.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z += Complex64::new(sigma * re, sigma * im);
    }
}

/// Adds circular complex Gaussian noise with average power `mean(|g|^2) / 10^(snr_db / 10)`.
pub fn add_noise(g: &MeasurementVector, snr_db: f64, seed: u64) -> Result<MeasurementVector> {
    if g.is_empty() {
        return Err(Error::Degenerate("cannot add noise to an empty vector".into()));
    }
    if snr_db.is_nan() {
        return Err(Error::Domain("snr_db must not be NaN".into()));
    }
    let mut out = g.clone();
    add_awgn(&mut out.entries, snr_db, &mut rng::stream(seed, &[]));
    out.noise = Some(NoiseSpec { snr_db, seed });
    Ok(out)
}

/// Measurement with independent noise on each port before correlation, as for sequential
/// switched acquisitions. SNR is referenced to each port's mean power over the sweep.
pub fn measure_with_port_noise(
    source: &SourceSpec,
    freqs: &FrequencyGrid,
    apertures: (&ApertureConfig, &ApertureConfig),
    snr_db: f64,
    seed: u64,
) -> Result<MeasurementVector> {
    let voltages = |ap: &ApertureConfig| {
        freqs
            .values()
            .iter()
            .map(|&f| received_signal(ap, source, f))
            .collect::<Result<Vec<_>>>()
    };
    let (v1, v2) = (voltages(apertures.0)?, voltages(apertures.1)?);
    let g = correlate_with_port_noise(&v1, &v2, snr_db, seed);
    let mut out = MeasurementVector::new(g, freqs.clone())?;
    out.truth = Some(*source);
    out.noise = Some(NoiseSpec { snr_db, seed });
    Ok(out)
}

pub(crate) fn correlate_with_port_noise(
    v1: &[Complex64],
    v2: &[Complex64],
    snr_db: f64,
    seed: u64,
) -> Vec<Complex64> {
    let mut rng = rng::stream(seed, &[]);
    let (mut v1, mut v2) = (v1.to_vec(), v2.to_vec());
    add_awgn(&mut v1, snr_db, &mut rng);
    add_awgn(&mut v2, snr_db, &mut rng);
    v1.iter().zip(&v2).map(|(&a, &b)| cross_correlate(a, b)).collect()
}

/// Noise added in place with an explicit RNG; used by the sweep engine.
pub(crate) fn add_noise_in_place<R: Rng>(v: &mut [Complex64], snr_db: f64, rng: &mut R) {
    add_awgn(v, snr_db, rng)
}
