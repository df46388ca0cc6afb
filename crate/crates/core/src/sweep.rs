//! Monte-Carlo campaigns over bands, source distances and SNRs.
//!
//! A cell is one `(band, distance, snr)` combination; a trial is one pass over every grid angle
//! at that cell. Trial `t` of cell `c` draws its noise from `derive_seed(master_seed, [c, t])`, so
//! the report does not depend on how the work is scheduled.

use std::fmt::Write as _;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{
    matched_filter, normalized_singular_values, CgsStop, Method, NormalEquations, SolverSettings,
    SvdSpectrum,
};
use crate::forward::{pattern_sweep, ApertureConfig};
use crate::grid::{AngleGrid, FrequencyGrid, FrequencyGridSpec};
use crate::rng;
use crate::sensing::{
    add_noise_in_place, build_sensing_matrix, correlate_with_port_noise, cross_correlate,
    MeasurementVector, SensingMatrix,
};

fn band(f_min_hz: f64, f_max_hz: f64, count: usize) -> FrequencyGridSpec {
    FrequencyGridSpec {
        f_min_hz,
        f_max_hz,
        count,
    }
}

/// The four band settings of the reference campaign, widest first.
pub fn reference_bands() -> Vec<FrequencyGridSpec> {
    vec![
        band(8.5e9, 11.5e9, 301),
        band(8.5e9, 11.5e9, 61),
        band(9.0e9, 11.0e9, 201),
        band(9.25e9, 10.75e9, 151),
    ]
}

pub const DEFAULT_MAX_ESTIMATIONS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub bands: Vec<FrequencyGridSpec>,
    pub distances_m: Vec<f64>,
    /// `inf` means noiseless.
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    /// Upper bound on `cells * trials * angles`.
    pub max_estimations: u64,
    pub method: Method,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            bands: reference_bands(),
            distances_m: vec![0.21, 0.26, 0.335],
            snr_db: vec![f64::INFINITY],
            trials: 1,
            master_seed: 1,
            max_estimations: DEFAULT_MAX_ESTIMATIONS,
            method: Method::CgsNormalEq,
        }
    }
}

impl SweepSpec {
    pub fn cell_count(&self) -> usize {
        self.bands.len() * self.distances_m.len() * self.snr_db.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("sweep.trials", "must be at least 1"));
        }
        for (key, empty) in [
            ("sweep.bands", self.bands.is_empty()),
            ("sweep.distances_m", self.distances_m.is_empty()),
            ("sweep.snr_db", self.snr_db.is_empty()),
        ] {
            if empty {
                return Err(Error::config(key, "must not be empty"));
            }
        }
        for (i, b) in self.bands.iter().enumerate() {
            FrequencyGrid::try_from(*b)
                .map_err(|e| Error::config(format!("sweep.bands[{i}]"), e.to_string()))?;
        }
        for (i, &d) in self.distances_m.iter().enumerate() {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::config(
                    format!("sweep.distances_m[{i}]"),
                    format!("must be positive, got {d}"),
                ));
            }
        }
        for (i, &s) in self.snr_db.iter().enumerate() {
            if s.is_nan() || s == f64::NEG_INFINITY {
                return Err(Error::config(
                    format!("sweep.snr_db[{i}]"),
                    format!("must be a number or inf, got {s}"),
                ));
            }
        }
        Ok(())
    }

    /// `(band, distance, snr)` indices of a cell, in canonical order.
    pub fn cell_indices(&self, cell: usize) -> (usize, usize, usize) {
        let ns = self.snr_db.len();
        let nd = self.distances_m.len();
        (cell / (nd * ns), (cell / ns) % nd, cell % ns)
    }
}

/// Everything a sweep needs besides the spec.
#[derive(Debug, Clone, Copy)]
pub struct SweepSetup<'a> {
    pub apertures: (&'a ApertureConfig, &'a ApertureConfig),
    pub angles: &'a AngleGrid,
    pub ref_distance: f64,
    pub solver: SolverSettings,
    pub noise_on_ports: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: usize,
    pub band: FrequencyGridSpec,
    pub distance_m: f64,
    pub snr_db: f64,
    pub trial: usize,
    pub true_angle_deg: f64,
    pub est_angle_deg: f64,
    /// Circular, in angle bins.
    pub bin_error: f64,
    pub iterations: usize,
    pub stop: Option<CgsStop>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellAggregate {
    pub cell: usize,
    pub band: FrequencyGridSpec,
    pub distance_m: f64,
    pub snr_db: f64,
    pub count: usize,
    pub exact_hit_rate: f64,
    pub within_one_bin_rate: f64,
    pub median_bin_error: f64,
    pub mean_bin_error: f64,
    pub max_bin_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSpectrum {
    pub band: FrequencyGridSpec,
    pub spectrum: SvdSpectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub aggregates: Vec<CellAggregate>,
    pub spectra: Vec<BandSpectrum>,
}

/// Median of a non-empty slice; the mean of the middle pair for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Per-cell summaries, in order of first appearance of each cell in `rows`.
pub fn aggregate(rows: &[SweepRow]) -> Vec<CellAggregate> {
    let mut cells: Vec<usize> = rows.iter().map(|r| r.cell).collect();
    cells.dedup();
    cells
        .into_iter()
        .map(|cell| {
            let members: Vec<&SweepRow> = rows.iter().filter(|r| r.cell == cell).collect();
            let errors: Vec<f64> = members.iter().map(|r| r.bin_error).collect();
            let n = errors.len() as f64;
            let first = members[0];
            CellAggregate {
                cell,
                band: first.band,
                distance_m: first.distance_m,
                snr_db: first.snr_db,
                count: errors.len(),
                exact_hit_rate: errors.iter().filter(|&&e| e == 0.0).count() as f64 / n,
                within_one_bin_rate: errors.iter().filter(|&&e| e <= 1.0).count() as f64 / n,
                median_bin_error: median(&errors),
                mean_bin_error: errors.iter().sum::<f64>() / n,
                max_bin_error: errors.iter().copied().fold(0.0, f64::max),
            }
        })
        .collect()
}

struct BandData {
    freqs: FrequencyGrid,
    h: SensingMatrix,
    /// Port voltages per distance, `M x N` each.
    voltages: Vec<(Array2<Complex64>, Array2<Complex64>)>,
}

pub fn run_sweep(setup: &SweepSetup<'_>, spec: &SweepSpec) -> Result<SweepReport> {
    spec.validate()?;
    setup.solver.validate()?;
    let n = setup.angles.len();
    let total = (spec.cell_count() as u64)
        .saturating_mul(spec.trials as u64)
        .saturating_mul(n as u64);
    if total > spec.max_estimations {
        return Err(Error::ResourceLimit(format!(
            "sweep needs {total} estimations ({} cells x {} trials x {n} angles), cap is {}",
            spec.cell_count(),
            spec.trials,
            spec.max_estimations
        )));
    }

    let (a1, a2) = setup.apertures;
    let bands: Vec<BandData> = spec
        .bands
        .iter()
        .map(|b| {
            let freqs = FrequencyGrid::try_from(*b)?;
            let p1 = pattern_sweep(a1, setup.angles, &freqs, setup.ref_distance)?;
            let p2 = pattern_sweep(a2, setup.angles, &freqs, setup.ref_distance)?;
            let h = build_sensing_matrix(&p1, &p2, &freqs, setup.angles, setup.ref_distance)?;
            let voltages = spec
                .distances_m
                .iter()
                .map(|&d| {
                    Ok((
                        pattern_sweep(a1, setup.angles, &freqs, d)?,
                        pattern_sweep(a2, setup.angles, &freqs, d)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(BandData { freqs, h, voltages })
        })
        .collect::<Result<_>>()?;
    let solvers: Vec<NormalEquations<'_>> = bands
        .iter()
        .map(|b| NormalEquations::new(&b.h, setup.solver))
        .collect::<Result<_>>()?;
    let spectra = bands
        .iter()
        .zip(&spec.bands)
        .map(|(b, &band)| {
            Ok(BandSpectrum {
                band,
                spectrum: normalized_singular_values(b.h.entries())?,
            })
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..spec.cell_count())
        .flat_map(|c| (0..spec.trials).map(move |t| (c, t)))
        .collect();
    let rows: Vec<Vec<SweepRow>> = jobs
        .par_iter()
        .map(|&(cell, trial)| {
            let (bi, di, si) = spec.cell_indices(cell);
            run_trial(
                setup,
                spec,
                &bands[bi],
                &solvers[bi],
                (cell, trial),
                (bi, di, si),
            )
        })
        .collect::<Result<_>>()?;
    let rows: Vec<SweepRow> = rows.into_iter().flatten().collect();
    let aggregates = aggregate(&rows);
    Ok(SweepReport {
        rows,
        aggregates,
        spectra,
    })
}

fn run_trial(
    setup: &SweepSetup<'_>,
    spec: &SweepSpec,
    band: &BandData,
    solver: &NormalEquations<'_>,
    (cell, trial): (usize, usize),
    (bi, di, si): (usize, usize, usize),
) -> Result<Vec<SweepRow>> {
    let snr_db = spec.snr_db[si];
    let noisy = snr_db.is_finite();
    let seed = rng::derive_seed(spec.master_seed, &[cell as u64, trial as u64]);
    let mut stream = rng::stream(seed, &[]);
    let (p1, p2) = &band.voltages[di];
    let angles = setup.angles;
    let mut rows = Vec::with_capacity(angles.len());
    for j in 0..angles.len() {
        let (v1, v2) = (p1.column(j).to_vec(), p2.column(j).to_vec());
        let g: Vec<Complex64> = if noisy && setup.noise_on_ports {
            correlate_with_port_noise(&v1, &v2, snr_db, rng::derive_seed(seed, &[j as u64]))
        } else {
            let mut g: Vec<Complex64> =
                v1.iter().zip(&v2).map(|(&a, &b)| cross_correlate(a, b)).collect();
            if noisy {
                add_noise_in_place(&mut g, snr_db, &mut stream);
            }
            g
        };
        let result = match spec.method {
            Method::CgsNormalEq => solver.estimate(&MeasurementVector::new(g, band.freqs.clone())?),
            Method::MatchedFilter => {
                matched_filter(&band.h, &MeasurementVector::new(g, band.freqs.clone())?)
            }
        }?;
        let truth = angles.values_deg()[j];
        rows.push(SweepRow {
            cell,
            band: spec.bands[bi],
            distance_m: spec.distances_m[di],
            snr_db,
            trial,
            true_angle_deg: truth,
            est_angle_deg: result.angle_deg,
            bin_error: angles.circular_bin_error(truth, result.angle_deg),
            iterations: result.iterations,
            stop: result.stop,
        });
    }
    Ok(rows)
}

fn stop_label(stop: Option<CgsStop>) -> &'static str {
    match stop {
        None => "none",
        Some(CgsStop::Converged) => "converged",
        Some(CgsStop::MaxIterations) => "max_iterations",
        Some(CgsStop::Breakdown) => "breakdown",
    }
}

impl SweepReport {
    pub fn rows_csv(&self) -> String {
        let mut out = String::from(
            "cell,band_f_min_hz,band_f_max_hz,band_count,distance_m,snr_db,trial,\
             true_angle_deg,est_angle_deg,bin_error,iterations,stop\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.cell,
                r.band.f_min_hz,
                r.band.f_max_hz,
                r.band.count,
                r.distance_m,
                r.snr_db,
                r.trial,
                r.true_angle_deg,
                r.est_angle_deg,
                r.bin_error,
                r.iterations,
                stop_label(r.stop)
            );
        }
        out
    }

    pub fn aggregates_csv(&self) -> String {
        let mut out = String::from(
            "cell,band_f_min_hz,band_f_max_hz,band_count,distance_m,snr_db,count,\
             exact_hit_rate,within_one_bin_rate,median_bin_error,mean_bin_error,max_bin_error\n",
        );
        for a in &self.aggregates {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                a.cell,
                a.band.f_min_hz,
                a.band.f_max_hz,
                a.band.count,
                a.distance_m,
                a.snr_db,
                a.count,
                a.exact_hit_rate,
                a.within_one_bin_rate,
                a.median_bin_error,
                a.mean_bin_error,
                a.max_bin_error
            );
        }
        out
    }

    /// Long format: one row per `(band, index)`.
    pub fn spectra_csv(&self) -> String {
        let mut out = String::from("band_f_min_hz,band_f_max_hz,band_count,index,normalized_value\n");
        for s in &self.spectra {
            for (i, v) in s.spectrum.values.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{i},{v}",
                    s.band.f_min_hz, s.band.f_max_hz, s.band.count
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::LayoutParams;

    fn small_spec() -> SweepSpec {
        SweepSpec {
            bands: vec![band(8.5e9, 11.5e9, 41)],
            distances_m: vec![0.16, 0.3],
            snr_db: vec![f64::INFINITY, 10.0],
            trials: 2,
            ..SweepSpec::default()
        }
    }

    #[test]
    fn cell_indices_follow_canonical_order() {
        let spec = SweepSpec {
            snr_db: vec![f64::INFINITY, 20.0],
            ..SweepSpec::default()
        };
        assert_eq!(spec.cell_count(), 24);
        assert_eq!(spec.cell_indices(0), (0, 0, 0));
        assert_eq!(spec.cell_indices(1), (0, 0, 1));
        assert_eq!(spec.cell_indices(2), (0, 1, 0));
        assert_eq!(spec.cell_indices(23), (3, 2, 1));
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn sweep_rows_are_ordered_and_aggregates_match() {
        let (a1, a2) = LayoutParams::default().generate_pair(1).unwrap();
        let angles = AngleGrid::new(24).unwrap();
        let setup = SweepSetup {
            apertures: (&a1, &a2),
            angles: &angles,
            ref_distance: 0.16,
            solver: SolverSettings::default(),
            noise_on_ports: false,
        };
        let spec = small_spec();
        let report = run_sweep(&setup, &spec).unwrap();
        assert_eq!(report.rows.len(), 4 * 2 * 24);
        let keys: Vec<(usize, usize)> = report.rows.iter().map(|r| (r.cell, r.trial)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(report.aggregates, aggregate(&report.rows));
        // noiseless at the reference distance is exact
        assert_eq!(report.aggregates[0].exact_hit_rate, 1.0);
        assert_eq!(report.spectra.len(), 1);
        assert_eq!(report.spectra[0].spectrum.values[0], 1.0);

        let again = run_sweep(&setup, &spec).unwrap();
        assert_eq!(report.rows_csv(), again.rows_csv());
    }

    #[test]
    fn resource_cap_refuses() {
        let (a1, a2) = LayoutParams::default().generate_pair(1).unwrap();
        let angles = AngleGrid::new(72).unwrap();
        let setup = SweepSetup {
            apertures: (&a1, &a2),
            angles: &angles,
            ref_distance: 0.16,
            solver: SolverSettings::default(),
            noise_on_ports: false,
        };
        let spec = SweepSpec {
            max_estimations: 100,
            ..SweepSpec::default()
        };
        assert!(matches!(run_sweep(&setup, &spec), Err(Error::ResourceLimit(_))));
    }
}
