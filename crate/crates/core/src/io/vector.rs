//! Measurement vector CSV: `freq_hz,re,im` rows plus optional ground truth and noise headers.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::header::{parse_fields, Header};
use super::{fmt_f64, read_text, write_text, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::forward::SourceSpec;
use crate::grid::FrequencyGrid;
use crate::sensing::{MeasurementVector, NoiseSpec};

const COLUMNS: &str = "freq_hz,re,im";
const KEYS: &[&str] = &[
    "format_version",
    "kind",
    "freq_min_hz",
    "freq_max_hz",
    "freq_count",
    "truth_angle_deg",
    "truth_distance_m",
    "truth_amplitude_re",
    "truth_amplitude_im",
    "noise_snr_db",
    "noise_seed",
];

pub fn vector_csv(g: &MeasurementVector) -> String {
    let mut out = String::new();
    out.push_str("# conformal-aoa measurement vector\n");
    let _ = writeln!(out, "# format_version = {FORMAT_VERSION}");
    out.push_str("# kind = measurement\n");
    let _ = writeln!(out, "# freq_min_hz = {}", fmt_f64(g.freqs.f_min()));
    let _ = writeln!(out, "# freq_max_hz = {}", fmt_f64(g.freqs.f_max()));
    let _ = writeln!(out, "# freq_count = {}", g.freqs.len());
    if let Some(s) = &g.truth {
        let _ = writeln!(out, "# truth_angle_deg = {}", fmt_f64(s.angle_deg));
        let _ = writeln!(out, "# truth_distance_m = {}", fmt_f64(s.distance));
        let _ = writeln!(out, "# truth_amplitude_re = {}", fmt_f64(s.amplitude.re));
        let _ = writeln!(out, "# truth_amplitude_im = {}", fmt_f64(s.amplitude.im));
    }
    if let Some(n) = &g.noise {
        let _ = writeln!(out, "# noise_snr_db = {}", fmt_f64(n.snr_db));
        let _ = writeln!(out, "# noise_seed = {}", n.seed);
    }
    out.push_str(COLUMNS);
    out.push('\n');
    for (f, z) in g.freqs.values().iter().zip(&g.entries) {
        let _ = writeln!(out, "{},{},{}", fmt_f64(*f), fmt_f64(z.re), fmt_f64(z.im));
    }
    out
}

pub fn parse_vector(text: &str) -> Result<MeasurementVector> {
    let (header, rows) = Header::parse(text, COLUMNS)?;
    header.check_keys(KEYS)?;
    let version: u32 = header.require("format_version")?;
    if version != FORMAT_VERSION {
        return Err(Error::parse(
            header.line_of("format_version"),
            format!("unsupported format_version {version}"),
        ));
    }
    if let Some(kind) = header.get::<String>("kind")? {
        if kind != "measurement" {
            return Err(Error::parse(
                header.line_of("kind"),
                format!("expected kind `measurement`, found `{kind}`"),
            ));
        }
    }
    let freqs = FrequencyGrid::new(
        header.require("freq_min_hz")?,
        header.require("freq_max_hz")?,
        header.require("freq_count")?,
    )
    .map_err(|e| Error::parse(header.line_of("freq_min_hz"), e.to_string()))?;

    let mut entries = vec![Complex64::new(0.0, 0.0); freqs.len()];
    let mut seen = vec![0usize; freqs.len()];
    for (no, line) in rows {
        let v = parse_fields(no, line, &["freq_hz", "re", "im"])?;
        let i = freqs.index_of(v[0]).ok_or_else(|| {
            Error::parse(Some(no), format!("frequency {} Hz is not on the grid", v[0]))
        })?;
        if seen[i] != 0 {
            return Err(Error::parse(
                Some(no),
                format!(
                    "duplicate frequency {} Hz, first given on line {}",
                    freqs.values()[i],
                    seen[i]
                ),
            ));
        }
        seen[i] = no;
        entries[i] = Complex64::new(v[1], v[2]);
    }
    if let Some(i) = seen.iter().position(|&l| l == 0) {
        return Err(Error::parse(
            None,
            format!("incomplete vector: missing frequency {} Hz", freqs.values()[i]),
        ));
    }

    let mut g = MeasurementVector::new(entries, freqs)?;
    let angle: Option<f64> = header.get("truth_angle_deg")?;
    let distance: Option<f64> = header.get("truth_distance_m")?;
    g.truth = match (angle, distance) {
        (Some(a), Some(d)) => {
            let re = header.get("truth_amplitude_re")?.unwrap_or(1.0);
            let im = header.get("truth_amplitude_im")?.unwrap_or(0.0);
            Some(SourceSpec::new(a, d).with_amplitude(Complex64::new(re, im)))
        }
        (None, None) => None,
        _ => {
            return Err(Error::parse(
                header.line_of("truth_angle_deg").or(header.line_of("truth_distance_m")),
                "truth needs both `truth_angle_deg` and `truth_distance_m`",
            ))
        }
    };
    let snr: Option<f64> = header.get("noise_snr_db")?;
    let seed: Option<u64> = header.get("noise_seed")?;
    g.noise = match (snr, seed) {
        (Some(snr_db), Some(seed)) => Some(NoiseSpec { snr_db, seed }),
        (None, None) => None,
        _ => {
            return Err(Error::parse(
                header.line_of("noise_snr_db").or(header.line_of("noise_seed")),
                "noise needs both `noise_snr_db` and `noise_seed`",
            ))
        }
    };
    Ok(g)
}

pub fn save_vector(path: &Path, g: &MeasurementVector) -> Result<()> {
    write_text(path, &vector_csv(g))
}

pub fn load_vector(path: &Path) -> Result<MeasurementVector> {
    parse_vector(&read_text(path)?).map_err(|e| e.with_path(path))
}
