//! Estimation results and run manifests as JSON, SVD spectra as two-column CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::header::{parse_fields, Header};
use super::{fmt_f64, read_text, write_text, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::estimator::{EstimationResult, SvdSpectrum};
use crate::forward::SourceSpec;
use crate::sensing::NoiseSpec;

/// An estimate together with what is known about the measurement it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub format_version: u32,
    pub result: EstimationResult,
    pub truth: Option<SourceSpec>,
    /// Absent for noiseless measurements.
    pub noise: Option<NoiseSpec>,
}

impl ResultFile {
    pub fn new(result: EstimationResult, truth: Option<SourceSpec>, noise: Option<NoiseSpec>) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            result,
            truth,
            noise,
        }
    }
}

/// What a command did and with which inputs, enough to rerun it bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub format_version: u32,
    pub tool_version: String,
    pub command: String,
    /// Seconds since the Unix epoch.
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
    /// Full configuration as TOML, so that non-finite SNR values survive.
    pub config_toml: String,
    pub seeds: BTreeMap<String, u64>,
    /// Paths of written artifacts, relative to the manifest.
    pub artifacts: Vec<String>,
    #[serde(default)]
    pub notes: BTreeMap<String, String>,
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)
        .map_err(|e| Error::Domain(format!("cannot serialise: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::parse(Some(e.line()), e.to_string()))
}

pub fn save_result(path: &Path, r: &ResultFile) -> Result<()> {
    write_text(path, &to_json(r)?)
}

pub fn parse_result(text: &str) -> Result<ResultFile> {
    let r: ResultFile = from_json(text)?;
    if r.format_version != FORMAT_VERSION {
        return Err(Error::parse(None, format!("unsupported format_version {}", r.format_version)));
    }
    let est = &r.result;
    if est.profile.values.len() != est.profile.angles.len() {
        return Err(Error::parse(
            None,
            "profile length does not match its angle grid".to_string(),
        ));
    }
    if est.bin_index >= est.profile.angles.len()
        || est.profile.angles.values_deg()[est.bin_index] != est.angle_deg
    {
        return Err(Error::parse(None, "bin_index and angle_deg disagree".to_string()));
    }
    Ok(r)
}

pub fn load_result(path: &Path) -> Result<ResultFile> {
    parse_result(&read_text(path)?).map_err(|e| e.with_path(path))
}

pub fn save_manifest(path: &Path, m: &RunManifest) -> Result<()> {
    write_text(path, &to_json(m)?)
}

pub fn load_manifest(path: &Path) -> Result<RunManifest> {
    from_json(&read_text(path)?).map_err(|e| e.with_path(path))
}

const SPECTRUM_COLUMNS: &str = "index,normalized_value";

pub fn spectrum_csv(s: &SvdSpectrum) -> String {
    let mut out = String::from("# conformal-aoa svd spectrum\n");
    let _ = writeln!(out, "# format_version = {FORMAT_VERSION}");
    let _ = writeln!(out, "# count = {}", s.values.len());
    out.push_str(SPECTRUM_COLUMNS);
    out.push('\n');
    for (i, v) in s.values.iter().enumerate() {
        let _ = writeln!(out, "{i},{}", fmt_f64(*v));
    }
    out
}

pub fn parse_spectrum(text: &str) -> Result<SvdSpectrum> {
    let (header, rows) = Header::parse(text, SPECTRUM_COLUMNS)?;
    header.check_keys(&["format_version", "count"])?;
    let version: u32 = header.require("format_version")?;
    if version != FORMAT_VERSION {
        return Err(Error::parse(
            header.line_of("format_version"),
            format!("unsupported format_version {version}"),
        ));
    }
    let count: usize = header.require("count")?;
    if rows.len() != count {
        return Err(Error::parse(
            None,
            format!("header declares {count} values, found {}", rows.len()),
        ));
    }
    let mut values = Vec::with_capacity(count);
    for (k, (no, line)) in rows.into_iter().enumerate() {
        let v = parse_fields(no, line, &["index", "normalized_value"])?;
        if v[0] != k as f64 {
            return Err(Error::parse(Some(no), format!("expected index {k}, found {}", v[0])));
        }
        let x = v[1];
        if x < 0.0 {
            return Err(Error::parse(Some(no), format!("negative singular value {x}")));
        }
        if k == 0 && x != 1.0 {
            return Err(Error::parse(Some(no), format!("leading value must be 1, found {x}")));
        }
        if let Some(&prev) = values.last() {
            if x > prev {
                return Err(Error::parse(Some(no), format!("value {x} exceeds its predecessor")));
            }
        }
        values.push(x);
    }
    Ok(SvdSpectrum { values })
}

pub fn save_spectrum(path: &Path, s: &SvdSpectrum) -> Result<()> {
    write_text(path, &spectrum_csv(s))
}

pub fn load_spectrum(path: &Path) -> Result<SvdSpectrum> {
    parse_spectrum(&read_text(path)?).map_err(|e| e.with_path(path))
}
