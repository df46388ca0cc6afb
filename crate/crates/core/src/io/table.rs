//! Complex `(frequency, angle)` tables: per-port patterns and sensing matrices.
//!
//! ```text
//! # conformal-aoa complex table
//! # format_version = 1
//! # kind = pattern
//! # port_id = 1
//! # ref_distance_m = 1.6000000000000000e-1
//! # freq_min_hz = 8.5000000000000000e9
//! # freq_max_hz = 1.1500000000000000e10
//! # freq_count = 301
//! # angle_count = 72
//! freq_hz,angle_deg,re,im
//! ```
//!
//! Rows may appear in any order; loading requires exactly one row per grid cell.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use super::header::{parse_fields, Header};
use super::{fmt_f64, read_text, write_text, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::forward::PortId;
use crate::grid::{AngleGrid, FrequencyGrid};
use crate::sensing::SensingMatrix;

const COLUMNS: &str = "freq_hz,angle_deg,re,im";
const KEYS: &[&str] = &[
    "format_version",
    "kind",
    "port_id",
    "ref_distance_m",
    "freq_min_hz",
    "freq_max_hz",
    "freq_count",
    "angle_count",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Pattern,
    SensingMatrix,
}

impl TableKind {
    fn as_str(self) -> &'static str {
        match self {
            TableKind::Pattern => "pattern",
            TableKind::SensingMatrix => "sensing_matrix",
        }
    }
}

/// A pattern sweep of one port, or a sensing matrix, with its grid metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternFile {
    pub kind: TableKind,
    /// Present for patterns, absent for sensing matrices.
    pub port_id: Option<PortId>,
    pub ref_distance_m: f64,
    pub freqs: FrequencyGrid,
    pub angles: AngleGrid,
    /// `freqs.len() x angles.len()`.
    pub values: Array2<Complex64>,
}

impl PatternFile {
    pub fn pattern(
        port_id: PortId,
        ref_distance_m: f64,
        freqs: FrequencyGrid,
        angles: AngleGrid,
        values: Array2<Complex64>,
    ) -> Self {
        Self {
            kind: TableKind::Pattern,
            port_id: Some(port_id),
            ref_distance_m,
            freqs,
            angles,
            values,
        }
    }

    pub fn from_matrix(h: &SensingMatrix) -> Self {
        Self {
            kind: TableKind::SensingMatrix,
            port_id: None,
            ref_distance_m: h.ref_distance(),
            freqs: h.freqs().clone(),
            angles: h.angles().clone(),
            values: h.entries().clone(),
        }
    }

    pub fn into_matrix(self) -> Result<SensingMatrix> {
        if self.kind != TableKind::SensingMatrix {
            return Err(Error::parse(None, "file holds a pattern, not a sensing matrix"));
        }
        SensingMatrix::new(self.values, self.freqs, self.angles, self.ref_distance_m)
    }
}

pub fn table_csv(t: &PatternFile) -> String {
    let mut out = String::new();
    out.push_str("# conformal-aoa complex table\n");
    let _ = writeln!(out, "# format_version = {FORMAT_VERSION}");
    let _ = writeln!(out, "# kind = {}", t.kind.as_str());
    if let Some(p) = t.port_id {
        let _ = writeln!(out, "# port_id = {}", p.number());
    }
    let _ = writeln!(out, "# ref_distance_m = {}", fmt_f64(t.ref_distance_m));
    let _ = writeln!(out, "# freq_min_hz = {}", fmt_f64(t.freqs.f_min()));
    let _ = writeln!(out, "# freq_max_hz = {}", fmt_f64(t.freqs.f_max()));
    let _ = writeln!(out, "# freq_count = {}", t.freqs.len());
    let _ = writeln!(out, "# angle_count = {}", t.angles.len());
    out.push_str(COLUMNS);
    out.push('\n');
    for (i, f) in t.freqs.values().iter().enumerate() {
        for (j, a) in t.angles.values_deg().iter().enumerate() {
            let z = t.values[[i, j]];
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(*f),
                fmt_f64(*a),
                fmt_f64(z.re),
                fmt_f64(z.im)
            );
        }
    }
    out
}

pub fn parse_table(text: &str) -> Result<PatternFile> {
    let (header, rows) = Header::parse(text, COLUMNS)?;
    header.check_keys(KEYS)?;
    let version: u32 = header.require("format_version")?;
    if version != FORMAT_VERSION {
        return Err(Error::parse(
            header.line_of("format_version"),
            format!("unsupported format_version {version}"),
        ));
    }
    let kind_raw: String = header.require("kind")?;
    let kind = match kind_raw.as_str() {
        "pattern" => TableKind::Pattern,
        "sensing_matrix" => TableKind::SensingMatrix,
        other => {
            return Err(Error::parse(
                header.line_of("kind"),
                format!("unknown kind `{other}`"),
            ))
        }
    };
    let port_id = match header.get::<u8>("port_id")? {
        Some(p) => Some(
            PortId::try_from(p).map_err(|e| Error::parse(header.line_of("port_id"), e.to_string()))?,
        ),
        None if kind == TableKind::Pattern => {
            return Err(Error::parse(
                Some(header.columns_line),
                "pattern files need a `port_id` header",
            ))
        }
        None => None,
    };
    let ref_distance_m: f64 = header.require("ref_distance_m")?;
    let freqs = FrequencyGrid::new(
        header.require("freq_min_hz")?,
        header.require("freq_max_hz")?,
        header.require("freq_count")?,
    )
    .map_err(|e| Error::parse(header.line_of("freq_min_hz"), e.to_string()))?;
    let angles = AngleGrid::new(header.require("angle_count")?)
        .map_err(|e| Error::parse(header.line_of("angle_count"), e.to_string()))?;

    let (m, n) = (freqs.len(), angles.len());
    let mut values = Array2::zeros((m, n));
    let mut source_line = vec![0usize; m * n];
    for (no, line) in rows {
        let v = parse_fields(no, line, &["freq_hz", "angle_deg", "re", "im"])?;
        let i = freqs.index_of(v[0]).ok_or_else(|| {
            Error::parse(Some(no), format!("frequency {} Hz is not on the grid", v[0]))
        })?;
        let j = angles.index_of(v[1]).ok_or_else(|| {
            Error::parse(Some(no), format!("angle {} deg is not on the grid", v[1]))
        })?;
        let slot = &mut source_line[i * n + j];
        if *slot != 0 {
            return Err(Error::parse(
                Some(no),
                format!(
                    "duplicate cell (freq {} Hz, angle {} deg), first given on line {}",
                    freqs.values()[i],
                    angles.values_deg()[j],
                    slot
                ),
            ));
        }
        *slot = no;
        values[[i, j]] = Complex64::new(v[2], v[3]);
    }
    if let Some(missing) = source_line.iter().position(|&l| l == 0) {
        let (i, j) = (missing / n, missing % n);
        let count = source_line.iter().filter(|&&l| l == 0).count();
        return Err(Error::parse(
            None,
            format!(
                "incomplete grid: missing (freq {} Hz, angle {} deg) and {} other cell(s)",
                freqs.values()[i],
                angles.values_deg()[j],
                count - 1
            ),
        ));
    }
    Ok(PatternFile {
        kind,
        port_id,
        ref_distance_m,
        freqs,
        angles,
        values,
    })
}

pub fn save_pattern(path: &Path, t: &PatternFile) -> Result<()> {
    write_text(path, &table_csv(t))
}

pub fn load_pattern(path: &Path) -> Result<PatternFile> {
    parse_table(&read_text(path)?).map_err(|e| e.with_path(path))
}
