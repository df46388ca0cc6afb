//! File formats for every pipeline artifact.
//!
//! Text formats are UTF-8 CSV with a block of `# key = value` header lines. Frequencies are in
//! Hz, angles in degrees and distances in metres; floating-point values are written with 17
//! significant digits so that a save/load cycle is bit-exact.

mod binary;
mod config;
mod header;
mod results;
mod table;
mod vector;

use std::fs;
use std::path::Path;

pub use binary::{load_table_binary, save_table_binary, BINARY_MAGIC, BINARY_VERSION};
pub use binary::{decode_table, encode_table};
pub use config::{
    dump_config, load_config, parse_config, save_config, ApertureSpec, ElementSpec,
    ExperimentConfig,
};
pub use results::{
    load_manifest, load_result, load_spectrum, parse_result, parse_spectrum, save_manifest,
    save_result, save_spectrum, spectrum_csv, ResultFile, RunManifest,
};
pub use table::{load_pattern, parse_table, save_pattern, table_csv, PatternFile, TableKind};
pub use vector::{load_vector, parse_vector, save_vector, vector_csv};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// 17 significant digits; parses back to the identical `f64`.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
