use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

/// `# key = value` lines preceding the column header of a CSV artifact.
pub(crate) struct Header {
    entries: BTreeMap<String, (usize, String)>,
    /// Line number of the column header.
    pub columns_line: usize,
}

impl Header {
    /// Splits `text` into header entries and the remaining `(line_number, line)` data rows.
    /// The first non-comment line must equal `columns`.
    pub fn parse<'a>(text: &'a str, columns: &str) -> Result<(Header, Vec<(usize, &'a str)>)> {
        let mut entries = BTreeMap::new();
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut columns_line = None;
        for (no, line) in lines.by_ref() {
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if rest.is_empty() || !rest.contains('=') {
                    // Free-text comment such as the title line.
                    continue;
                }
                let (k, v) = rest.split_once('=').expect("checked above");
                let key = k.trim().to_string();
                if let Some((prev, _)) = entries.get(&key) {
                    return Err(Error::parse(
                        Some(no),
                        format!("header key `{key}` repeated (first on line {prev})"),
                    ));
                }
                entries.insert(key, (no, v.trim().to_string()));
                continue;
            }
            let got: Vec<&str> = line.split(',').map(str::trim).collect();
            let want: Vec<&str> = columns.split(',').collect();
            if got != want {
                return Err(Error::parse(
                    Some(no),
                    format!("expected column header `{columns}`, found `{line}`"),
                ));
            }
            columns_line = Some(no);
            break;
        }
        let columns_line = columns_line
            .ok_or_else(|| Error::parse(None, format!("missing column header `{columns}`")))?;
        let rows = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('#')).collect();
        Ok((
            Header {
                entries,
                columns_line,
            },
            rows,
        ))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, raw)) => raw.parse().map(Some).map_err(|_| {
                Error::parse(Some(*line), format!("header `{key}` has invalid value `{raw}`"))
            }),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| {
            Error::parse(Some(self.columns_line), format!("missing header key `{key}`"))
        })
    }

    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|(l, _)| *l)
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for (key, (line, _)) in &self.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::parse(Some(*line), format!("unknown header key `{key}`")));
            }
        }
        Ok(())
    }
}

/// Splits a data row into exactly `n` numeric fields.
pub(crate) fn parse_fields(line_no: usize, line: &str, names: &[&str]) -> Result<Vec<f64>> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != names.len() {
        return Err(Error::parse(
            Some(line_no),
            format!("expected {} fields, found {}", names.len(), fields.len()),
        ));
    }
    fields
        .iter()
        .zip(names)
        .map(|(f, name)| {
            let v: f64 = f.parse().map_err(|_| {
                Error::parse(Some(line_no), format!("field `{name}` is not a number: `{f}`"))
            })?;
            if !v.is_finite() {
                return Err(Error::parse(
                    Some(line_no),
                    format!("field `{name}` is not finite: `{f}`"),
                ));
            }
            Ok(v)
        })
        .collect()
}
