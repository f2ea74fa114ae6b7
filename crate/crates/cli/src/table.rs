//! Header-checked CSV input. Columns are looked up by name, so extra columns
//! and any column order are accepted.

use std::path::Path;
use std::str::FromStr;

use csv::{ReaderBuilder, StringRecord, Trim};

use crate::error::CliError;

pub struct Row<'a> {
    record: StringRecord,
    columns: &'a [usize],
    names: &'a [&'a str],
    path: &'a Path,
    pub line: u64,
}

impl Row<'_> {
    pub fn text(&self, i: usize) -> &str {
        self.record.get(self.columns[i]).unwrap_or("")
    }

    pub fn parse<T: FromStr>(&self, i: usize) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.text(i);
        raw.parse().map_err(|e| {
            let msg = format!("column '{}': cannot parse '{raw}': {e}", self.names[i]);
            CliError::input(self.path, Some(self.line), msg)
        })
    }

    pub fn error(&self, message: impl Into<String>) -> CliError {
        CliError::input(self.path, Some(self.line), message)
    }
}

/// Reads `path`, requiring each of `names` in the header row, and maps every
/// non-blank data row through `f`. The first bad row aborts with its line.
pub fn read<T>(
    path: &Path,
    names: &[&str],
    mut f: impl FnMut(&Row<'_>) -> Result<T, CliError>,
) -> Result<Vec<T>, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::input(path, None, e.to_string()))?;
    // Physical line of a record starting at `byte`. The reader's own counter
    // ignores blank lines, and its offsets point at any blank lines it skipped.
    let line_at = |byte: u64| {
        let start = bytes[byte as usize..]
            .iter()
            .position(|&b| b != b'\n' && b != b'\r')
            .map_or(bytes.len(), |k| byte as usize + k);
        1 + bytes[..start].iter().filter(|&&b| b == b'\n').count() as u64
    };
    let mut reader = ReaderBuilder::new()
        .has_headers(true)
        .trim(Trim::All)
        .from_reader(&bytes[..]);
    let header = reader
        .headers()
        .map_err(|e| csv_error(path, e, line_at))?
        .clone();
    if header.iter().all(str::is_empty) {
        return Err(CliError::input(path, Some(1), "missing header row"));
    }
    let columns = names
        .iter()
        .map(|name| {
            header.iter().position(|h| h == *name).ok_or_else(|| {
                let have: Vec<&str> = header.iter().collect();
                CliError::input(
                    path,
                    Some(1),
                    format!("header lacks column '{name}' (have {have:?})"),
                )
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e, line_at))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let line = record.position().map_or(0, |p| line_at(p.byte()));
        let row = Row {
            record,
            columns: &columns,
            names,
            path,
            line,
        };
        out.push(f(&row)?);
    }
    Ok(out)
}

fn csv_error(path: &Path, e: csv::Error, line_at: impl Fn(u64) -> u64) -> CliError {
    let line = e.position().map(|p| line_at(p.byte()));
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => {
            format!("expected {expected_len} fields, found {len}")
        }
        _ => e.to_string(),
    };
    CliError::input(path, line, message)
}
