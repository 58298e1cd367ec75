use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(format!("serializing JSON: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn csv_table<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Numeric(format!("serializing CSV: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Numeric(format!("flushing CSV: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Numeric(e.to_string()))
}

/// Two-column `key,value` table.
pub fn csv_pairs(pairs: &[(&str, String)]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Numeric(format!("serializing CSV: {e}"));
    w.write_record(["key", "value"]).map_err(fail)?;
    for (k, v) in pairs {
        w.write_record([*k, v.as_str()]).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Numeric(format!("flushing CSV: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Numeric(e.to_string()))
}

pub fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Numeric(format!("writing output: {e}")))
        }
    }
}
