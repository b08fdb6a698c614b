//! CSV writers and the run manifest.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::CliError;

/// Full double precision in scientific notation (17 significant digits).
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<S: AsRef<str>>(path: &Path, header: &[S], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let to_io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CliError::Config(format!("{}: {other:?}", path.display())),
    };
    let mut w = csv::Writer::from_path(path).map_err(to_io)?;
    w.write_record(header.iter().map(|h| h.as_ref())).map_err(to_io)?;
    for row in rows {
        w.write_record(&row).map_err(to_io)?;
    }
    w.flush().map_err(CliError::io(path))
}

/// Numeric rows, formatted with [`fmt`].
pub fn write_numeric<S: AsRef<str>>(path: &Path, header: &[S], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), CliError> {
    write_csv(path, header, rows.into_iter().map(|r| r.into_iter().map(fmt).collect()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Sectioned key-value record of a run, written as TOML.
pub struct Manifest {
    root: Table,
}

impl Manifest {
    pub fn new() -> Manifest {
        Manifest { root: Table::new() }
    }

    pub fn set(&mut self, section: &str, key: &str, value: impl Into<Value>) {
        let entry = self
            .root
            .entry(section.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        if let Value::Table(t) = entry {
            t.insert(key.to_string(), value.into());
        }
    }

    pub fn section(&mut self, name: &str, table: Table) {
        self.root.insert(name.to_string(), Value::Table(table));
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = toml::to_string(&self.root).map_err(|e| CliError::Config(format!("manifest: {e}")))?;
        fs::write(path, text).map_err(CliError::io(path))
    }
}

pub fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| Value::Float(x)).collect())
}
