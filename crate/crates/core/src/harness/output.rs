//! CSV files: header row, `.` decimals, LF line endings. Floats use the
//! shortest representation that reads back to the same value.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{FspdeError, Result};

pub struct CsvFile {
    inner: csv::Writer<File>,
}

fn csv_err(e: csv::Error) -> FspdeError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => FspdeError::Io(io),
        other => FspdeError::Config(format!("csv: {other:?}")),
    }
}

impl CsvFile {
    pub fn create(path: impl AsRef<Path>, header: &[&str]) -> Result<Self> {
        let file = File::create(path)?;
        let mut inner = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(file);
        inner.write_record(header).map_err(csv_err)?;
        Ok(Self { inner })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields).map_err(csv_err)
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

pub fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Writes a two-column `quantity,value` summary.
pub fn write_summary(path: impl AsRef<Path>, rows: &[(&str, String)]) -> Result<()> {
    let mut w = CsvFile::create(path, &["quantity", "value"])?;
    for (k, v) in rows {
        w.row([*k, v.as_str()])?;
    }
    w.finish()
}

/// Plain text file, written in one go.
pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let mut f = File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
