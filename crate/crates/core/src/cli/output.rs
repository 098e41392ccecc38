use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// 12 significant digits in scientific notation, e.g. `9.99746113722e-1`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.11e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

/// A CSV table held in memory until written; rows are pre-formatted so the
/// bytes on disk do not depend on how they were computed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::InvariantViolation(format!("csv encoding failed: {e}"));
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::InvariantViolation(format!("csv encoding failed: {e}")))
    }

    /// Writes `dir/name`, creating `dir` if needed.
    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join(name);
        fs::write(&path, self.to_bytes()?).map_err(io_err(&path))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_f64(0.99975), "9.99750000000e-1");
        assert_eq!(fmt_f64(-3.0), "-3.00000000000e0");
        assert_eq!(fmt_f64(0.0), "0.00000000000e0");
    }

    #[test]
    fn unix_newlines_and_header() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), fmt_f64(0.5)]);
        let s = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(s, "a,b\n1,5.00000000000e-1\n");
    }

    #[test]
    fn writes_into_new_directory() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(&["x"]);
        t.push(vec!["1".into()]);
        let p = t.write(&dir.path().join("nested"), "x.csv").unwrap();
        assert_eq!(fs::read_to_string(p).unwrap(), "x\n1\n");
    }
}
