//! Output directory handling and CSV emission.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use mwbunch::model::io::csv_writer;
use mwbunch::Scalar;

use crate::error::{CliError, CliResult};

pub struct OutDir {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn open(dir: &Path) -> CliResult<Self> {
        if !dir.is_dir() {
            return Err(CliError::Usage(format!(
                "output directory {} does not exist",
                dir.display()
            )));
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Render into memory, then write a temp file next to the target and
    /// rename it into place.
    pub fn write_with<F>(&mut self, name: &str, render: F) -> CliResult<()>
    where
        F: FnOnce(&mut Vec<u8>) -> mwbunch::Result<()>,
    {
        let mut buf = Vec::new();
        render(&mut buf)?;
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.{}.tmp", std::process::id()));
        let io_err = |source| CliError::Io {
            path: path.clone(),
            source,
        };
        let mut f = fs::File::create(&tmp).map_err(io_err)?;
        f.write_all(&buf).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
        drop(f);
        if let Err(e) = fs::rename(&tmp, &path) {
            let _ = fs::remove_file(&tmp);
            return Err(io_err(e));
        }
        self.written.push(path);
        Ok(())
    }

    pub fn table(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> CliResult<()> {
        self.write_with(name, |buf| {
            let mut w = csv_writer(buf);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()?;
            Ok(())
        })
    }
}

/// Shortest round-trip decimal; empty for NaN.
pub fn num<T: Scalar>(v: T) -> String {
    let x = v.as_f64();
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

pub fn opt<T: Scalar>(v: Option<T>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn text(v: impl ToString) -> String {
    v.to_string()
}
