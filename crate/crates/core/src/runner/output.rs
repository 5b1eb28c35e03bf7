//! Result directory with atomic file writes.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Result files written so far, in order.
    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// Writes `name` through a temporary file and a rename, then records it.
    pub fn write_with<F: FnOnce(&mut dyn Write) -> Result<()>>(&mut self, name: &str, fill: F) -> Result<()> {
        self.write_inner(name, fill)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_inner<F: FnOnce(&mut dyn Write) -> Result<()>>(&self, name: &str, fill: F) -> Result<()> {
        let target = self.root.join(name);
        let tmp = self.root.join(format!(".{name}.tmp"));
        let result = (|| {
            let mut w = BufWriter::new(fs::File::create(&tmp)?);
            fill(&mut w)?;
            w.flush()?;
            drop(w);
            fs::rename(&tmp, &target)?;
            Ok(())
        })();
        if result.is_err() {
            let _ = fs::remove_file(&tmp);
        }
        result
    }

    /// Writes pretty JSON without listing it as a result file.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write_inner(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }

    pub fn write_result_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write_json(name, value)?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Removes the result files written so far after a failure.
    pub fn cleanup(&mut self) {
        for f in self.files.drain(..) {
            let _ = fs::remove_file(self.root.join(f));
        }
    }
}
