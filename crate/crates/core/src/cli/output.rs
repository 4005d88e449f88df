//! Buffered output files, written together or not at all.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::svg::{render_svg, Chart, SvgError};
use super::table::Table;

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

#[derive(Debug)]
pub struct WriteError {
    pub path: PathBuf,
    pub source: io::Error,
}

impl std::fmt::Display for WriteError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "cannot write {}: {}", self.path.display(), self.source)
    }
}

impl std::error::Error for WriteError {}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        let name = name.into();
        assert!(
            !self.files.iter().any(|(n, _)| *n == name),
            "output `{name}` produced twice"
        );
        self.files.push((name, bytes));
    }

    pub fn csv(&mut self, name: impl Into<String>, table: &Table) {
        self.add(name, table.render().into_bytes());
    }

    pub fn svg(&mut self, name: impl Into<String>, chart: &Chart) -> Result<(), SvgError> {
        let text = render_svg(chart)?;
        self.add(name, text.into_bytes());
        Ok(())
    }

    pub fn files(&self) -> &[(String, Vec<u8>)] {
        &self.files
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    /// Writes every file into `dir`. On failure the files already written by
    /// this call are removed again.
    pub fn write_all(&self, dir: &Path) -> Result<Vec<PathBuf>, WriteError> {
        fs::create_dir_all(dir).map_err(|source| WriteError {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            if let Err(source) = fs::write(&path, bytes) {
                for done in &written {
                    let _ = fs::remove_file(done);
                }
                let _ = fs::remove_file(&path);
                return Err(WriteError { path, source });
            }
            written.push(path);
        }
        Ok(written)
    }
}
