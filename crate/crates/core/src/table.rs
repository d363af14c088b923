//! Line-oriented loaders for the tab-separated inputs.

use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("missing input file {0}")]
    MissingFile(PathBuf),
    #[error("failed reading {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// A rejected input row. Rows are skipped, not fatal; callers surface the count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowIssue {
    pub line: usize,
    pub reason: String,
}

impl RowIssue {
    pub fn new(line: usize, reason: impl Into<String>) -> Self {
        Self {
            line,
            reason: reason.into(),
        }
    }
}

/// Parsed items plus the rows that were skipped.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub items: Vec<T>,
    pub issues: Vec<RowIssue>,
}

impl<T> Default for Loaded<T> {
    fn default() -> Self {
        Self {
            items: Vec::new(),
            issues: Vec::new(),
        }
    }
}

impl<T> Loaded<T> {
    pub fn warn_issues(&self, path: &Path) {
        for issue in &self.issues {
            log::warn!("{}:{}: {}", path.display(), issue.line, issue.reason);
        }
    }
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>, LoadError> {
    match File::open(path) {
        Ok(f) => Ok(BufReader::new(f)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            Err(LoadError::MissingFile(path.to_path_buf()))
        }
        Err(source) => Err(LoadError::Io {
            path: path.to_path_buf(),
            source,
        }),
    }
}

/// Visit the data lines of a tab-separated file with 1-based line numbers.
/// Blank lines and lines starting with `#` are skipped.
pub(crate) fn for_each_row(
    path: &Path,
    mut f: impl FnMut(usize, Vec<&str>),
) -> Result<(), LoadError> {
    let reader = open(path)?;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| LoadError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        f(idx + 1, line.split('\t').collect());
    }
    Ok(())
}
