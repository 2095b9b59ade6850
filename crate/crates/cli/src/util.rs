//! Shared CLI plumbing: the two-exit-code error type and atomic file
//! writes.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use nloi::io::ReadError;
use nloi::measures::MeasureError;
use nloi::permtest::PermTestError;
use nloi::simgen::ScenarioError;
use nloi::experiments::ExperimentError;

/// CLI failure split by exit code: I/O problems exit 1, everything that
/// means "your inputs or flags are wrong" exits 2.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Invalid(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Invalid(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(msg) | CliError::Invalid(msg) => f.write_str(msg),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ReadError> for CliError {
    fn from(e: ReadError) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<PermTestError> for CliError {
    fn from(e: PermTestError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Perm(p) => p.into(),
            ExperimentError::Scenario(s) => s.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

/// Writes a file by filling a temporary sibling and renaming it into place;
/// a failure mid-write leaves no partial file at `path`.
pub fn write_atomic(
    path: &Path,
    fill: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::Io(format!("cannot create temporary file in {}: {e}", dir.display())))?;
    fill(tmp.as_file_mut())
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| CliError::Io(format!("cannot finalize {}: {}", path.display(), e.error)))?;
    Ok(())
}
