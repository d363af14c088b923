//! Command errors and their process exit codes.

use std::path::PathBuf;

use geopulse_core::gazetteer::GazetteerError;
use geopulse_core::lexicon::LexiconError;
use geopulse_core::pipeline::{CsvError, IngestError, PipelineError, ScheduleError};
use geopulse_core::sentiment::external::AdapterError;
use geopulse_core::sentiment::SentimentError;
use geopulse_core::table::LoadError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("missing input file {}", .0.display())]
    MissingInput(PathBuf),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Adapter(#[from] AdapterError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::MissingInput(_) => 2,
            CliError::Data(_) => 3,
            CliError::Adapter(_) => 4,
        }
    }

    pub fn data(msg: impl ToString) -> Self {
        CliError::Data(msg.to_string())
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        if err.kind() == std::io::ErrorKind::NotFound {
            CliError::MissingInput(path.to_path_buf())
        } else {
            CliError::Data(format!("{}: {err}", path.display()))
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::MissingFile(path) => CliError::MissingInput(path),
            other => CliError::data(other),
        }
    }
}

impl From<GazetteerError> for CliError {
    fn from(e: GazetteerError) -> Self {
        match e {
            GazetteerError::Load(e) => e.into(),
            other => CliError::data(other),
        }
    }
}

impl From<LexiconError> for CliError {
    fn from(e: LexiconError) -> Self {
        match e {
            LexiconError::Load(e) => e.into(),
            other => CliError::data(other),
        }
    }
}

impl From<SentimentError> for CliError {
    fn from(e: SentimentError) -> Self {
        match e {
            SentimentError::Load(e) => e.into(),
            other => CliError::data(other),
        }
    }
}

impl From<CsvError> for CliError {
    fn from(e: CsvError) -> Self {
        match e {
            CsvError::Load(e) => e.into(),
            other => CliError::data(other),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Adapter(e) => e.into(),
            PipelineError::MissingScore(_) => CliError::Adapter(AdapterError::ProtocolViolation(e.to_string())),
            other => CliError::data(other),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::data(e)
    }
}

impl From<ScheduleError> for CliError {
    fn from(e: ScheduleError) -> Self {
        CliError::data(e)
    }
}
