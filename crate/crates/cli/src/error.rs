use std::path::PathBuf;

use miniprob::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("data file not found: {}", .0.display())]
    DataFileMissing(PathBuf),
    #[error("bad data in {}: {msg}", path.display())]
    Data { path: PathBuf, msg: String },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::DataFileMissing(_) | CliError::Data { .. } | CliError::Io(_) => EXIT_DATA,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::UnknownVariable(_)
        | CoreError::Syntax { .. }
        | CoreError::DuplicateTerm(_)
        | CoreError::ResponseInTerms(_)
        | CoreError::InvalidArgument(_) => EXIT_USAGE,
        CoreError::CorruptMeta(_)
        | CoreError::MissingChainFile(_)
        | CoreError::CorruptData(_)
        | CoreError::Io(_)
        | CoreError::UnknownColumn(_)
        | CoreError::NonBinaryResponse(_)
        | CoreError::AllMissing(_) => EXIT_DATA,
        _ => EXIT_NUMERIC,
    }
}

pub type CliResult<T> = Result<T, CliError>;
