//! Top-level error with module-qualified messages and CLI exit codes.

use crate::design::DesignError;
use crate::model::ModelError;
use crate::ols::OlsError;
use crate::quality::QualityError;
use crate::records::RecordsError;
use crate::report::ReportError;
use crate::transfer::TransferError;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("records: {0}")]
    Records(#[from] RecordsError),
    #[error("quality: {0}")]
    Quality(#[from] QualityError),
    #[error("design: {0}")]
    Design(#[from] DesignError),
    #[error("ols: {0}")]
    Ols(#[from] OlsError),
    #[error("transfer: {0}")]
    Transfer(#[from] TransferError),
    #[error("report: {0}")]
    Report(#[from] ReportError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("io: {0}")]
    Io(String),
    #[error("usage: {0}")]
    Usage(String),
}

fn records_code(e: &RecordsError) -> i32 {
    match e {
        RecordsError::Io(_) => EXIT_IO,
        _ => EXIT_INPUT,
    }
}

impl Error {
    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Error::Io(format!("{}: {e}", path.display()))
    }

    /// 2 input, 3 numerical (rank / degrees of freedom), 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Records(e) => records_code(e),
            Error::Design(DesignError::Normalization(e)) => records_code(e),
            Error::Transfer(TransferError::Records(e)) => records_code(e),
            Error::Ols(OlsError::InvalidRSquared { .. } | OlsError::NonFiniteResponse) => {
                EXIT_INPUT
            }
            Error::Ols(_) => EXIT_NUMERICAL,
            Error::Model(ModelError::Io { .. }) | Error::Io(_) => EXIT_IO,
            _ => EXIT_INPUT,
        }
    }
}
