//! Workbook loading: the `.xlsx` frontend for real files and a plain-text
//! fixture frontend for tests and documentation. Both produce the same
//! in-memory [`Workbook`], so every downstream stage is frontend-agnostic.

mod fixture;
mod xlsx;

use std::path::Path;

use thiserror::Error;

use crate::model::Workbook;

pub use fixture::parse_fixture;
pub use xlsx::load_xlsx_bytes;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}:{line}: {message}")]
    Fixture {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {part}: {message}")]
    Xlsx {
        path: String,
        part: String,
        message: String,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A tolerated oddity noticed while loading: an unsupported part, a skipped
/// array formula, a hidden sheet. Never fatal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestWarning {
    pub location: String,
    pub message: String,
}

#[derive(Debug)]
pub struct IngestReport {
    pub workbook: Workbook,
    pub warnings: Vec<IngestWarning>,
}

/// Loads a workbook from the fixture format. See the crate README for the
/// grammar; errors carry the failing line number.
pub fn load_fixture(path: impl AsRef<Path>) -> Result<IngestReport, IngestError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    fixture::parse_fixture_named(&text, &path.display().to_string())
}

/// Loads a workbook from an `.xlsx` archive.
pub fn load_xlsx(path: impl AsRef<Path>) -> Result<IngestReport, IngestError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    xlsx::load_xlsx_named(&bytes, &path.display().to_string())
}

/// Picks the frontend by file extension: `.xlsx` goes to the archive
/// reader, everything else is treated as fixture text.
pub fn load_auto(path: impl AsRef<Path>) -> Result<IngestReport, IngestError> {
    let is_xlsx = path
        .as_ref()
        .extension()
        .map(|e| e.eq_ignore_ascii_case("xlsx"))
        .unwrap_or(false);
    if is_xlsx {
        load_xlsx(path)
    } else {
        load_fixture(path)
    }
}
