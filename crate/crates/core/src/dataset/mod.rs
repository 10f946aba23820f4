//! Pound-separated dataset files and a lazy, partition-parallel pipeline
//! over them.
//!
//! A raw dataset file has no header and one row per line. Rows have the 13
//! columns listed in [`COLUMNS`]. Values are percent-escaped so that '#',
//! '%' and line breaks can appear inside them.

mod codec;
mod exec;
mod fs;
mod plan;

use std::path::PathBuf;

pub use codec::{decode_fields, decode_row, encode_fields, encode_row, CodecError, ParsedLine, SEPARATOR};
pub(crate) use exec::temp_path;
pub use exec::{execute, ExecMode, ExecutionReport, FileSink, Sink, VecSink};
pub use fs::{SourceFs, StdFs};
pub use plan::{read_multi, BoxError, DatasetPlan, GroupedPlan, KeyedPlan};

pub const PROJECT: usize = 0;
pub const COMMIT_ID: usize = 1;
pub const PARENT_ID: usize = 2;
pub const AUTHOR_NAME: usize = 3;
pub const AUTHOR_EMAIL: usize = 4;
pub const TIMESTAMP: usize = 5;
pub const FILE_PATH: usize = 6;
pub const IS_TEST_FILE: usize = 7;
pub const CHANGE_TYPE: usize = 8;
pub const ENTITY_KIND: usize = 9;
pub const ENTITY_NAME: usize = 10;
pub const PARENT_ENTITY_PATH: usize = 11;
pub const TICKET_ID: usize = 12;

pub const RAW_ARITY: usize = 13;

pub const COLUMNS: [&str; RAW_ARITY] = [
    "project",
    "commitId",
    "parentId",
    "authorName",
    "authorEmail",
    "timestamp",
    "filePath",
    "isTestFile",
    "changeType",
    "entityKind",
    "entityName",
    "parentEntityPath",
    "ticketId",
];

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{}: file not found", path.display())]
    FileNotFound { path: PathBuf },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {source}", path.display())]
    Decode {
        path: PathBuf,
        line: usize,
        #[source]
        source: CodecError,
    },
    #[error("{}:{line}: invalid UTF-8", path.display())]
    InvalidUtf8 { path: PathBuf, line: usize },
    #[error("cannot union rows of {left} and {right} columns")]
    SchemaMismatch { left: usize, right: usize },
    #[error("group `{key}`: {source}")]
    Function {
        key: String,
        #[source]
        source: BoxError,
    },
    #[error("worker pool: {0}")]
    Pool(String),
}

impl DatasetError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            DatasetError::FileNotFound { path }
        } else {
            DatasetError::Io { path, source }
        }
    }

    /// Errors caused by input content rather than the environment.
    pub fn is_data_error(&self) -> bool {
        !matches!(
            self,
            DatasetError::FileNotFound { .. } | DatasetError::Io { .. } | DatasetError::Pool(_)
        )
    }
}
