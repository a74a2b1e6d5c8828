//! Exact computer algebra for Eulerian sequences of homology classes and the
//! equivariant Steenrod operations they name.
//!
//! Everything is finite and exact: groups are explicit tables, characters are
//! integer data, modules are windowed bases over a prime field.

pub mod eulerian;
pub mod falg;
pub mod fingroup;
pub mod fp;
pub mod grouphom;
pub mod instances;
pub mod linalg;
pub mod opcatalog;
pub mod oracle;
pub mod repring;
pub mod rodegree;
pub mod wreath;

pub use fp::Fp;
pub use rodegree::RODegree;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input file; `line` is 1-based, 0 when unknown.
    #[error("{source_name}:{line}:{column}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("data error: {0}")]
    Data(String),
    #[error("size bound exceeded: {0}")]
    Size(String),
    #[error("structural error: {0}")]
    Structure(String),
    #[error("character table inconsistency: {0}")]
    Table(String),
    #[error("outside the degree window: {0}")]
    Window(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("degree mismatch: {0}")]
    Degree(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn from_json(source_name: &str, e: serde_json::Error) -> Error {
        Error::Parse {
            source_name: source_name.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
