use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid size {n}: {reason}")]
    Shape { n: usize, reason: &'static str },

    #[error("array `{name}` has {got} values, expected {expected}")]
    Length {
        name: &'static str,
        expected: usize,
        got: usize,
    },

    #[error(
        "cell (i={i}, j={j}) violates tensor invariants: a_xx={a_xx:e}, a_xy={a_xy:e}, a_yy={a_yy:e}"
    )]
    NotPositiveDefinite {
        i: usize,
        j: usize,
        a_xx: f64,
        a_xy: f64,
        a_yy: f64,
    },

    #[error("field file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(
        "factorization failed at pivot {pivot}; field eigenvalues span [{min_eigenvalue:e}, {max_eigenvalue:e}]"
    )]
    Singular {
        pivot: usize,
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("dense block is numerically singular (pivot ratio {pivot_ratio:e})")]
    SingularBlock { pivot_ratio: f64 },

    #[error("invalid channel spec: {0}")]
    ChannelSpec(String),

    #[error("no percolating channel after {attempts} attempts (seed {seed})")]
    Percolation { seed: u64, attempts: u32 },

    #[error("invalid upscale plan: {0}")]
    Plan(String),

    #[error("invalid survey config: {0}")]
    Config(String),

    #[error("ensemble aborted: only {admissible} of {total} exact solves admissible")]
    Inadmissible { admissible: usize, total: usize },

    #[error("{0}")]
    Domain(String),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
