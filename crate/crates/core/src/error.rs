use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: expected two integer node ids, got {content:?}")]
    Parse { line: usize, content: String },

    #[error("induced subgraph for degree ranks {lo}..={hi} is empty")]
    EmptySubgraph { lo: usize, hi: usize },

    #[error("invalid degree rank range {lo}..={hi} for {n} nodes")]
    RankRange { lo: usize, hi: usize, n: usize },

    #[error("invalid catalog: {0}")]
    Catalog(String),

    #[error("rho must lie in [-1, 1], got {0}")]
    Rho(f64),

    #[error("mean diversity of an empty network is undefined")]
    EmptyNetwork,

    #[error("graphs differ in node count ({0} vs {1})")]
    NodeCountMismatch(usize, usize),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("unknown sweep axis {0:?} (expected one of rho, pa, ns, p, k, l, gamma)")]
    Axis(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
