//! Benchmark harness: experiment configuration, parallel sweeps, CSV
//! records, summaries and SVG plots.

pub mod config;
pub mod experiments;
pub mod output;
pub mod records;
pub mod svg;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    /// Bad configuration or arguments.
    #[error("configuration error: {0}")]
    Config(String),
    /// A numerical routine failed.
    #[error("numerical error: {0}")]
    Numerical(#[from] metamix::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl BenchError {
    /// Process exit status: 2 for configuration, 3 for numerical, 1 for i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Numerical(_) => 3,
            BenchError::Io(_) | BenchError::Csv(_) => 1,
        }
    }
}
