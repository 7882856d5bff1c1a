//! Parameter-scan runner for the geometric Landau–Zener interferometer.
//!
//! Each experiment expands a [`config::ScanConfig`] into independent grid
//! points, evaluates them on a rayon pool, and returns tables in grid order.
//! [`output::write_report`] persists them as CSV files with JSON sidecars.

pub mod config;
pub mod experiments;
pub mod format;
pub mod oracle;
pub mod output;
pub mod runner;
pub mod svg;

use thiserror::Error;

pub use config::{ConfigError, Experiment, ScanConfig};
pub use experiments::{run_experiment, Report};

/// Version string recorded in every sidecar.
pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum ScanError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("worker pool: {0}")]
    Pool(String),
}

impl ScanError {
    /// Process exit status: 2 for configuration errors, 3 for numerical
    /// failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScanError::Config(_) => 2,
            ScanError::Numerical(_) => 3,
            ScanError::Io { .. } | ScanError::Pool(_) => 1,
        }
    }
}

impl From<glzi_core::protocol::ProtocolError> for ScanError {
    fn from(e: glzi_core::protocol::ProtocolError) -> Self {
        ScanError::Numerical(e.to_string())
    }
}

impl From<glzi_core::metrics::MetricsError> for ScanError {
    fn from(e: glzi_core::metrics::MetricsError) -> Self {
        ScanError::Numerical(e.to_string())
    }
}

impl From<glzi_core::battery::BatteryError> for ScanError {
    fn from(e: glzi_core::battery::BatteryError) -> Self {
        ScanError::Numerical(e.to_string())
    }
}
