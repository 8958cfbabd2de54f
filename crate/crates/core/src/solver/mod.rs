//! Configuration, the time loop, snapshots and the compression tool.

mod adaptive;
mod compress;
mod config;
mod output;
mod run;
mod setup;
mod verify;

pub use adaptive::{AdaptiveSolver, KernelCounts};
pub use compress::{compress, parse_text_grid, read_grid, CompressReport};
pub use config::{AdvectionConfig, EulerConfig, NsConfig, Profile, ProblemId, RunConfig, Wall};
pub use output::{
    fmt_f64, read_cells_csv, write_cells_csv, CellRow, GridDump, MetricsWriter, GRID_MAGIC,
};
pub use run::{output_dir, run, RunSummary, Simulation, StepRecord};
pub use setup::{ObstacleSetup, ProblemSetup};
pub use verify::{verify, Check};

use thiserror::Error;

use crate::diagnostics::DiagnosticsError;
use crate::lbm::LbmError;
use crate::mesh::MeshError;
use crate::multiresolution::MrError;
use crate::schemes::SchemeError;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(String),
    #[error("step {step}: {source}")]
    Numerical { step: u64, source: LbmError },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Multiresolution(#[from] MrError),
    #[error(transparent)]
    Lbm(#[from] LbmError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SolverError {
    /// Process exit code: 2 for configuration problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Scheme(_) | Self::Mesh(_) => 2,
            Self::Numerical { .. } | Self::Lbm(_) | Self::Multiresolution(_) | Self::Diagnostics(_) => 3,
            Self::Input(_) | Self::Io(_) => 1,
        }
    }
}
