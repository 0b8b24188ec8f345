use circlewalk_core::analysis::AnalysisError;
use circlewalk_core::io::IoError;
use circlewalk_core::packer::PackError;
use circlewalk_core::samplers::SamplerError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Input { path: String, source: IoError },
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Pack(#[from] PackError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("statistical check failed: {0}")]
    Check(String),
}

impl CliError {
    /// 2 for configuration and input problems, 3 for numerical
    /// non-convergence, 4 for failed statistical checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Pack(PackError::NoConvergence { .. } | PackError::LayoutInconsistent { .. }) => 3,
            CliError::Analysis(AnalysisError::NotConverged | AnalysisError::UnconvergedPacking(_)) => 3,
            CliError::Analysis(AnalysisError::TrajectoryExitsWindow { .. }) | CliError::Check(_) => 4,
            _ => 2,
        }
    }
}
