use tvgam::GamError;

/// Process exit status of each error class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Config = 2,
    Data = 3,
    NonConvergence = 4,
    BoundViolation = 5,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("{0}")]
    NonConvergence(String),

    #[error("{0}")]
    BoundViolation(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Config(_) => ExitCode::Config,
            Self::Data(_) => ExitCode::Data,
            Self::NonConvergence(_) => ExitCode::NonConvergence,
            Self::BoundViolation(_) => ExitCode::BoundViolation,
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Self::Data(format!("{}: {err}", path.display()))
    }
}

impl From<GamError> for CliError {
    fn from(err: GamError) -> Self {
        match err {
            GamError::InvalidParameter(_)
            | GamError::UnsupportedLoss(_)
            | GamError::UnboundedLoss { .. }
            | GamError::FeatureCountTooSmall { .. }
            | GamError::OracleTooLarge { .. } => Self::Config(err.to_string()),
            _ => Self::Data(err.to_string()),
        }
    }
}
