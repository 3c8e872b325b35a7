use std::path::PathBuf;

use thiserror::Error;

use painleve_core::Error as CoreError;

/// Process exit statuses. No other values are ever returned.
pub const EXIT_OK: u8 = 0;
pub const EXIT_SOLVER: u8 = 2;
pub const EXIT_CHECK: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing artifact {}", .0.display())]
    MissingArtifact(PathBuf),

    #[error("{failed} of {total} verification checks failed")]
    ChecksFailed { failed: usize, total: usize },

    #[error("verification report is incomplete: {0}")]
    IncompleteReport(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Write { .. } => EXIT_IO,
            Self::MissingArtifact(_) => EXIT_SOLVER,
            Self::ChecksFailed { .. } | Self::IncompleteReport(_) => EXIT_CHECK,
            Self::Core(e) => match e {
                CoreError::NonPhysical(_) => EXIT_CHECK,
                CoreError::NewtonDiverged { .. } | CoreError::Linalg(_) => EXIT_SOLVER,
                CoreError::GridMismatch | CoreError::OutOfDomain(..) => EXIT_SOLVER,
                CoreError::InvalidGrid(_) | CoreError::InvalidConfig(_) => EXIT_IO,
                CoreError::Parse(_) | CoreError::Io(_) => EXIT_IO,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_follow_the_outcome_classes() {
        let cases: Vec<(CliError, u8)> = vec![
            (CoreError::NonPhysical("x".into()).into(), 3),
            (
                CoreError::NewtonDiverged {
                    iterations: 3,
                    residual: 1.0,
                }
                .into(),
                2,
            ),
            (CoreError::Linalg("x".into()).into(), 2),
            (CoreError::InvalidConfig("x".into()).into(), 4),
            (CoreError::Parse("x".into()).into(), 4),
            (CliError::MissingArtifact("y.csv".into()), 2),
            (CliError::ChecksFailed { failed: 1, total: 2 }, 3),
            (CliError::Config("x".into()), 4),
        ];
        for (err, code) in cases {
            assert_eq!(err.exit_code(), code, "{err}");
        }
    }
}
