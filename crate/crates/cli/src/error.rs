use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("input error: {0}")]
    Input(String),

    #[error(transparent)]
    Physics(#[from] cqed::Error),

    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Physics(e) => match e {
                cqed::Error::Domain(_) | cqed::Error::OutOfValidity(_) => 2,
                cqed::Error::Degenerate(_)
                | cqed::Error::UndefinedCorrelation(_)
                | cqed::Error::DispersiveInvalid { .. } => 3,
                cqed::Error::Convergence(_) | cqed::Error::Numerical(_) => 4,
            },
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}
