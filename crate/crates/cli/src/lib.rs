//! Command-line front end: JSON configs, experiment runners and file output.

pub mod commands;
pub mod config;

pub use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] delayfts_core::Error),

    /// A feasibility guarantee was requested but the condition fails.
    #[error("condition not satisfied: {0}")]
    Infeasible(String),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Process exit status: 2 for a failed guarantee, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Infeasible(_) => 2,
            _ => 1,
        }
    }
}
