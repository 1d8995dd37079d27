use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;
pub const EXIT_ACCEPTANCE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("[{stage}] computation failed: {message}")]
    Computation { stage: &'static str, message: String },
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn stage(stage: &'static str, e: impl std::fmt::Display) -> Self {
        Self::Computation { stage, message: e.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::BadInput(_) | Self::Io { .. } => EXIT_BAD_INPUT,
            Self::Computation { .. } => EXIT_COMPUTATION,
        }
    }
}
