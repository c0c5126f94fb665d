use std::path::PathBuf;

use crate::formats::ParseError;

/// Exit codes, stable across releases.
pub mod exit {
    pub const OK: u8 = 0;
    pub const TOLERANCE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const VALIDATION: u8 = 4;
    pub const SOLVER: u8 = 5;
    pub const INSUFFICIENT_DECAY: u8 = 6;
    pub const IO: u8 = 7;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error in {}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("solver failed: {0}")]
    Solver(marchenko::Error),
    #[error("{0}")]
    InsufficientDecay(marchenko::Error),
    #[error("i/o error on {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Parse { .. } => exit::PARSE,
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Solver(_) => exit::SOLVER,
            CliError::InsufficientDecay(_) => exit::INSUFFICIENT_DECAY,
            CliError::Io { .. } => exit::IO,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Parse { .. } => "parse",
            CliError::Validation(_) => "validation",
            CliError::Solver(_) => "solver",
            CliError::InsufficientDecay(_) => "insufficient-decay",
            CliError::Io { .. } => "io",
        }
    }
}

impl From<marchenko::Error> for CliError {
    fn from(e: marchenko::Error) -> Self {
        use marchenko::Error as E;
        match e {
            E::InsufficientDecay { .. } => CliError::InsufficientDecay(e),
            E::NonSquare { .. }
            | E::NonUnitary { .. }
            | E::ShapeMismatch(_)
            | E::InvalidGrid(_)
            | E::InvalidPotential(_)
            | E::Inadmissible(_)
            | E::NotDiagonal { .. }
            | E::GridMismatch(_) => CliError::Validation(e.to_string()),
            _ => CliError::Solver(e),
        }
    }
}
