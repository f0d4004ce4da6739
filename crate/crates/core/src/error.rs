use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("flipping element {index} out of a selection of size {m} would leave fewer than two elements")]
    ForbiddenMove { index: usize, m: usize },

    #[error("solution selects {m} element(s); at least two are required")]
    Infeasible { m: usize },

    #[error("bit vector has length {got}, instance has {expected} elements")]
    LengthMismatch { expected: usize, got: usize },

    #[error("exhaustive search refuses n = {n} (cap is {cap})")]
    OracleTooLarge { n: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
