use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    Shape {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid tensor: {0}")]
    InvalidTensor(String),

    #[error("column {column} of the flattened tensor sums to {sum:.17e}, expected 1")]
    NotStochastic { column: usize, sum: f64 },

    #[error("negative entry {value:e} at row {row}, column {column}")]
    NegativeEntry { row: usize, column: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Every entry of the vector handed to the projection was nonpositive.
    #[error("degenerate projection: vector has no positive entries")]
    DegenerateProjection,

    #[error("matrix is singular to working precision (pivot {pivot})")]
    SingularMatrix { pivot: usize },

    #[error("initial residual is zero")]
    ZeroResidual,

    #[error("extrapolation coefficients are singular (coefficient sum {0:e})")]
    ExtrapolationSingular(f64),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}: {error}", path.display())]
    File { path: PathBuf, error: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            error: Box::new(self),
        }
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Shape {
            context,
            expected,
            found,
        })
    }
}
