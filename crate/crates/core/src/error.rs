use std::path::PathBuf;

use crate::mesh::Face;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("element {element} out of range (mesh has {count} elements)")]
    ElementOutOfRange { element: usize, count: usize },

    #[error("element {element} is degenerate (|J| = {det:e})")]
    DegenerateElement { element: usize, det: f64 },

    #[error("unsupported quadrature order {0} (expected 1, 2 or 3)")]
    UnsupportedQuadrature(usize),

    #[error("face {face} of element {element} is not on the exterior boundary")]
    NotBoundaryFace { element: usize, face: Face },

    #[error("conflicting Dirichlet values at node {node}: {first} vs {second}")]
    DirichletConflict { node: usize, first: f64, second: f64 },

    #[error("no boundary condition assigned to face set `{0}`")]
    UncoveredFace(Face),

    #[error("linear solve did not converge: relative residual {residual:e} after {iterations} iterations")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("matrix factorization failed: {0}")]
    Factorization(String),

    #[error("config error in `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("series error: {0}")]
    Series(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 validation, 2 solver, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. } | Error::Factorization(_) => 2,
            Error::Io { .. } => 3,
            _ => 1,
        }
    }
}
