use thiserror::Error;

use crate::special::DomainError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Domain(#[from] DomainError),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The sample carries no information about a spread parameter
    /// (for instance every answer is identical).
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// Cell merging left too few cells for a χ² test with at least one
    /// degree of freedom.
    #[error("untestable: {cells} cell(s) left after merging, {fitted} fitted parameter(s)")]
    Untestable { cells: usize, fitted: usize },

    #[error(transparent)]
    Data(#[from] crate::dataset::DataError),
}
