use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared across the library. Validation variants carry the measured
/// deviation so callers can report which invariant failed and by how much.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("NotHermitian: max |A - A^dag| = {deviation:.3e} exceeds 1e-10")]
    NotHermitian { deviation: f64 },
    #[error("NotPSD: minimum eigenvalue {min_eigenvalue:.3e} below -1e-10")]
    NotPsd { min_eigenvalue: f64 },
    #[error("TraceNotOne: |tr - 1| = {deviation:.3e} exceeds 1e-10")]
    TraceNotOne { deviation: f64 },
    #[error("DimMismatch: {0}")]
    DimMismatch(String),
    #[error("BadSubsystemIndex: index {index} out of range for {count} subsystems")]
    BadSubsystemIndex { index: usize, count: usize },
    #[error("BadCut: {0}")]
    BadCut(String),
    #[error("BadDimension: {0}")]
    BadDimension(String),
    #[error("NonUniformDims: protocol requires equal qudit dimensions, got {0:?}")]
    NonUniformDims(Vec<usize>),
    #[error("NotTwoQubits: grid certification requires dims [2, 2], got {0:?}")]
    NotTwoQubits(Vec<usize>),
    #[error("LengthMismatch: parameter vector has length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("NotClassical: state failed classicality certification (residual {0:.3e})")]
    NotClassical(f64),
    #[error("NotUnitary: max |U U^dag - I| = {deviation:.3e} exceeds 1e-10")]
    NotUnitary { deviation: f64 },
    #[error("NotNormalized: |norm - 1| = {deviation:.3e} exceeds 1e-10")]
    NotNormalized { deviation: f64 },
    #[error("BadStateFile: {0}")]
    BadStateFile(String),
    #[error("ResourceCap: {0}")]
    ResourceCap(String),
    #[error("InvariantViolated: {0}")]
    InvariantViolated(String),
}
