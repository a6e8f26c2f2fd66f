use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("p = {0} is excluded (residue characteristic 2 and 3 are not supported)")]
    ExcludedPrime(u32),
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("residue degree must be positive, got {0}")]
    InvalidDegree(u32),
    #[error("residue field of size {p}^{f} is too large")]
    ResidueFieldTooLarge { p: u32, f: u32 },
    #[error("operands live in different fields: {0} vs {1}")]
    FieldMismatch(String, String),
    #[error("inverse of zero")]
    InverseOfZero,
    #[error("value is zero only to precision {0}; its norm is undetermined")]
    InexactZero(i64),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("empty sampling stratum: {0}")]
    EmptyStratum(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("invalid curve configuration: {0}")]
    InvalidConfig(String),
    #[error("argument lies in q^Z: theta vanishes there")]
    ThetaZero,
    #[error("x*y lies in q^Z: g has a pole")]
    Pole,
    #[error("12 is not invertible in the coefficient ring")]
    NotDivisible,
    #[error("argument too close to 1 for the series denominators: {0}")]
    NearPole(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("resolution too coarse: {0}")]
    Resolution(String),
    #[error("eigensolver did not meet the residual bound: {0}")]
    Convergence(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulationError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("invalid simulation parameters: {0}")]
    InvalidParameters(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SkeletonError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("measure is not balanced: total mass {0}")]
    Unbalanced(String),
    #[error("invalid piecewise-affine function: {0}")]
    InvalidFunction(String),
    #[error("cannot retract: {0}")]
    Retraction(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HearingError {
    #[error("empty fingerprint")]
    EmptyFingerprint,
    #[error("invalid search window: {0}")]
    InvalidWindow(String),
    #[error("no candidate v(q) matches within tolerance (best residual {0:e})")]
    NoMatch(f64),
    #[error("ambiguous match: candidates {0:?} share the best residual")]
    Ambiguous(Vec<i64>),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}
