use thiserror::Error;

/// Errors raised by the kernel engine.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SzegoError {
    #[error("beta = {beta} must exceed pi")]
    BetaOutOfRange { beta: f64 },
    #[error("h = {h} outside the open interval ({lo}, {hi})")]
    HOutOfRange { h: f64, lo: f64, hi: f64 },
    #[error("tolerance {0} must be positive and finite")]
    InvalidTolerance(f64),
    #[error("face {face}: parameter {value} outside [{lo}, {hi}]")]
    FaceRange { face: String, value: f64, lo: f64, hi: f64 },
    #[error("approach path leaves the domain at eps = {eps}: {reason}")]
    PathLeavesDomain { eps: f64, reason: String },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("decay rate {0} is not positive")]
    NoDecay(f64),
    #[error("tolerance not met: value = {re}{im:+}i, err_est = {err_est:e}, tol = {tol:e}")]
    ToleranceNotMet { re: f64, im: f64, err_est: f64, tol: f64 },
    #[error("series diverges: ratio {ratio} >= 1")]
    SeriesDiverged { ratio: f64 },
    #[error("point outside the domain: {violated}")]
    OutsideDomain { violated: String },
    #[error("unstable fit: {0}")]
    FitUnstable(String),
    #[error("no Bergman template matches configuration {0}")]
    NoMatchingTemplate(String),
    #[error("unknown face '{0}'")]
    UnknownFace(String),
    #[error("test function nearly vanishes at the test point (|F(z)| = {0:e})")]
    TestPointDegenerate(f64),
}

pub type Result<T> = std::result::Result<T, SzegoError>;
