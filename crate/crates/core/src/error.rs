use thiserror::Error;

/// Errors produced by estimation, simulation and posterior construction.
#[derive(Error, Debug)]
pub enum Error {
    /// A parameter lies outside its admissible space.
    #[error("domain error: {0}")]
    Domain(String),

    /// Observed data violates a structural invariant.
    #[error("data error: {0}")]
    Data(String),

    /// An estimator cannot be formed from the given data.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// A numerically degenerate objective or posterior.
    #[error("degenerate: {0}")]
    Degenerate(String),

    /// The D-posterior normalizing integral carries no mass: the prior support
    /// does not intersect {theta : D(q, theta) < inf} on a set of positive measure.
    #[error("D-posterior undefined: {0}")]
    PosteriorUndefined(String),
}

pub type Result<T> = std::result::Result<T, Error>;
