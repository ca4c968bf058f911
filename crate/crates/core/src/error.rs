use thiserror::Error;

/// Errors raised by the determinant laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("truncation is not invertible to working precision (pivot {pivot} has modulus {modulus:e})")]
    Singular { pivot: usize, modulus: f64 },

    #[error("least-squares design is rank deficient (condition estimate {condition:e}); use fewer exponents or a wider window")]
    RankDeficient { condition: f64 },

    #[error("invalid sample window: {0}")]
    Window(String),

    #[error("operator norm {norm:.4} of I - B/s exceeds {limit}; rescale the operator or reject it")]
    LogSeriesDiverges { norm: f64, limit: f64 },

    #[error("riemann zeta has a pole at s = 1")]
    ZetaPole,

    #[error("argument {0} outside the supported range")]
    OutOfRange(String),

    #[error("decomposition identity needs bandwidth * r <= n (bandwidth {bandwidth}, r {r}, n {n})")]
    EdgeAmbiguity { bandwidth: usize, r: usize, n: usize },

    #[error("operator is not of order <= -1: diagonal coefficient c0 = {c0:e}")]
    NotDecaying { c0: f64 },

    #[error("function is not positive: {0}")]
    NotPositive(String),

    #[error("symbol grids are not conformable: {0}")]
    GridMismatch(String),

    #[error("symbol degree {found} where {expected} is required")]
    Degree { expected: String, found: i32 },

    #[error("product of log-type symbols is outside the calculus")]
    LogProduct,

    #[error("operators cannot be combined: {0}")]
    Combine(String),

    #[error("evaluation point {0} lies on the pole lattice")]
    OnPole(String),

    #[error("spec error: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
