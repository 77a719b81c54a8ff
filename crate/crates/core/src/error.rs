use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("point {0} is not strictly inside the unit disc")]
    OutsideDisc(Complex64),

    #[error("phase {0} is not unimodular")]
    NotUnimodular(Complex64),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("a zero of modulus {modulus} lies on the quadrature circle r = {radius}; perturb r")]
    RadiusNudge { radius: f64, modulus: f64 },

    #[error("quadrature did not converge below {tolerance:e} with {nodes} nodes (last change {change:e})")]
    QuadratureNotConverged {
        nodes: usize,
        change: f64,
        tolerance: f64,
    },

    #[error("invalid basepoint: {0}")]
    InvalidBasepoint(String),

    #[error("covering of the disc minus {punctures} points is not supported")]
    UnsupportedCovering { punctures: usize },

    #[error("lifting obstruction at lambda = {at}: |B'(psi)| = {derivative:e}")]
    LiftingObstruction { at: Complex64, derivative: f64 },

    #[error("perturbation failure: {0}")]
    PerturbationFailure(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("disc leaves its domain: boundary margin {margin:e} at theta = {theta}")]
    InfeasibleDisc { margin: f64, theta: f64 },

    #[error("disc is identically equal to the target point")]
    DegenerateDisc,

    #[error("target point is not attained inside the disc")]
    NotAttained,

    #[error("no closed-form Green function for this domain")]
    NoOracle,

    #[error("no factor value available for the lower bound")]
    NoFactorValue,

    #[error("invalid level N = {0}")]
    InvalidLevel(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no feasible disc found across {restarts} restarts")]
    NoBound { restarts: usize },

    #[error("no radius up to 1 - 2^-{max_index} satisfies the Jensen bound")]
    RadiusSearchExhausted { max_index: u32 },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
