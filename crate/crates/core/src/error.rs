use thiserror::Error;

/// Failures raised by the propagation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("truncated norm {norm:.3e} is below 1 - {tail_tol:.1e}")]
    TailBudgetExceeded { norm: f64, tail_tol: f64 },

    #[error("Hermite recurrence left the normalized regime at n = {n}")]
    OverflowGuard { n: usize },

    #[error("grid too coarse: dq*dp = {cell:.4} exceeds hbar/4 = {limit:.4}")]
    GridTooCoarse { cell: f64, limit: f64 },

    #[error("grid does not cover radius {required:.3} (covers {covered:.3})")]
    GridTooSmall { required: f64, covered: f64 },

    #[error("t = {t} is outside the domain of {method} (requires t >= {min})")]
    Domain { method: &'static str, t: f64, min: f64 },

    #[error("empty orbit window at t = {t} (k_hi = {k_hi})")]
    EmptyWindow { t: f64, k_hi: i64 },

    #[error("root refinement did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("theta series needs more than {budget} terms (Im tau = {im_tau:.3e})")]
    SlowConvergence { budget: usize, im_tau: f64 },

    #[error("state is not a primitive WKB state: {0}")]
    NotPrimitiveWkb(String),

    #[error("segment [{s_lo}, {s_hi}] holds more than one crossing at the resolution bound")]
    UnresolvedSegment { s_lo: f64, s_hi: f64 },

    #[error("degenerate arc: trajectory endpoint sits on a turning point")]
    DegenerateArc,

    #[error("branch at q = {q} is on a caustic (|dq_f/dq_i| = {jacobian:.3e})")]
    CausticDivergence { q: f64, jacobian: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
