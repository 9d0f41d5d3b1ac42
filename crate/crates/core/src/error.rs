use thiserror::Error;

/// Errors raised by the metrology toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The binary statistic is deterministic at this operating point.
    #[error("degenerate operating point: {0}")]
    Degenerate(String),

    #[error("fisher matrix has non-positive trace {0}")]
    ZeroTrace(f64),

    #[error("fock cutoff {cutoff} too small: {reason}")]
    CutoffTooSmall { cutoff: usize, reason: String },

    #[error("retained eigenspace carries trace {retained}, expected at least 1 - 1e-6")]
    DegenerateSupport { retained: f64 },

    #[error("finite-difference QFIM drifted by {drift:e} under step halving (tolerance {tol:e})")]
    NotConverged { drift: f64, tol: f64 },

    /// The quadratic term dominates the susceptibility window.
    #[error("susceptibility window too wide: relative curvature {curvature:.3} exceeds {limit}")]
    Nonlinear { curvature: f64, limit: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("`{name}` = {value} outside the open interval ({lo}, {hi})")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("visibility is zero; the phase cannot be inverted")]
    ZeroVisibility,

    #[error("ill-conditioned fringe design: {0}")]
    IllConditioned(String),

    #[error("no crossover found for N up to {n_max}")]
    SearchExhausted { n_max: u32 },

    #[error("degenerate counts: n0 = {n0} of {mu} shots")]
    DegenerateCounts { n0: u64, mu: u64 },

    #[error("bootstrap dropped {dropped} of {total} resamples as degenerate")]
    BootstrapDropped { dropped: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
