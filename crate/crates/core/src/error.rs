use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Lamé condition fails: alpha = {alpha} must exceed 1 - 1/N = {bound} (N = {dim})")]
    DegenerateLame { alpha: f64, dim: usize, bound: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("function is singular at vacuum (rho = {rho}) for alpha = {alpha}")]
    VacuumSingular { rho: f64, alpha: f64 },

    #[error("alpha = {alpha} <= m_c = {m_c}: extinction regime, use ExtinctionSolution")]
    ExtinctionRegime { alpha: f64, m_c: f64 },

    #[error("theta = gamma = {0}: no scaling invariance")]
    NoScalingInvariance(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("dt = {dt} exceeds stability limit {limit}")]
    StabilityViolation { dt: f64, limit: f64 },

    #[error("non-finite value at t = {time} in cell {cell}")]
    NonFinite { time: f64, cell: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("inconsistent snapshot triple: {0}")]
    InconsistentTriple(String),

    #[error("need at least {required} snapshots, found {found}")]
    InsufficientSnapshots { found: usize, required: usize },

    #[error("not applicable: {0}")]
    NotApplicable(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
