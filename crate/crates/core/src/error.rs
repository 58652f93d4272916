use thiserror::Error;

/// Errors raised by the solvers and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// `(1 - p) * rho >= 1`: the queue has no stationary distribution.
    #[error("unstable regime: (1 - p) * rho = {load} >= 1 (p = {p}, rho = {rho})")]
    UnstableRegime { p: f64, rho: f64, load: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    /// The closed-form equilibrium does not apply; use the bisection solver.
    #[error("closed form not applicable: {0}")]
    NeedsBisection(String),

    #[error("divergence detected: state {state} exceeded cap {cap} with (1 - p) * rho = {load}")]
    DivergenceDetected { state: u64, cap: u64, load: f64 },
}

pub type Result<T> = std::result::Result<T, ModelError>;
