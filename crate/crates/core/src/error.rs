use thiserror::Error;

/// Errors shared across the simulation and analysis modules.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),

    #[error("grid of {nodes} nodes exceeds the memory cap of {cap}")]
    GridTooLarge { nodes: usize, cap: usize },

    #[error("time {t} is more than dt/2 away from the nearest grid node")]
    OffGrid { t: f64 },

    #[error("time {t} outside the path span [{t_start}, {t_end}]")]
    OutOfRange { t: f64, t_start: f64, t_end: f64 },

    #[error("path must bracket t = 0 (got span [{t_start}, {t_end}])")]
    MissingOrigin { t_start: f64, t_end: f64 },

    #[error("pre-history of {have:.4} time units is shorter than the required {needed:.4}")]
    InsufficientPrehistory { needed: f64, have: f64 },

    #[error("path span [{t_start}, {t_end}] too short for horizon {needed}")]
    PathTooShort {
        t_start: f64,
        t_end: f64,
        needed: f64,
    },

    #[error("decay rate must be positive (non-resonance), got g = {0}")]
    ResonanceViolated(f64),

    #[error("{what} undefined for sigma_eff = {sigma_eff} (requires |sigma_eff| < {threshold})")]
    MomentUndefined {
        what: &'static str,
        sigma_eff: f64,
        threshold: f64,
    },

    #[error("dissipation condition violated: coupling product {product} > 0 for stable mode {mode}")]
    DissipationViolated { mode: usize, product: f64 },

    #[error("cross-coupling tensor entries required but not supplied")]
    MissingCouplings,

    #[error("state blew past the cap at t = {t}: |{what}| = {value:.3e}")]
    BlowUp {
        what: &'static str,
        t: f64,
        value: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("truncation must retain mode {0}")]
    TruncationTooSmall(&'static str),

    #[error("quadrature did not stabilize: refinement moved the value by {delta:.3e}")]
    QuadratureUnstable { delta: f64 },
}

pub type Result<T> = std::result::Result<T, CoreError>;
