use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid growth function: {0}")]
    InvalidGrowth(String),

    #[error("invalid history: {0}")]
    InvalidHistory(String),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("state became negative ({value:e}) at t = {t}")]
    NegativeState { t: f64, value: f64 },

    #[error("non-finite value produced at t = {t}")]
    NonFinite { t: f64 },

    #[error("blow-up guard tripped at t = {t}: |x| = {norm:e} exceeds {limit:e}")]
    BlowUp { t: f64, norm: f64, limit: f64 },

    #[error("criminal population {value:e} exceeds growth envelope {bound:e} at t = {t}")]
    EnvelopeViolated { t: f64, value: f64, bound: f64 },

    #[error("time {t} outside of [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("operation requires constant law enforcement")]
    RequiresConstantEnforcement,

    #[error("operation requires periodic law enforcement or an explicit period")]
    RequiresPeriod,

    #[error("point is not an equilibrium (residual {residual:e})")]
    NotAnEquilibrium { residual: f64 },

    #[error("delay matrix is not singular (det B = {det:e})")]
    NonSingularDelayMatrix { det: f64 },

    #[error("crossing inconsistency: residual {residual:e} after polishing")]
    CrossingInconsistency { residual: f64 },

    #[error("contour kept passing through a root after {retries} retries")]
    ContourHitsRoot { retries: usize },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("degenerate degree certificate: {0}")]
    DegenerateCertificate(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("criminal population goes extinct (min C = {min_c:e})")]
    Extinction { min_c: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Faults that come out of the numerics rather than bad input.
    pub fn is_numeric_fault(&self) -> bool {
        matches!(
            self,
            Error::NegativeState { .. }
                | Error::NonFinite { .. }
                | Error::BlowUp { .. }
                | Error::EnvelopeViolated { .. }
                | Error::CrossingInconsistency { .. }
                | Error::ContourHitsRoot { .. }
                | Error::DegenerateCertificate(_)
                | Error::NoConvergence { .. }
                | Error::Extinction { .. }
                | Error::NotAnEquilibrium { .. }
        )
    }
}
