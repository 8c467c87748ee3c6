use thiserror::Error;

/// Errors produced by the simulator core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |H - H^dagger| = {asymmetry:.3e} (tolerance {tolerance:.3e})")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("Jacobi iteration did not converge within {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("ratio normalizer {which} has magnitude {value:.3e}, ratio table undefined")]
    ZeroNormalizer { which: &'static str, value: f64 },

    #[error("two-photon frame offset |delta_g| = {delta_g:.3e} rad/s exceeds cavity decay kappa = {kappa:.3e} rad/s")]
    InvalidFrame { delta_g: f64, kappa: f64 },

    #[error("time step {dt:.3e} s too large: dt * max_rate = {product:.3e} > {limit}")]
    StepTooLarge { dt: f64, product: f64, limit: f64 },

    #[error("state amplitude became non-finite or exceeded 1e12 at t = {t:.6e} s")]
    NonFiniteState { t: f64 },

    #[error("input energy {energy:.3e} is below 1e-12")]
    ZeroInput { energy: f64 },

    #[error("signal probability is zero")]
    ZeroSignal,

    #[error("config line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
}

impl Error {
    /// Short stable identifier, used by the CLI for diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::ZeroNormalizer { .. } => "ZeroNormalizer",
            Error::InvalidFrame { .. } => "InvalidFrame",
            Error::StepTooLarge { .. } => "StepTooLarge",
            Error::NonFiniteState { .. } => "NonFiniteState",
            Error::ZeroInput { .. } => "ZeroInput",
            Error::ZeroSignal => "ZeroSignal",
            Error::ConfigParse { .. } => "ConfigParseError",
            Error::InvalidParameter { .. } => "InvalidParameter",
        }
    }

    /// True for errors caused by bad user input rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::ConfigParse { .. } | Error::InvalidParameter { .. })
    }

    pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
