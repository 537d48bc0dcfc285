use thiserror::Error;

/// Errors surfaced by the physics and numerics layers.
///
/// Instability and convergence failures are reported as errors, never as
/// NaN: a silent NaN would poison every mode sum downstream.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("unknown species '{0}' (not in the registry and no custom definition given)")]
    UnknownSpecies(String),

    #[error("degenerate coupling regime: g_em equals |g_g0| exactly ({0:e} J*m^3)")]
    DegenerateRegime(f64),

    #[error("the zero mode does not label an excitation")]
    ZeroMode,

    #[error("dynamical instability at shell n^2 = {n2}: dispersion radicand {radicand:e} < 0")]
    DynamicalInstability { n2: i64, radicand: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("no bracket: target {target:e} outside achievable range [{lo:e}, {hi:e}]")]
    NoBracket { target: f64, lo: f64, hi: f64 },

    #[error("quadrature node fell on the integrable singularity at the origin")]
    SingularityHandling,

    #[error("non-finite intermediate in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: physics/numerics failures map to 1,
    /// bad input maps to 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnknownSpecies(_) | Error::InvalidParameter(_) => 2,
            _ => 1,
        }
    }
}
