use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cutoff {omega_cutoff:e} rad/s admits no modes (fundamental at {fundamental:e} rad/s)")]
    CutoffTooLow { omega_cutoff: f64, fundamental: f64 },

    #[error(
        "mode sum not converged: cutoff {cutoff:e} rad/s gives {value:e}, half cutoff gives {half:e} \
         (relative change {relative_change:.3e})"
    )]
    Convergence {
        cutoff: f64,
        value: f64,
        half: f64,
        relative_change: f64,
    },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("force sampled too coarsely: omega * step = {0:.3} (needs < 0.1)")]
    Resolution(f64),

    #[error("time step too large: omega_max * step = {0:.3e} (needs < 0.05)")]
    StepSize(f64),

    #[error("invalid lattice: {0}")]
    Lattice(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numerical failures, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence { .. }
                | Error::Integration(_)
                | Error::Resolution(_)
                | Error::StepSize(_)
        )
    }

    /// Short stable code used in sweep failure records.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "E_DOMAIN",
            Error::InvalidParameter(_) => "E_PARAMETER",
            Error::CutoffTooLow { .. } => "E_CUTOFF",
            Error::Convergence { .. } => "E_CONVERGENCE",
            Error::Integration(_) => "E_INTEGRATION",
            Error::Resolution(_) => "E_RESOLUTION",
            Error::StepSize(_) => "E_STEP",
            Error::Lattice(_) => "E_LATTICE",
            Error::Config(_) => "E_CONFIG",
            Error::Io(_) => "E_IO",
        }
    }
}
