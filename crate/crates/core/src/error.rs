use thiserror::Error;

/// Failures raised by the physics, sampling and saddle routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A potential or force was evaluated on a Coulomb singularity.
    #[error("singular evaluation: {0}")]
    Singular(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The static field vanishes, so no Stark saddle exists.
    #[error("no saddle exists at zero field")]
    ZeroField,

    /// An eigenvalue sits within the degeneracy threshold of zero.
    #[error("degenerate spectrum: eigenvalue {value:e} at index {index}")]
    DegenerateSpectrum { index: usize, value: f64 },

    /// The rejection sampler exhausted its retry budget.
    #[error("rejection sampling exceeded {budget} retries (check energy and region)")]
    RejectionOverflow { budget: u32 },

    #[error("predicate does not change sign along the trajectory")]
    NoCrossing,

    #[error("empty ensemble: no double-ionized outcomes")]
    EmptyEnsemble,
}

pub type Result<T> = std::result::Result<T, Error>;
