use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("mode registry is empty")]
    EmptyRegistry,

    #[error("mode {0} is not registered")]
    UnknownMode(usize),

    #[error("mode name `{0}` is not registered")]
    UnknownModeName(String),

    #[error("duplicate mode: {0}")]
    DuplicateMode(String),

    #[error("states live on different mode registries")]
    RegistryMismatch,

    #[error("photon cutoff exceeded: {total} photons > cutoff {cutoff}")]
    CutoffExceeded { total: u32, cutoff: u32 },

    #[error("cannot normalize the zero state")]
    ZeroState,

    #[error("amplitudes are not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("beam splitter matrix is not unitary (deviation {deviation:e})")]
    NonUnitary { deviation: f64 },

    #[error("beam splitter needs two distinct modes, got {0} twice")]
    DegenerateBeamSplitter(usize),

    #[error("mode mapping is not a bijection over {modes} modes")]
    NotBijective { modes: usize },

    #[error("detector coverage overlaps on mode {0}")]
    OverlappingDetectors(usize),

    #[error("detector `{0}` covers no modes")]
    EmptyDetector(String),

    #[error("detector efficiency {0} outside [0, 1]")]
    InvalidEfficiency(f64),

    #[error("expected {expected} values, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("state leaves the single-photon subspace (stray amplitude {amplitude:e})")]
    SubspaceViolation { amplitude: f64 },

    #[error("heralded ensemble is empty")]
    EmptyEnsemble,

    #[error("dense basis too large: {size} > {limit}")]
    BasisTooLarge { size: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
