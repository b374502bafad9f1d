use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid system parameter `{name}`: {reason}")]
    InvalidParams { name: &'static str, reason: String },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("antenna set must contain at least one antenna")]
    EmptyAntennaSet,

    #[error("antenna index {index} out of range for {n_antennas} antennas")]
    AntennaOutOfRange { index: usize, n_antennas: usize },

    #[error("antenna index {0} appears more than once")]
    DuplicateAntenna(usize),

    #[error("antenna set covers {set} antennas but the channel has {channel}")]
    DimensionMismatch { set: usize, channel: usize },

    #[error("power splitting ratio {0} is outside [0, 1]")]
    RatioOutOfRange(f64),

    #[error("amplification gain denominator vanished (lambda * R_omega + n * sigma_b^2 = 0)")]
    ZeroGainDenominator,

    #[error("objective denominator is non-positive ({0}); inputs violate the model invariants")]
    NonPositiveDenominator(f64),

    #[error("grid resolution {0} must lie in (0, 0.01]")]
    InvalidResolution(f64),

    #[error("exhaustive search refused: {n_antennas} antennas exceeds the limit of {limit} (2^N - 1 subsets)")]
    ExhaustiveLimit { n_antennas: usize, limit: usize },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown strategy `{tag}`; valid tags: {valid}")]
    UnknownStrategy { tag: String, valid: String },
}
