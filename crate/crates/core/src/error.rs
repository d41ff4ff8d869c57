use thiserror::Error;

/// Errors raised by the link-level models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("distance {0} m is below the 1 m validity limit of the path-loss model")]
    DistanceTooShort(f64),
    #[error("carrier frequency must be positive, got {0} GHz")]
    InvalidFrequency(f64),
    #[error("invalid Rician parameters: kappa = {kappa}, path gain = {path_gain}")]
    InvalidRician { kappa: f64, path_gain: f64 },
    #[error("RIS group sizes {n1} + {n2} + {n3} do not add up to {total}")]
    GroupSizeMismatch {
        n1: usize,
        n2: usize,
        n3: usize,
        total: usize,
    },
    #[error("at least one receive antenna is required")]
    NoReceiveAntennas,
    #[error("unsupported constellation: {0}")]
    UnsupportedConstellation(&'static str),
    #[error("invalid TIM layout: K = {slots}, L = {info}")]
    InvalidLayout { slots: usize, info: usize },
    #[error("the curated codebook only exists for K = 4, L = 2 (got K = {slots}, L = {info})")]
    CuratedUnavailable { slots: usize, info: usize },
    #[error("codebook would need 2^{0} codewords")]
    CodebookTooLarge(u32),
    #[error("expected {expected} bits, got {actual}")]
    BitLength { expected: usize, actual: usize },
    #[error("time-index vector is not a legitimate codeword")]
    IllegitimateIndexSet,
    #[error("symbol label {label} out of range for a {order}-point constellation")]
    SymbolLabel { label: usize, order: usize },
    #[error("high-power level {high} W must be at least the information power {low} W")]
    PowerOrdering { low: f64, high: f64 },
    #[error("rectenna parameters invalid (efficiency {efficiency}, turn-on {turn_on} W, saturation {saturation} W)")]
    InvalidRectenna {
        efficiency: f64,
        turn_on: f64,
        saturation: f64,
    },
    #[error("rectenna input power must be non-negative, got {0} W")]
    NegativePower(f64),
    #[error(
        "only 2-bit phase resolution has a designated info pair and power phase, got {0} bits"
    )]
    UnsupportedPhaseResolution(u32),
    #[error("phase assignment {0:?} must pick three distinct levels out of three")]
    InvalidPhaseAssignment([usize; 3]),
    #[error("noise variance must be positive for LLR detection, got {0}")]
    NonPositiveNoise(f64),
    #[error("noise variance must be non-negative, got {0}")]
    NegativeNoise(f64),
    #[error("controller group size and element count must be at least 1")]
    InvalidBudget,
}
