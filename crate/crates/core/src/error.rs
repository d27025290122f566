use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("not invertible: map has zero ratio")]
    NotInvertible,
    #[error("no fixed point: map has ratio 1")]
    NoFixedPoint,
    #[error("invalid interval: lower endpoint {lo} exceeds upper endpoint {hi}")]
    InvalidInterval { lo: String, hi: String },
    #[error("not a contraction: map {index} has ratio {ratio}")]
    NotContraction { index: usize, ratio: String },
    #[error("parameter {name} = {value} violates {bound}")]
    ParameterOutOfRange {
        name: &'static str,
        value: String,
        bound: String,
    },
    #[error("symbol {symbol} is outside the alphabet 1..={alphabet}")]
    BadSymbol { symbol: u8, alphabet: usize },
    #[error("words have unequal lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid address: period must be nonempty")]
    EmptyPeriod,
    #[error("cover depth {depth} exceeds the full-enumeration cap {cap}; use a Moran cut or targeted refinement")]
    DepthCap { depth: usize, cap: usize },
    #[error("hull assumption violated: cylinder {word} = {interval} leaves [0,1]")]
    HullAssumption { word: String, interval: String },
    #[error("system is not of the six-map parametric shape: {0}")]
    NotParametricShape(String),
    #[error("refinement step cap {cap} exceeded on branch {w1} / {w2}")]
    StepCapExceeded { cap: usize, w1: String, w2: String },
    #[error("dimension 0 system: Moran function never exceeds 1")]
    DimensionZero,
    #[error("invalid Moran problem: {0}")]
    InvalidMoran(String),
    #[error("solver failed to bracket a root: {0}")]
    Bracket(String),
    #[error("need at least {need} covers at distinct scales, got {got}")]
    TooFewCovers { need: usize, got: usize },
    #[error("value {value} lies outside D_mn = {domain}")]
    OutsideDomain { value: String, domain: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}
