use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sequences are identical as infinite words")]
    IdenticalSequences,

    #[error("{what}: {requested} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("strong separation violated at lambda = {lambda}")]
    SeparationViolated { lambda: f64 },

    #[error("lambda = {lambda} lies outside the parameter interval [{lo}, {hi}]")]
    OutOfRange { lambda: f64, lo: f64, hi: f64 },

    #[error("Moran equation has no root in (0, 1]: sum of ratios is {sum}")]
    NoRoot { sum: f64 },

    #[error("interval union has no bounded gap")]
    NoGaps,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("ball radius {radius} is below twice the bin width {bin_width}")]
    ResolutionTooCoarse { radius: f64, bin_width: f64 },

    #[error("cylinder length {cylinder} exceeds the bin width {bin_width}")]
    ResolutionMismatch { cylinder: f64, bin_width: f64 },

    #[error("histogram bin widths differ: {0} vs {1}")]
    BinMismatch(f64, f64),

    #[error("lambda grid step {step} is coarser than r/10 for r = {radius}")]
    GridTooCoarse { step: f64, radius: f64 },

    #[error("no exponent triple satisfies the dimension balance: {0}")]
    InfeasibleTriple(String),

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
