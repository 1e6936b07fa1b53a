use thiserror::Error;

use crate::model::ConfigViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} ({left} vs {right})")]
    DimensionMismatch {
        context: &'static str,
        left: String,
        right: String,
    },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid configuration: {}", join_violations(.0))]
    InvalidConfig(Vec<ConfigViolation>),

    #[error("LOS amplitude beta={beta} out of range (need beta >= 0 and 2*beta^2 <= 1)")]
    BetaOutOfRange { beta: f64 },

    #[error("codebook needs at least as many vectors as antennas (N_vec={codebook_size} < M={antennas})")]
    CodebookTooSmall {
        antennas: usize,
        codebook_size: usize,
    },

    #[error("beam index {index} outside 1..={codebook_size}")]
    IndexOutOfRange { index: usize, codebook_size: usize },

    #[error("beam index {index} selected more than once")]
    DuplicateIndex { index: usize },

    #[error("selection has {got} beams, expected {expected}")]
    SelectionLength { got: usize, expected: usize },

    #[error("delay budget exceeded: alpha*K = {product} > 1")]
    DelayBudgetExceeded { product: f64 },

    #[error("PA saturated: required output power {required} exceeds rho_max {max}")]
    PaSaturated { required: f64, max: f64 },

    #[error("unsupported PA parameter: {0}")]
    UnsupportedPa(String),

    #[error("search space of {size} selections exceeds the cap of {cap}")]
    SearchSpaceTooLarge { size: f64, cap: u64 },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("missing required keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("invalid value for `{key}`: {value}")]
    InvalidValue { key: String, value: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join_violations(v: &[ConfigViolation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
