use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input grid is empty")]
    EmptyInput,

    #[error("ragged input: row {row} has {found} entries, expected {expected}")]
    RaggedInput {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("entry ({row}, {col}) is not a finite number")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("entry ({row}, {col}) is negative: {value}")]
    NegativeEntry {
        row: usize,
        col: usize,
        value: String,
    },

    #[error("entries sum to {total}, expected 1")]
    NotNormalized { total: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("vector of length {found} cannot be reshaped to {rows}x{cols}")]
    LengthMismatch {
        rows: usize,
        cols: usize,
        found: usize,
    },

    #[error("shape mismatch: distribution is {dist_rows}x{dist_cols}, weights are {weight_rows}x{weight_cols}")]
    ShapeMismatch {
        dist_rows: usize,
        dist_cols: usize,
        weight_rows: usize,
        weight_cols: usize,
    },

    #[error("weight grid is identically zero")]
    ZeroWeights,

    #[error("expected a single-column grid, got {rows}x{cols}")]
    NotUnivariate { rows: usize, cols: usize },

    #[error("generation {generation}: tail sums total zero, descendant is undefined")]
    DegenerateSum { generation: usize },

    #[error("target entry ({row}, {col}) is zero")]
    ZeroProbabilityCell { row: usize, col: usize },

    #[error("power method not applicable: {0}")]
    NotApplicable(String),

    #[error("normalized dominant eigenvector has negative entry at index {index}")]
    SignedLimit { index: usize },

    #[error("iteration {iteration}: image has zero entry sum")]
    ZeroImage { iteration: usize },

    #[error("cannot parse `{0}` as a number")]
    Parse(String),

    #[error("malformed document: {0}")]
    Format(String),
}
