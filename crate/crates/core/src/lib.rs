//! Iterated partial summations of finite-support discrete distributions.
//!
//! A parent distribution `P` on an `m x n` grid and a weight grid `g` define
//! the descendant `c * sum_{i >= x, j >= y} g(i, j) P(i, j)`. Iterating the
//! map either settles on a limit, cycles, or neither. Vectorizing the grid
//! column-major turns one summation into multiplication by an upper-triangular
//! operator whose eigenvalues are the weights, so the limit, when the power
//! method applies, is the normalized dominant eigenvector.
//!
//! - [`distributions`]: validated grids, hypergeometric families, vectorization.
//! - [`summation`]: the direct operator, iteration, fixed-point weights.
//! - [`spectral`]: operator construction, spectrum, power iteration.
//! - [`analysis`]: sequence classification and cycle detection.
//! - [`format`]: JSON and CSV file formats.

pub mod analysis;
pub mod distributions;
pub mod error;
pub mod format;
pub mod grid;
pub mod scalar;
pub mod spectral;
pub mod summation;

pub use analysis::{classify, detect_cycle, SequenceClassification, Verdict};
pub use distributions::{
    devectorize, hypergeometric, inverse_hypergeometric, vectorize, HypergeomParams,
    InvHypergeomParams, ProbabilityMatrix, ProbabilityVector,
};
pub use error::{Error, Result};
pub use grid::Grid;
pub use scalar::{Backend, Rational, Scalar};
pub use spectral::{
    analyze, build_operator, limit_distribution, power_iterate, PowerOutcome, PowerTrace,
    SpectralReport, SummationOperator,
};
pub use summation::{
    derive_fixed_point_weights, iterate, partial_sum_once, univariate_partial_sum,
    SummationOutcome, WeightFunction,
};
