//! Direct partial-sum operators.
//!
//! One summation maps a parent grid `P` to
//! `T(x, y) = sum_{i >= x, j >= y} g(i, j) P(i, j)` and normalizes by the
//! total of `T`. The univariate operator is the single-column case.

use num_traits::Zero;

use crate::distributions::ProbabilityMatrix;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Scalar;

/// Weights `g(x, y)` on a finite support. May be negative, never all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction<T> {
    grid: Grid<T>,
}

impl<T: Scalar> WeightFunction<T> {
    /// Builds from row-major nested input (`weights[x][y]`).
    pub fn new(weights: Vec<Vec<T>>) -> Result<Self> {
        Self::from_grid(Grid::from_rows(weights)?)
    }

    pub fn from_grid(grid: Grid<T>) -> Result<Self> {
        for (i, v) in grid.column_major().iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry {
                    row: i % grid.rows(),
                    col: i / grid.rows(),
                });
            }
        }
        if grid.column_major().iter().all(Zero::is_zero) {
            return Err(Error::ZeroWeights);
        }
        Ok(Self { grid })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn rows(&self) -> usize {
        self.grid.rows()
    }

    pub fn cols(&self) -> usize {
        self.grid.cols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.grid.shape()
    }

    pub fn get(&self, x: usize, y: usize) -> &T {
        self.grid.get(x, y)
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.grid.to_rows()
    }

    /// `alpha * g`; `alpha` must be nonzero.
    pub fn scaled(&self, alpha: &T) -> Result<Self> {
        Self::from_grid(self.grid.map(|v| v.clone() * alpha.clone()))
    }

    pub fn cast<U: Scalar>(&self) -> Result<WeightFunction<U>> {
        let data = self
            .grid
            .column_major()
            .iter()
            .map(|v| v.to_rational().map(|r| U::from_rational(&r)))
            .collect::<Option<Vec<_>>>()
            .ok_or(Error::NonFiniteEntry { row: 0, col: 0 })?;
        WeightFunction::from_grid(Grid::from_column_major(self.rows(), self.cols(), data)?)
    }
}

/// Result of one summation.
#[derive(Debug, Clone, PartialEq)]
pub struct SummationOutcome<T> {
    /// Normalized tail-sum table. Sums to one; may hold negative entries
    /// when `signed` is set.
    pub descendant: Grid<T>,
    /// The constant `c` with `c * raw_sum == 1`.
    pub normalizer: T,
    /// Total of the unnormalized tail sums.
    pub raw_sum: T,
    /// Some tail sum was negative, so `descendant` is not a distribution.
    pub signed: bool,
}

impl<T: Scalar> SummationOutcome<T> {
    /// The descendant as a validated distribution, if it is one.
    pub fn distribution(&self) -> Option<ProbabilityMatrix<T>> {
        if self.signed {
            return None;
        }
        ProbabilityMatrix::from_grid(self.descendant.clone()).ok()
    }
}

fn check_shapes<T: Scalar>(parent: &Grid<T>, g: &WeightFunction<T>) -> Result<()> {
    if parent.shape() != g.shape() {
        return Err(Error::ShapeMismatch {
            dist_rows: parent.rows(),
            dist_cols: parent.cols(),
            weight_rows: g.rows(),
            weight_cols: g.cols(),
        });
    }
    Ok(())
}

/// Unnormalized tail sums `T(x, y)`, via the 2-D suffix recurrence
/// `T(x,y) = w(x,y) + T(x+1,y) + T(x,y+1) - T(x+1,y+1)`.
pub fn tail_sums<T: Scalar>(parent: &Grid<T>, g: &WeightFunction<T>) -> Result<Grid<T>> {
    check_shapes(parent, g)?;
    let (m, n) = parent.shape();
    let mut table = vec![T::zero(); m * n];
    for y in (0..n).rev() {
        for x in (0..m).rev() {
            let mut acc = g.get(x, y).clone() * parent.get(x, y).clone();
            if x + 1 < m {
                acc = acc + table[y * m + x + 1].clone();
            }
            if y + 1 < n {
                acc = acc + table[(y + 1) * m + x].clone();
            }
            if x + 1 < m && y + 1 < n {
                acc = acc - table[(y + 1) * m + x + 1].clone();
            }
            table[y * m + x] = acc;
        }
    }
    Grid::from_column_major(m, n, table)
}

/// One summation applied to an arbitrary (possibly signed) grid.
/// `generation` labels a [`Error::DegenerateSum`].
pub fn partial_sum_grid<T: Scalar>(
    parent: &Grid<T>,
    g: &WeightFunction<T>,
    generation: usize,
) -> Result<SummationOutcome<T>> {
    let tails = tail_sums(parent, g)?;
    let raw_sum = tails.total();
    if raw_sum.is_zero() {
        return Err(Error::DegenerateSum { generation });
    }
    let normalizer = T::one() / raw_sum.clone();
    let descendant = tails.map(|t| t.clone() * normalizer.clone());
    let signed = descendant.first_negative().is_some();
    Ok(SummationOutcome {
        descendant,
        normalizer,
        raw_sum,
        signed,
    })
}

pub fn partial_sum_once<T: Scalar>(
    parent: &ProbabilityMatrix<T>,
    g: &WeightFunction<T>,
) -> Result<SummationOutcome<T>> {
    partial_sum_grid(parent.grid(), g, 1)
}

/// Generations `1..=k`; element `j - 1` holds the `j`-th descendant.
pub fn iterate<T: Scalar>(
    parent: &ProbabilityMatrix<T>,
    g: &WeightFunction<T>,
    k: usize,
) -> Result<Vec<SummationOutcome<T>>> {
    let mut out: Vec<SummationOutcome<T>> = Vec::with_capacity(k);
    for generation in 1..=k {
        let current = out.last().map_or(parent.grid(), |o| &o.descendant);
        let next = partial_sum_grid(current, g, generation)?;
        out.push(next);
    }
    Ok(out)
}

pub fn univariate_partial_sum<T: Scalar>(
    parent: &ProbabilityMatrix<T>,
    g: &WeightFunction<T>,
) -> Result<SummationOutcome<T>> {
    for (rows, cols) in [parent.shape(), g.shape()] {
        if cols != 1 {
            return Err(Error::NotUnivariate { rows, cols });
        }
    }
    partial_sum_once(parent, g)
}

/// Weights that leave `target` fixed under one summation, with normalizer 1
/// and `g(m-1, n-1) = 1`.
///
/// Back-substitution from the bottom-right corner. Since every tail sum of the
/// fixed point equals the target entry itself, the already-solved part of the
/// tail at `(x, y)` is `t(x+1,y) + t(x,y+1) - t(x+1,y+1)`, so each weight is a
/// mixed second difference of the target divided by `t(x, y)`.
pub fn derive_fixed_point_weights<T: Scalar>(
    target: &ProbabilityMatrix<T>,
) -> Result<WeightFunction<T>> {
    let (m, n) = target.shape();
    let t = |x: usize, y: usize| -> T {
        if x < m && y < n {
            target.get(x, y).clone()
        } else {
            T::zero()
        }
    };
    let mut weights = vec![T::zero(); m * n];
    for y in (0..n).rev() {
        for x in (0..m).rev() {
            let own = t(x, y);
            if own.is_zero() {
                return Err(Error::ZeroProbabilityCell { row: x, col: y });
            }
            let rest = t(x + 1, y) + t(x, y + 1) - t(x + 1, y + 1);
            weights[y * m + x] = (own.clone() - rest) / own;
        }
    }
    WeightFunction::from_grid(Grid::from_column_major(m, n, weights)?)
}
