//! Finite-support distributions, the two hypergeometric families, and the
//! column-major vectorization bridge.
//!
//! Univariate distributions are single-column matrices (`cols == 1`).

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::{Rational, Scalar};

/// An `m x n` grid of nonnegative masses summing to one.
///
/// Exact grids must total exactly 1; floating grids within
/// [`FLOAT_NORMALIZATION_TOL`](crate::scalar::FLOAT_NORMALIZATION_TOL).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix<T> {
    grid: Grid<T>,
}

impl<T: Scalar> ProbabilityMatrix<T> {
    /// Validates row-major input `entries[x][y]`.
    pub fn validate(entries: Vec<Vec<T>>) -> Result<Self> {
        Self::from_grid(Grid::from_rows(entries)?)
    }

    pub fn from_grid(grid: Grid<T>) -> Result<Self> {
        for (i, v) in grid.column_major().iter().enumerate() {
            let (row, col) = (i % grid.rows(), i / grid.rows());
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry { row, col });
            }
            if v.is_negative() {
                return Err(Error::NegativeEntry {
                    row,
                    col,
                    value: format!("{v:?}"),
                });
            }
        }
        let total = grid.total();
        if !T::is_unit_total(&total) {
            return Err(Error::NotNormalized {
                total: format!("{total:?}"),
            });
        }
        Ok(Self { grid })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn into_grid(self) -> Grid<T> {
        self.grid
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

    /// Uniform distribution over an `rows x cols` support.
    pub fn uniform(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyInput);
        }
        let cells = BigInt::from(rows * cols);
        let mass = T::from_rational(&Rational::new(BigInt::from(1), cells));
        Self::from_grid(Grid::from_fn(rows, cols, |_, _| mass.clone())?)
    }

    /// Converts to another backend, going through exact rationals.
    pub fn cast<U: Scalar>(&self) -> Result<ProbabilityMatrix<U>> {
        let grid = Grid::from_column_major(
            self.rows(),
            self.cols(),
            self.grid
                .column_major()
                .iter()
                .map(|v| v.to_rational().map(|r| U::from_rational(&r)))
                .collect::<Option<Vec<_>>>()
                .ok_or(Error::NonFiniteEntry { row: 0, col: 0 })?,
        )?;
        ProbabilityMatrix::from_grid(grid)
    }

    /// Row sums (marginal of the first coordinate).
    pub fn row_marginal(&self) -> Vec<T> {
        (0..self.rows())
            .map(|x| crate::scalar::sum((0..self.cols()).map(|y| self.get(x, y))))
            .collect()
    }

    /// Column sums (marginal of the second coordinate).
    pub fn col_marginal(&self) -> Vec<T> {
        (0..self.cols())
            .map(|y| crate::scalar::sum((0..self.rows()).map(|x| self.get(x, y))))
            .collect()
    }
}

/// A vectorized distribution: column-major stacking, index of `(x, y)` is
/// `y * rows + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector<T> {
    entries: Vec<T>,
}

impl<T: Scalar> ProbabilityVector<T> {
    pub fn new(entries: Vec<T>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn vectorize<T: Scalar>(pm: &ProbabilityMatrix<T>) -> ProbabilityVector<T> {
    ProbabilityVector::new(pm.grid().column_major().to_vec())
}

pub fn devectorize<T: Scalar>(
    v: &ProbabilityVector<T>,
    rows: usize,
    cols: usize,
) -> Result<ProbabilityMatrix<T>> {
    if v.len() != rows * cols {
        return Err(Error::LengthMismatch {
            rows,
            cols,
            found: v.len(),
        });
    }
    ProbabilityMatrix::from_grid(Grid::from_column_major(rows, cols, v.entries.clone())?)
}

/// Parameters of the bivariate inverse hypergeometric law: draw without
/// replacement from classes of sizes `n1`, `n2`, `n3` until the `k`-th
/// class-3 item appears; `(X, Y)` count the class-1 and class-2 items drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InvHypergeomParams {
    pub n1: u64,
    pub n2: u64,
    pub n3: u64,
    pub k: u64,
}

impl InvHypergeomParams {
    pub fn new(n1: u64, n2: u64, n3: u64, k: u64) -> Result<Self> {
        let p = Self { n1, n2, n3, k };
        p.check()?;
        Ok(p)
    }

    pub fn total(&self) -> u64 {
        self.n1 + self.n2 + self.n3
    }

    fn check(&self) -> Result<()> {
        if self.n1 == 0 || self.n2 == 0 || self.n3 == 0 {
            return Err(Error::InvalidParams(format!(
                "class sizes must be positive (N1={}, N2={}, N3={})",
                self.n1, self.n2, self.n3
            )));
        }
        if self.k == 0 || self.k > self.n3 {
            return Err(Error::InvalidParams(format!(
                "k={} must lie in 1..={}",
                self.k, self.n3
            )));
        }
        Ok(())
    }
}

/// Parameters of the bivariate hypergeometric law: a sample of
/// `sample_size` drawn without replacement from classes `n1`, `n2`, `n3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypergeomParams {
    pub n1: u64,
    pub n2: u64,
    pub n3: u64,
    pub sample_size: u64,
}

impl HypergeomParams {
    pub fn new(n1: u64, n2: u64, n3: u64, sample_size: u64) -> Result<Self> {
        let p = Self {
            n1,
            n2,
            n3,
            sample_size,
        };
        p.check()?;
        Ok(p)
    }

    pub fn total(&self) -> u64 {
        self.n1 + self.n2 + self.n3
    }

    fn check(&self) -> Result<()> {
        if self.n1 == 0 || self.n2 == 0 || self.n3 == 0 {
            return Err(Error::InvalidParams(format!(
                "class sizes must be positive (N1={}, N2={}, N3={})",
                self.n1, self.n2, self.n3
            )));
        }
        if self.sample_size == 0 || self.sample_size > self.total() {
            return Err(Error::InvalidParams(format!(
                "sample size {} must lie in 1..={}",
                self.sample_size,
                self.total()
            )));
        }
        Ok(())
    }
}

/// `C(n, k)`, zero outside `0 <= k <= n`.
fn choose(n: u64, k: i64) -> BigInt {
    if k < 0 || k as u64 > n {
        BigInt::zero()
    } else {
        binomial(BigInt::from(n), BigInt::from(k))
    }
}

/// P(X=x, Y=y) = (N3-k+1)/(N-(x+y+k-1)) * C(N1,x) C(N2,y) C(N3,k-1) / C(N, x+y+k-1)
/// on `x = 0..=N1`, `y = 0..=N2`.
pub fn inverse_hypergeometric(params: InvHypergeomParams) -> Result<ProbabilityMatrix<Rational>> {
    params.check()?;
    let InvHypergeomParams { n1, n2, n3, k } = params;
    let total = params.total();
    let c3 = choose(n3, k as i64 - 1);
    let grid = Grid::from_fn(n1 as usize + 1, n2 as usize + 1, |x, y| {
        let drawn = x as u64 + y as u64 + k - 1;
        let stop = Rational::new(BigInt::from(n3 - k + 1), BigInt::from(total - drawn));
        let ways = choose(n1, x as i64) * choose(n2, y as i64) * &c3;
        stop * Rational::new(ways, choose(total, drawn as i64))
    })?;
    ProbabilityMatrix::from_grid(grid)
}

/// P(X=x, Y=y) = C(N1,x) C(N2,y) C(N3, s-x-y) / C(N, s) on `x = 0..=N1`,
/// `y = 0..=N2`.
pub fn hypergeometric(params: HypergeomParams) -> Result<ProbabilityMatrix<Rational>> {
    params.check()?;
    let HypergeomParams {
        n1,
        n2,
        n3,
        sample_size,
    } = params;
    let denom = choose(params.total(), sample_size as i64);
    let grid = Grid::from_fn(n1 as usize + 1, n2 as usize + 1, |x, y| {
        let rest = sample_size as i64 - x as i64 - y as i64;
        let ways = choose(n1, x as i64) * choose(n2, y as i64) * choose(n3, rest);
        Rational::new(ways, denom.clone())
    })?;
    ProbabilityMatrix::from_grid(grid)
}
