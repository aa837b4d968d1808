//! Rectangular grids indexed by `(x, y)`, stored column-major so that the
//! backing slice is already the vectorized form (`index = y * rows + x`).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Grid<T> {
    /// Builds a grid from row-major nested input (`rows[x][y]`).
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map(Vec::len).unwrap_or(0);
        if m == 0 || n == 0 {
            return Err(Error::EmptyInput);
        }
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::RaggedInput {
                row,
                expected: n,
                found: r.len(),
            });
        }
        let mut data = Vec::with_capacity(m * n);
        for y in 0..n {
            for row in &rows {
                data.push(row[y].clone());
            }
        }
        Ok(Self {
            rows: m,
            cols: n,
            data,
        })
    }

    /// Builds a grid from a column-major vector.
    pub fn from_column_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyInput);
        }
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                rows,
                cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for y in 0..cols {
            for x in 0..rows {
                data.push(f(x, y));
            }
        }
        Self::from_column_major(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.rows + x
    }

    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[self.index(x, y)]
    }

    pub fn column_major(&self) -> &[T] {
        &self.data
    }

    pub fn into_column_major(self) -> Vec<T> {
        self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows)
            .map(|x| (0..self.cols).map(|y| self.get(x, y).clone()).collect())
            .collect()
    }

    pub fn total(&self) -> T {
        crate::scalar::sum(&self.data)
    }

    pub fn map<U: Scalar>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Largest entrywise absolute difference, in `f64`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| crate::scalar::abs_diff(a, b))
            .fold(0.0, f64::max)
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| crate::scalar::abs_diff(a, b))
            .sum()
    }

    pub fn matches(&self, other: &Self, tol: f64) -> bool {
        self.shape() == other.shape()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.matches(b, tol))
    }

    /// Position `(x, y)` of the first negative entry in column-major order.
    pub fn first_negative(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|v| v.is_negative())
            .map(|i| (i % self.rows, i / self.rows))
    }
}
