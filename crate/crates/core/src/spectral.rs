//! The vectorized summation operator and its spectrum.
//!
//! For an `m x n` weight grid the operator is the `mn x mn` upper-triangular
//! matrix with entry `g(i, j)` at row `index(x, y)`, column `index(i, j)`
//! whenever `x <= i` and `y <= j` (column-major `index(x, y) = y*m + x`).
//! Its eigenvalues are the weights themselves, so dominance is read off the
//! diagonal; diagonalizability and eigenvectors are decided exactly.

use num_traits::{One, Signed, Zero};

use crate::distributions::{devectorize, ProbabilityMatrix, ProbabilityVector};
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};
use crate::summation::WeightFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct SummationOperator {
    dim: usize,
    shape: (usize, usize),
    /// Row-major `dim x dim`.
    entries: Vec<Rational>,
}

impl SummationOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(m, n)` of the weight grid the operator was built from.
    pub fn source_shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn entry(&self, row: usize, col: usize) -> &Rational {
        &self.entries[row * self.dim + col]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.entries
            .chunks(self.dim)
            .map(<[Rational]>::to_vec)
            .collect()
    }

    pub fn diagonal(&self) -> Vec<Rational> {
        (0..self.dim).map(|i| self.entry(i, i).clone()).collect()
    }

    /// Exact product `G v`.
    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(
            v.len(),
            self.dim,
            "vector length must equal operator dimension"
        );
        (0..self.dim)
            .map(|r| {
                (r..self.dim)
                    .filter(|&c| !self.entry(r, c).is_zero())
                    .fold(Rational::zero(), |acc, c| acc + self.entry(r, c) * &v[c])
            })
            .collect()
    }

    fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        self.to_rows()
            .iter()
            .map(|row| row.iter().map(Scalar::to_f64).collect())
            .collect()
    }
}

pub fn build_operator<T: Scalar>(g: &WeightFunction<T>) -> SummationOperator {
    let (m, n) = g.shape();
    let dim = m * n;
    let mut entries = vec![Rational::zero(); dim * dim];
    for j in 0..n {
        for i in 0..m {
            let col = j * m + i;
            let w = g.get(i, j).to_rational().expect("weights are finite");
            for y in 0..=j {
                for x in 0..=i {
                    entries[(y * m + x) * dim + col] = w.clone();
                }
            }
        }
    }
    SummationOperator {
        dim,
        shape: (m, n),
        entries,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    /// The operator diagonal, in column-major cell order.
    pub eigenvalues: Vec<Rational>,
    /// Value of largest modulus, when all maximizers share the same value.
    pub dominant_value: Option<Rational>,
    /// Position of the dominant eigenvalue when it is unique.
    pub dominant_index: Option<usize>,
    pub dominant_unique: bool,
    pub diagonalizable: bool,
    /// Right eigenvector for the dominant value, scaled to entry sum 1 (or to
    /// a unit pivot entry if its entries sum to zero). Present iff the power
    /// method applies.
    pub dominant_eigenvector: Option<Vec<Rational>>,
    pub power_method_applicable: bool,
}

pub fn analyze(op: &SummationOperator) -> SpectralReport {
    let eigenvalues = op.diagonal();
    let max_abs = eigenvalues
        .iter()
        .map(Signed::abs)
        .max()
        .expect("operator is nonempty");
    debug_assert!(
        !max_abs.is_zero(),
        "weight grids are never identically zero"
    );
    let maximizers: Vec<usize> = (0..eigenvalues.len())
        .filter(|&i| eigenvalues[i].abs() == max_abs)
        .collect();
    let dominant_unique = maximizers.len() == 1;
    let dominant_value = maximizers
        .iter()
        .all(|&i| eigenvalues[i] == eigenvalues[maximizers[0]])
        .then(|| eigenvalues[maximizers[0]].clone());
    let dominant_index = dominant_unique.then(|| maximizers[0]);
    let diagonalizable = is_diagonalizable(op, &eigenvalues);
    let power_method_applicable = dominant_unique && diagonalizable;
    let dominant_eigenvector = if power_method_applicable {
        let mut v = right_eigenvector(op, maximizers[0]);
        let total = crate::scalar::sum(&v);
        if !total.is_zero() {
            v.iter_mut().for_each(|e| *e /= total.clone());
        }
        Some(v)
    } else {
        None
    };
    SpectralReport {
        eigenvalues,
        dominant_value,
        dominant_index,
        dominant_unique,
        diagonalizable,
        dominant_eigenvector,
        power_method_applicable,
    }
}

/// For every repeated eigenvalue, the nullity of `G - lambda I` must equal its
/// multiplicity on the diagonal.
fn is_diagonalizable(op: &SummationOperator, eigenvalues: &[Rational]) -> bool {
    let mut distinct: Vec<(&Rational, usize)> = Vec::new();
    for lambda in eigenvalues {
        match distinct.iter_mut().find(|(v, _)| *v == lambda) {
            Some((_, count)) => *count += 1,
            None => distinct.push((lambda, 1)),
        }
    }
    distinct
        .into_iter()
        .filter(|&(_, a)| a > 1)
        .all(|(lambda, multiplicity)| {
            let mut shifted = op.to_rows();
            for (i, row) in shifted.iter_mut().enumerate() {
                row[i] -= lambda;
            }
            op.dim - rank(shifted) == multiplicity
        })
}

/// Rank by fraction-exact Gaussian elimination.
pub(crate) fn rank(mut a: Vec<Vec<Rational>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot);
        let p = a[rank][col].clone();
        let (done, below) = a.split_at_mut(rank + 1);
        let pivot_row = &done[rank];
        for row in below {
            if row[col].is_zero() {
                continue;
            }
            let factor = &row[col] / &p;
            for (entry, above) in row.iter_mut().zip(pivot_row).skip(col) {
                *entry -= &factor * above;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Solves `(G - lambda I) v = 0` for the simple eigenvalue on diagonal
/// position `p`, with `v[p] = 1`. Entries below `p` vanish; entries above are
/// back-substituted.
fn right_eigenvector(op: &SummationOperator, p: usize) -> Vec<Rational> {
    let lambda = op.entry(p, p).clone();
    let mut v = vec![Rational::zero(); op.dim];
    v[p] = Rational::one();
    for r in (0..p).rev() {
        let acc = (r + 1..=p).fold(Rational::zero(), |acc, c| acc + op.entry(r, c) * &v[c]);
        v[r] = -acc / (op.entry(r, r) - &lambda);
    }
    v
}

/// Solves `u^T (G - lambda I) = 0` for the simple eigenvalue at position `p`,
/// with `u[p] = 1`.
fn left_eigenvector(op: &SummationOperator, p: usize) -> Vec<Rational> {
    let lambda = op.entry(p, p).clone();
    let mut u = vec![Rational::zero(); op.dim];
    u[p] = Rational::one();
    for c in p + 1..op.dim {
        let acc = (p..c).fold(Rational::zero(), |acc, r| acc + &u[r] * op.entry(r, c));
        u[c] = -acc / (op.entry(c, c) - &lambda);
    }
    u
}

/// Left eigenvector of the dominant eigenvalue, when it is unique.
pub fn left_dominant_eigenvector(op: &SummationOperator) -> Option<Vec<Rational>> {
    analyze(op).dominant_index.map(|p| left_eigenvector(op, p))
}

/// Whether `start` has no component along the dominant direction, i.e. its
/// exact inner product with the left dominant eigenvector is zero. `false`
/// when the dominant eigenvalue is not unique.
pub fn is_orthogonal_start(op: &SummationOperator, start: &[Rational]) -> bool {
    left_dominant_eigenvector(op).is_some_and(|u| {
        u.iter()
            .zip(start)
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            .is_zero()
    })
}

pub fn limit_distribution(op: &SummationOperator) -> Result<ProbabilityMatrix<Rational>> {
    let report = analyze(op);
    if !report.power_method_applicable {
        let reason = if !report.dominant_unique {
            "dominant eigenvalue is not unique"
        } else {
            "operator is not diagonalizable"
        };
        return Err(Error::NotApplicable(reason.to_string()));
    }
    let v = report
        .dominant_eigenvector
        .expect("present when applicable");
    if crate::scalar::sum(&v).is_zero() {
        return Err(Error::NotApplicable(
            "dominant eigenvector has zero entry sum".to_string(),
        ));
    }
    if let Some(index) = v.iter().position(Signed::is_negative) {
        return Err(Error::SignedLimit { index });
    }
    let (m, n) = op.source_shape();
    devectorize(&ProbabilityVector::new(v), m, n)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PowerOutcome {
    Converged { limit: Vec<f64>, iterations: usize },
    Exhausted { last: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrace {
    /// Start vector followed by every iterate.
    pub vectors: Vec<Vec<f64>>,
    pub outcome: PowerOutcome,
    /// The start is orthogonal to the left dominant eigenvector, so it has
    /// no component along the dominant direction.
    pub orthogonal_start: bool,
}

impl PowerTrace {
    pub fn converged(&self) -> bool {
        matches!(self.outcome, PowerOutcome::Converged { .. })
    }
}

/// Sum-normalized power iteration `v <- G v / sum(G v)` in `f64`.
pub fn power_iterate<T: Scalar>(
    op: &SummationOperator,
    start: &ProbabilityVector<T>,
    tol: f64,
    max_iter: usize,
) -> Result<PowerTrace> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(Error::InvalidParams(
            "max_iter must be at least 1".to_string(),
        ));
    }
    let (m, n) = op.source_shape();
    if start.len() != op.dim {
        return Err(Error::LengthMismatch {
            rows: m,
            cols: n,
            found: start.len(),
        });
    }
    let exact_start = start
        .entries()
        .iter()
        .map(Scalar::to_rational)
        .collect::<Option<Vec<_>>>()
        .ok_or(Error::NonFiniteEntry { row: 0, col: 0 })?;
    if exact_start.iter().all(Zero::is_zero) {
        return Err(Error::InvalidParams("start vector is zero".to_string()));
    }
    let orthogonal_start = is_orthogonal_start(op, &exact_start);

    let rows = op.to_f64_rows();
    let mut current: Vec<f64> = start.entries().iter().map(Scalar::to_f64).collect();
    let mut vectors = vec![current.clone()];
    for iteration in 1..=max_iter {
        let image: Vec<f64> = rows
            .iter()
            .enumerate()
            .map(|(r, row)| (r..op.dim).map(|c| row[c] * current[c]).sum())
            .collect();
        let total: f64 = image.iter().sum();
        if total == 0.0 || !total.is_finite() {
            return Err(Error::ZeroImage { iteration });
        }
        let next: Vec<f64> = image.iter().map(|v| v / total).collect();
        let delta = next
            .iter()
            .zip(&current)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        vectors.push(next.clone());
        current = next;
        if delta < tol {
            return Ok(PowerTrace {
                vectors,
                outcome: PowerOutcome::Converged {
                    limit: current,
                    iterations: iteration,
                },
                orthogonal_start,
            });
        }
    }
    Ok(PowerTrace {
        vectors,
        outcome: PowerOutcome::Exhausted { last: current },
        orthogonal_start,
    })
}

/// Euclidean-normalized view of a vector.
pub fn unit_l2(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{inverse_hypergeometric, vectorize, InvHypergeomParams};
    use crate::grid::Grid;
    use crate::scalar::rational as q;
    use crate::summation::{iterate, partial_sum_once};
    use proptest::prelude::*;

    fn rows(r: &[&[(i64, i64)]]) -> Vec<Vec<Rational>> {
        r.iter()
            .map(|row| row.iter().map(|&(a, b)| q(a, b)).collect())
            .collect()
    }

    fn g_osc() -> WeightFunction<Rational> {
        WeightFunction::new(rows(&[&[(-1, 1), (1, 1)], &[(1, 1), (0, 1)]])).unwrap()
    }

    fn g_fixed() -> WeightFunction<Rational> {
        WeightFunction::new(rows(&[
            &[(3, 7), (3, 20), (-3, 5)],
            &[(3, 20), (9, 20), (3, 8)],
            &[(-3, 5), (3, 8), (1, 1)],
        ]))
        .unwrap()
    }

    fn ih() -> ProbabilityMatrix<Rational> {
        inverse_hypergeometric(InvHypergeomParams::new(2, 2, 5, 2).unwrap()).unwrap()
    }

    /// Independent construction: block upper-triangular matrix of ones
    /// triangles `A`, times `diag(g)`.
    fn block_product(g: &WeightFunction<Rational>) -> Vec<Vec<Rational>> {
        let (m, n) = g.shape();
        let dim = m * n;
        let a = |r: usize, c: usize| -> Rational {
            let (br, bc) = (r / m, c / m);
            if br <= bc && r % m <= c % m {
                Rational::one()
            } else {
                Rational::zero()
            }
        };
        let d: Vec<Rational> = g.grid().column_major().to_vec();
        (0..dim)
            .map(|r| {
                (0..dim)
                    .map(|c| {
                        (0..dim).fold(Rational::zero(), |acc, k| {
                            let dk = if k == c {
                                d[c].clone()
                            } else {
                                Rational::zero()
                            };
                            acc + a(r, k) * dk
                        })
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn oscillation_operator_matches_reference() {
        let op = build_operator(&g_osc());
        let expected = rows(&[
            &[(-1, 1), (1, 1), (1, 1), (0, 1)],
            &[(0, 1), (1, 1), (0, 1), (0, 1)],
            &[(0, 1), (0, 1), (1, 1), (0, 1)],
            &[(0, 1), (0, 1), (0, 1), (0, 1)],
        ]);
        assert_eq!(op.to_rows(), expected);
        assert_eq!(op.to_rows(), block_product(&g_osc()));
    }

    #[test]
    fn fixed_point_operator_matches_reference() {
        let op = build_operator(&g_fixed());
        let z = (0, 1);
        let (a, b, c, d, e, f) = ((3, 7), (3, 20), (-3, 5), (9, 20), (3, 8), (1, 1));
        let expected = rows(&[
            &[a, b, c, b, d, e, c, e, f],
            &[z, b, c, z, d, e, z, e, f],
            &[z, z, c, z, z, e, z, z, f],
            &[z, z, z, b, d, e, c, e, f],
            &[z, z, z, z, d, e, z, e, f],
            &[z, z, z, z, z, e, z, z, f],
            &[z, z, z, z, z, z, c, e, f],
            &[z, z, z, z, z, z, z, e, f],
            &[z, z, z, z, z, z, z, z, f],
        ]);
        assert_eq!(op.to_rows(), expected);
        assert_eq!(op.to_rows(), block_product(&g_fixed()));
        assert_eq!(op.source_shape(), (3, 3));
    }

    #[test]
    fn scalar_operator() {
        let op = build_operator(&WeightFunction::new(vec![vec![q(7, 3)]]).unwrap());
        assert_eq!(op.to_rows(), vec![vec![q(7, 3)]]);
        let report = analyze(&op);
        assert_eq!(report.dominant_value, Some(q(7, 3)));
        assert_eq!(report.dominant_eigenvector, Some(vec![Rational::one()]));
    }

    #[test]
    fn analyze_fixed_point_operator() {
        let report = analyze(&build_operator(&g_fixed()));
        assert_eq!(report.dominant_value, Some(Rational::one()));
        assert!(report.dominant_unique && report.diagonalizable && report.power_method_applicable);
        let v = report.dominant_eigenvector.unwrap();
        assert_eq!(devectorize(&ProbabilityVector::new(v), 3, 3).unwrap(), ih());
    }

    #[test]
    fn analyze_oscillation_operator() {
        let report = analyze(&build_operator(&g_osc()));
        assert_eq!(
            report.eigenvalues,
            vec![q(-1, 1), q(1, 1), q(1, 1), q(0, 1)]
        );
        assert!(!report.dominant_unique);
        assert!(report.diagonalizable);
        assert!(!report.power_method_applicable);
        assert_eq!(report.dominant_value, None);
        assert_eq!(report.dominant_eigenvector, None);
    }

    #[test]
    fn defective_operator_detected() {
        // g = (1, 1) univariate: operator [[1, 1], [0, 1]] is a Jordan block.
        let op = build_operator(&WeightFunction::new(vec![vec![q(1, 1)], vec![q(1, 1)]]).unwrap());
        let report = analyze(&op);
        assert!(!report.diagonalizable);
        assert_eq!(report.dominant_value, Some(q(1, 1)));
        assert_eq!(
            limit_distribution(&op),
            Err(Error::NotApplicable(
                "dominant eigenvalue is not unique".into()
            ))
        );
    }

    #[test]
    fn limit_examples() {
        assert_eq!(
            limit_distribution(&build_operator(&g_fixed())).unwrap(),
            ih()
        );
        assert!(matches!(
            limit_distribution(&build_operator(&g_osc())),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn univariate_limit() {
        // [[3, -4], [0, -4]]: v = (4/7, 1) -> (4/11, 7/11).
        let g = WeightFunction::new(vec![vec![q(3, 1)], vec![q(-4, 1)]]).unwrap();
        assert_eq!(
            limit_distribution(&build_operator(&g))
                .unwrap()
                .grid()
                .column_major(),
            &[q(4, 11), q(7, 11)]
        );
    }

    #[test]
    fn signed_limit_reported() {
        let g = WeightFunction::new(rows(&[
            &[(-2, 1), (-4, 1), (-3, 1)],
            &[(-5, 1), (0, 1), (6, 1)],
        ]))
        .unwrap();
        let op = build_operator(&g);
        let report = analyze(&op);
        assert!(report.power_method_applicable);
        assert_eq!(report.dominant_eigenvector.unwrap()[0], q(-27, 2357));
        assert_eq!(
            limit_distribution(&op),
            Err(Error::SignedLimit { index: 0 })
        );
    }

    #[test]
    fn power_iteration_fixed_point() {
        let op = build_operator(&g_fixed());
        let start = ProbabilityVector::new(vec![1.0 / 9.0; 9]);
        let trace = power_iterate(&op, &start, 1e-12, 10_000).unwrap();
        assert!(!trace.orthogonal_start);
        let PowerOutcome::Converged { limit, .. } = &trace.outcome else {
            panic!("expected convergence");
        };
        let expected = vectorize(&ih());
        for (a, b) in limit.iter().zip(expected.entries()) {
            assert!((a - Scalar::to_f64(b)).abs() < 1e-10);
        }
    }

    #[test]
    fn power_iteration_oscillates() {
        let op = build_operator(&g_osc());
        let start = ProbabilityVector::new(vec![0.5, 0.25, 0.25, 0.0]);
        let trace = power_iterate(&op, &start, 1e-6, 100).unwrap();
        assert!(matches!(trace.outcome, PowerOutcome::Exhausted { .. }));
        assert_eq!(trace.vectors.len(), 101);
        for (k, v) in trace.vectors.iter().enumerate() {
            let expected = if k % 2 == 0 {
                [0.5, 0.25, 0.25, 0.0]
            } else {
                [0.0, 0.5, 0.5, 0.0]
            };
            assert_eq!(v.as_slice(), &expected);
        }
    }

    #[test]
    fn power_iteration_scalar() {
        let op = build_operator(&WeightFunction::new(vec![vec![2.0]]).unwrap());
        let trace = power_iterate(&op, &ProbabilityVector::new(vec![1.0]), 1e-12, 10).unwrap();
        assert_eq!(
            trace.outcome,
            PowerOutcome::Converged {
                limit: vec![1.0],
                iterations: 1
            }
        );
    }

    #[test]
    fn power_iteration_errors() {
        let op = build_operator(&g_osc());
        let start = ProbabilityVector::new(vec![0.25; 4]);
        assert!(matches!(
            power_iterate(&op, &start, 0.0, 10),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            power_iterate(&op, &start, 1e-9, 0),
            Err(Error::InvalidParams(_))
        ));
        let short = ProbabilityVector::new(vec![0.5, 0.5]);
        assert!(matches!(
            power_iterate(&op, &short, 1e-9, 10),
            Err(Error::LengthMismatch { .. })
        ));
        // Only the (1,1) cell, whose weight is zero.
        let dead = ProbabilityVector::new(vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(
            power_iterate(&op, &dead, 1e-9, 10),
            Err(Error::ZeroImage { iteration: 1 })
        );
    }

    #[test]
    fn orthogonal_start_flagged() {
        // Univariate g = (1, 2): dominant 2 at index 1, left eigenvector u = (0, 1).
        // A start concentrated at index 0 never picks up the dominant direction.
        let g = WeightFunction::new(vec![vec![1.0], vec![2.0]]).unwrap();
        let op = build_operator(&g);
        assert_eq!(left_dominant_eigenvector(&op), Some(vec![q(0, 1), q(1, 1)]));
        let trace = power_iterate(&op, &ProbabilityVector::new(vec![1.0, 0.0]), 1e-12, 50).unwrap();
        assert!(trace.orthogonal_start);
        assert_eq!(
            trace.outcome,
            PowerOutcome::Converged {
                limit: vec![1.0, 0.0],
                iterations: 1
            }
        );
        let trace =
            power_iterate(&op, &ProbabilityVector::new(vec![0.5, 0.5]), 1e-12, 200).unwrap();
        assert!(!trace.orthogonal_start);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(rows(&[&[(1, 1), (2, 1)], &[(2, 1), (4, 1)]])), 1);
        assert_eq!(rank(rows(&[&[(0, 1), (1, 1)], &[(1, 1), (0, 1)]])), 2);
        assert_eq!(rank(rows(&[&[(0, 1), (0, 1)]])), 0);
    }

    #[test]
    fn l2_view() {
        let v = unit_l2(&[3.0, 4.0]);
        assert_eq!(v, vec![0.6, 0.8]);
    }

    fn instance(
        max: usize,
        nonneg: bool,
        denom: i64,
    ) -> impl Strategy<Value = (ProbabilityMatrix<Rational>, WeightFunction<Rational>)> {
        (1..=max, 1..=max).prop_flat_map(move |(m, n)| {
            let lo = if nonneg { 0 } else { -9 };
            (
                proptest::collection::vec(1i64..30, m * n),
                proptest::collection::vec((lo..10i64, 1i64..=denom), m * n)
                    .prop_filter("not all zero", |w| w.iter().any(|&(a, _)| a != 0)),
            )
                .prop_map(move |(p, w)| {
                    let total: i64 = p.iter().sum();
                    let parent = ProbabilityMatrix::from_grid(
                        Grid::from_column_major(m, n, p.iter().map(|&v| q(v, total)).collect())
                            .unwrap(),
                    )
                    .unwrap();
                    let g = WeightFunction::from_grid(
                        Grid::from_column_major(m, n, w.iter().map(|&(a, b)| q(a, b)).collect())
                            .unwrap(),
                    )
                    .unwrap();
                    (parent, g)
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn structure_and_factorization((_, g) in instance(4, false, 3)) {
            let op = build_operator(&g);
            let (m, _) = g.shape();
            for r in 0..op.dim() {
                for c in 0..op.dim() {
                    let (x, y, i, j) = (r % m, r / m, c % m, c / m);
                    let expected = if x <= i && y <= j { g.get(i, j).clone() } else { Rational::zero() };
                    prop_assert_eq!(op.entry(r, c), &expected);
                }
            }
            prop_assert_eq!(op.to_rows(), block_product(&g));
        }

        #[test]
        fn spectrum_is_weight_multiset((_, g) in instance(4, false, 3)) {
            let mut eig = analyze(&build_operator(&g)).eigenvalues;
            let mut w = g.grid().column_major().to_vec();
            eig.sort();
            w.sort();
            prop_assert_eq!(eig, w);
        }

        #[test]
        fn one_step_equals_operator_image((p, g) in instance(4, true, 3)) {
            let op = build_operator(&g);
            let image = op.apply(vectorize(&p).entries());
            let total = crate::scalar::sum(&image);
            match partial_sum_once(&p, &g) {
                Ok(out) => {
                    let normalized: Vec<Rational> = image.iter().map(|v| v / &total).collect();
                    prop_assert_eq!(out.descendant.column_major(), normalized.as_slice());
                }
                Err(Error::DegenerateSum { .. }) => prop_assert!(total.is_zero()),
                Err(e) => prop_assert!(false, "unexpected {e:?}"),
            }
        }

        #[test]
        fn iterate_agrees_with_matrix_powers((p, g) in instance(5, false, 3), k in 1usize..4) {
            let op = build_operator(&g);
            let mut v = vectorize(&p).into_entries();
            for _ in 0..k {
                v = op.apply(&v);
            }
            let total = crate::scalar::sum(&v);
            match iterate(&p, &g, k) {
                Ok(gens) => {
                    let normalized: Vec<Rational> = v.iter().map(|e| e / &total).collect();
                    prop_assert_eq!(gens.last().unwrap().descendant.column_major(), normalized.as_slice());
                }
                Err(Error::DegenerateSum { .. }) => {}
                Err(e) => prop_assert!(false, "unexpected {e:?}"),
            }
        }

        #[test]
        fn eigenpair_identity((_, g) in instance(4, false, 3)) {
            let op = build_operator(&g);
            let report = analyze(&op);
            if let (Some(v), Some(lambda)) = (&report.dominant_eigenvector, &report.dominant_value) {
                let gv = op.apply(v);
                let lv: Vec<Rational> = v.iter().map(|e| e * lambda).collect();
                prop_assert_eq!(gv, lv);
            }
            prop_assert_eq!(
                report.power_method_applicable,
                report.dominant_unique && report.diagonalizable
            );
        }

        #[test]
        fn power_iteration_matches_limit((p, g) in instance(3, true, 1)) {
            let op = build_operator(&g);
            let Ok(limit) = limit_distribution(&op) else { return Ok(()); };
            let tol = 1e-11;
            let start = ProbabilityVector::new(vectorize(&p).entries().iter().map(Scalar::to_f64).collect());
            let trace = power_iterate(&op, &start, tol, 100_000).unwrap();
            let PowerOutcome::Converged { limit: got, .. } = trace.outcome else {
                return Err(TestCaseError::fail("power iteration did not converge"));
            };
            for (a, b) in got.iter().zip(vectorize(&limit).entries()) {
                prop_assert!((a - Scalar::to_f64(b)).abs() < tol * 10.0);
            }
        }
    }
}
