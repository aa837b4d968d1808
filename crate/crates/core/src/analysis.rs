//! Classification of descendant sequences: convergent, oscillating, or
//! undetermined within the iteration budget.

use num_traits::Zero;

use crate::distributions::ProbabilityMatrix;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::{Backend, Scalar};
use crate::spectral::{analyze, build_operator, is_orthogonal_start, SpectralReport};
use crate::summation::{partial_sum_grid, WeightFunction};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict<T> {
    /// Consecutive generations differ by less than `tol` entrywise.
    Converged {
        limit: Grid<T>,
    },
    /// The sequence returned to an earlier generation. `cycle` lists the
    /// last `period` generations, ending at the one that closed the loop.
    Oscillating {
        period: usize,
        cycle: Vec<Grid<T>>,
    },
    Undetermined,
}

impl<T> Verdict<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Converged { .. } => "Converged",
            Verdict::Oscillating { .. } => "Oscillating",
            Verdict::Undetermined => "Undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceClassification<T> {
    pub verdict: Verdict<T>,
    pub iterations_used: usize,
    pub spectral: SpectralReport,
    /// Whether the observed behaviour matches the spectral prediction: when
    /// the power method applies, convergence to the dominant eigenvector
    /// within `10 * tol`; otherwise, anything but convergence.
    pub agreement: bool,
    /// The parent has no component along the dominant eigenvector, so the
    /// spectral prediction cannot be expected to hold.
    pub orthogonal_start: bool,
    /// Generations `0..=iterations_used`, starting with the parent.
    pub generations: Vec<Grid<T>>,
}

impl<T: Scalar> SequenceClassification<T> {
    /// The limit as a validated distribution, when converged to one.
    pub fn limit_distribution(&self) -> Option<ProbabilityMatrix<T>> {
        match &self.verdict {
            Verdict::Converged { limit } => ProbabilityMatrix::from_grid(limit.clone()).ok(),
            _ => None,
        }
    }
}

/// On the floating backend a within-`tol` return must also move by more than
/// this between consecutive cycle members; otherwise a slowly converging
/// alternation would be mistaken for a cycle.
fn min_cycle_separation(tol: f64) -> f64 {
    tol.sqrt()
}

fn closes_cycle<T: Scalar>(history: &[Grid<T>], period: usize, tol: f64) -> bool {
    let k = history.len() - 1;
    if !history[k].matches(&history[k - period], tol) {
        return false;
    }
    if T::BACKEND == Backend::Exact {
        return true;
    }
    let floor = min_cycle_separation(tol);
    (k - period..k).all(|j| history[j + 1].max_abs_diff(&history[j]) > floor)
}

pub fn classify<T: Scalar>(
    parent: &ProbabilityMatrix<T>,
    g: &WeightFunction<T>,
    tol: f64,
    max_iter: usize,
) -> Result<SequenceClassification<T>> {
    if parent.shape() != g.shape() {
        return Err(Error::ShapeMismatch {
            dist_rows: parent.rows(),
            dist_cols: parent.cols(),
            weight_rows: g.rows(),
            weight_cols: g.cols(),
        });
    }
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

    let op = build_operator(g);
    let spectral = analyze(&op);
    let exact_parent = parent
        .grid()
        .column_major()
        .iter()
        .map(|v| v.to_rational().expect("validated entries are finite"))
        .collect::<Vec<_>>();
    let orthogonal_start = is_orthogonal_start(&op, &exact_parent);
    let mut history = vec![parent.grid().clone()];
    let mut verdict = Verdict::Undetermined;
    for generation in 1..=max_iter {
        let next = partial_sum_grid(history.last().expect("nonempty"), g, generation)?.descendant;
        let step = next.max_abs_diff(history.last().expect("nonempty"));
        history.push(next);
        if step < tol {
            verdict = Verdict::Converged {
                limit: history[generation].clone(),
            };
            break;
        }
        if let Some(period) = (2..=generation).find(|&p| closes_cycle(&history, p, tol)) {
            let cycle = history[generation + 1 - period..].to_vec();
            verdict = Verdict::Oscillating { period, cycle };
            break;
        }
    }
    let iterations_used = history.len() - 1;
    let agreement = agrees(&verdict, &spectral, tol);
    Ok(SequenceClassification {
        verdict,
        iterations_used,
        spectral,
        agreement,
        orthogonal_start,
        generations: history,
    })
}

fn agrees<T: Scalar>(verdict: &Verdict<T>, spectral: &SpectralReport, tol: f64) -> bool {
    let predicted = spectral
        .dominant_eigenvector
        .as_ref()
        .filter(|v| !crate::scalar::sum(v.iter()).is_zero());
    match (predicted, verdict) {
        (Some(v), Verdict::Converged { limit }) => limit
            .column_major()
            .iter()
            .zip(v)
            .all(|(a, b)| (a.to_f64() - b.to_f64()).abs() <= 10.0 * tol),
        (Some(_), _) => false,
        (None, verdict) => !matches!(verdict, Verdict::Converged { .. }),
    }
}

/// Smallest period `p >= 2`, and the earliest start `s`, such that
/// `trace[t + p]` matches `trace[t]` for every `t >= s` still inside the trace.
/// A trace that settles into a period-1 repeat is convergent, not cyclic,
/// and yields `None`.
pub fn detect_cycle<T: Scalar>(trace: &[Grid<T>], tol: f64) -> Option<(usize, usize)> {
    let len = trace.len();
    for period in 1..len {
        for start in 0..len - period {
            let persists = (start..len - period).all(|t| trace[t + period].matches(&trace[t], tol));
            if persists {
                return (period >= 2).then_some((period, start));
            }
        }
    }
    None
}
