//! File formats.
//!
//! Distributions and weight grids share one JSON schema:
//! `{"cols": n, "entries": [[...], ...], "rows": m}` with `entries[x][y]`.
//! An entry is a JSON number or a string holding `p/q`, an integer or a
//! decimal. Exact writers emit `"p/q"` strings, floating writers emit numbers.
//! All writers produce canonical text: sorted keys, two-space indentation,
//! trailing newline.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::analysis::{SequenceClassification, Verdict};
use crate::distributions::ProbabilityMatrix;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::{Backend, Rational, Scalar};
use crate::spectral::{SpectralReport, SummationOperator};
use crate::summation::WeightFunction;

const MAX_EXPONENT: i64 = 4096;

/// Parses `p/q`, an integer, or a decimal with optional exponent, exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(text.to_string());
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    if exponent.abs() > MAX_EXPONENT {
        return Err(bad());
    }
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part
            .chars()
            .chain(frac_part.chars())
            .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let numer: BigInt = format!("{int_part}{frac_part}")
        .parse()
        .map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Always `p/q`, including integers (`1/1`, `0/1`).
pub fn format_rational(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

pub fn scalar_to_json<T: Scalar>(value: &T) -> Value {
    match T::BACKEND {
        Backend::Exact => Value::String(format_rational(&value.to_rational().expect("exact"))),
        Backend::Float => json!(value.to_f64()),
    }
}

pub fn scalar_from_json<T: Scalar>(value: &Value) -> Result<T> {
    let exact = match value {
        Value::Number(n) => parse_rational(&n.to_string())?,
        Value::String(s) => parse_rational(s)?,
        other => return Err(Error::Parse(other.to_string())),
    };
    Ok(T::from_rational(&exact))
}

pub fn rational_to_json(value: &Rational) -> Value {
    Value::String(format_rational(value))
}

pub fn grid_to_json<T: Scalar>(grid: &Grid<T>) -> Value {
    let entries: Vec<Value> = grid
        .to_rows()
        .iter()
        .map(|row| Value::Array(row.iter().map(scalar_to_json).collect()))
        .collect();
    json!({ "rows": grid.rows(), "cols": grid.cols(), "entries": entries })
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
    obj.get(name)
        .ok_or_else(|| Error::Format(format!("missing field `{name}`")))
}

fn dimension(obj: &Map<String, Value>, name: &str) -> Result<usize> {
    field(obj, name)?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| Error::Format(format!("field `{name}` must be a nonnegative integer")))
}

pub fn grid_from_json<T: Scalar>(value: &Value) -> Result<Grid<T>> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Format("top level must be an object".to_string()))?;
    let rows = dimension(obj, "rows")?;
    let cols = dimension(obj, "cols")?;
    let entries = field(obj, "entries")?
        .as_array()
        .ok_or_else(|| Error::Format("field `entries` must be an array".to_string()))?;
    if entries.len() != rows {
        return Err(Error::Format(format!(
            "field `entries` has {} rows, field `rows` says {rows}",
            entries.len()
        )));
    }
    let mut parsed = Vec::with_capacity(rows);
    for (x, row) in entries.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Format(format!("field `entries[{x}]` must be an array")))?;
        if row.len() != cols {
            return Err(Error::Format(format!(
                "field `entries[{x}]` has {} entries, field `cols` says {cols}",
                row.len()
            )));
        }
        parsed.push(
            row.iter()
                .map(scalar_from_json)
                .collect::<Result<Vec<T>>>()?,
        );
    }
    Grid::from_rows(parsed)
}

fn parse_document(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

pub fn distribution_to_json<T: Scalar>(pm: &ProbabilityMatrix<T>) -> Value {
    grid_to_json(pm.grid())
}

pub fn read_distribution<T: Scalar>(text: &str) -> Result<ProbabilityMatrix<T>> {
    ProbabilityMatrix::from_grid(grid_from_json(&parse_document(text)?)?)
}

pub fn weights_to_json<T: Scalar>(g: &WeightFunction<T>) -> Value {
    grid_to_json(g.grid())
}

pub fn read_weights<T: Scalar>(text: &str) -> Result<WeightFunction<T>> {
    WeightFunction::from_grid(grid_from_json(&parse_document(text)?)?)
}

/// `{"dim", "entries" (row-major, "p/q"), "sourceShape": [m, n]}`.
pub fn operator_to_json(op: &SummationOperator) -> Value {
    let entries: Vec<Value> = op
        .to_rows()
        .iter()
        .map(|row| Value::Array(row.iter().map(rational_to_json).collect()))
        .collect();
    let (m, n) = op.source_shape();
    json!({ "dim": op.dim(), "sourceShape": [m, n], "entries": entries })
}

pub fn spectral_report_to_json(report: &SpectralReport) -> Value {
    json!({
        "eigenvalues": report.eigenvalues.iter().map(rational_to_json).collect::<Vec<_>>(),
        "dominantValue": report.dominant_value.as_ref().map(rational_to_json),
        "dominantUnique": report.dominant_unique,
        "diagonalizable": report.diagonalizable,
        "dominantEigenvector": report
            .dominant_eigenvector
            .as_ref()
            .map(|v| v.iter().map(rational_to_json).collect::<Vec<_>>()),
        "powerMethodApplicable": report.power_method_applicable,
    })
}

pub fn classification_to_json<T: Scalar>(c: &SequenceClassification<T>) -> Value {
    let mut obj = Map::new();
    obj.insert("verdict".into(), json!(c.verdict.name()));
    obj.insert("iterationsUsed".into(), json!(c.iterations_used));
    obj.insert("agreement".into(), json!(c.agreement));
    obj.insert("orthogonalStart".into(), json!(c.orthogonal_start));
    obj.insert("backend".into(), json!(T::BACKEND.as_str()));
    obj.insert("spectral".into(), spectral_report_to_json(&c.spectral));
    match &c.verdict {
        Verdict::Converged { limit } => {
            obj.insert("limit".into(), grid_to_json(limit));
        }
        Verdict::Oscillating { period, cycle } => {
            obj.insert("period".into(), json!(period));
            obj.insert(
                "cycle".into(),
                Value::Array(cycle.iter().map(grid_to_json).collect()),
            );
        }
        Verdict::Undetermined => {}
    }
    Value::Object(obj)
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_canonical_string(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("values always serialize");
    text.push('\n');
    text
}

/// Plot-ready trace: one row per generation with the vectorized entries and
/// the L1 distance to the previous generation (empty for generation 0).
pub fn trace_csv<T: Scalar>(generations: &[Grid<T>]) -> String {
    let width = generations.first().map_or(0, Grid::len);
    let mut out = String::from("generation");
    for i in 0..width {
        let _ = write!(out, ",v{i}");
    }
    out.push_str(",l1_distance\n");
    for (k, g) in generations.iter().enumerate() {
        let _ = write!(out, "{k}");
        for v in g.column_major() {
            let _ = write!(out, ",{}", v.to_f64());
        }
        match k.checked_sub(1) {
            Some(prev) => {
                let _ = writeln!(out, ",{}", g.l1_distance(&generations[prev]));
            }
            None => out.push_str(",\n"),
        }
    }
    out
}
