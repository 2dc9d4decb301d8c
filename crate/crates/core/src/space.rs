//! Dense vectors, box constraints and the small numeric helpers shared by
//! every solver.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Objective;

/// A point of `R^n`.
pub type Vector = DVector<f64>;

/// A dense `n x n` matrix.
pub type Matrix = DMatrix<f64>;

/// Builds a vector from a slice, rejecting empty input and non-finite entries.
pub fn vector(entries: &[f64]) -> Result<Vector> {
    if entries.is_empty() {
        return Err(Error::param("vector", "length must be at least 1"));
    }
    if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(Vector::from_column_slice(entries))
}

/// Lexicographic comparison of two equally sized vectors.
pub fn lex_cmp(a: &Vector, b: &Vector) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Componentwise bounds `lower <= x <= upper`.
///
/// Infinite bounds are stored as `f64::INFINITY` / `f64::NEG_INFINITY` in
/// memory. In JSON they are written as `null`, since JSON has no infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxConstraint {
    #[serde(with = "bound_serde::lower")]
    lower: Vec<f64>,
    #[serde(with = "bound_serde::upper")]
    upper: Vec<f64>,
}

impl BoxConstraint {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Dimension {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::param("box", "dimension must be at least 1"));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() || l > u || *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                return Err(Error::param(
                    "box",
                    format!("empty interval [{l}, {u}] at coordinate {i}"),
                ));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lo, hi]^n`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    /// The nonnegative orthant of `R^n`.
    pub fn nonnegative(dim: usize) -> Self {
        Self {
            lower: vec![0.0; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|v| v.is_finite())
    }

    pub fn contains(&self, x: &Vector) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    /// True when `x` is strictly inside every finite bound.
    pub fn contains_interior(&self, x: &Vector) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l < *v && *v < *u)
    }
}

mod bound_serde {
    macro_rules! bound_module {
        ($name:ident, $inf:expr) => {
            pub mod $name {
                use serde::{Deserialize, Deserializer, Serializer};

                pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
                    let mapped: Vec<Option<f64>> =
                        v.iter().map(|x| x.is_finite().then_some(*x)).collect();
                    serde::Serialize::serialize(&mapped, s)
                }

                pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
                    let raw: Vec<Option<f64>> = Vec::deserialize(d)?;
                    Ok(raw.into_iter().map(|x| x.unwrap_or($inf)).collect())
                }
            }
        };
    }
    bound_module!(lower, f64::NEG_INFINITY);
    bound_module!(upper, f64::INFINITY);
}

/// Clamps `x` componentwise into `bounds`.
pub fn project_box(x: &Vector, bounds: &BoxConstraint) -> Result<Vector> {
    if x.len() != bounds.dim() {
        return Err(Error::Dimension {
            expected: bounds.dim(),
            got: x.len(),
        });
    }
    Ok(Vector::from_iterator(
        x.len(),
        x.iter()
            .zip(bounds.lower.iter().zip(&bounds.upper))
            .map(|(v, (l, u))| v.clamp(*l, *u)),
    ))
}

/// Central-difference gradient `(f(x + h e_i) - f(x - h e_i)) / 2h`.
///
/// Every probe point must lie in the objective's domain.
pub fn finite_diff_gradient<F: Objective + ?Sized>(f: &F, x: &Vector, step: f64) -> Result<Vector> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::param("step", "must be positive and finite"));
    }
    if x.len() != f.dim() {
        return Err(Error::Dimension {
            expected: f.dim(),
            got: x.len(),
        });
    }
    let mut grad = Vector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let xi = x[i];
        probe[i] = xi + step;
        let plus = eval_in_domain(f, &probe)?;
        probe[i] = xi - step;
        let minus = eval_in_domain(f, &probe)?;
        probe[i] = xi;
        grad[i] = (plus - minus) / (2.0 * step);
    }
    Ok(grad)
}

fn eval_in_domain<F: Objective + ?Sized>(f: &F, x: &Vector) -> Result<f64> {
    if let Some(dom) = f.domain() {
        if !dom.contains(x) {
            return Err(Error::Domain(format!(
                "finite-difference probe {:?} leaves the domain",
                x.as_slice()
            )));
        }
    }
    Ok(f.value(x))
}
