//! Sampling-based checks of the quasar-convexity inequalities, the
//! convergence-rate and iteration-count formulas, and checks of solver traces
//! against those formulas.

mod bounds;
mod inequalities;
mod sampler;
mod traces;

use serde::{Deserialize, Serialize};

pub use bounds::{
    bisect_largest, iteration_bound_quasar, iteration_bound_strong, theoretical_rate,
    value_iteration_bound, BoundKind, ValueBoundReading,
};
pub use inequalities::{
    check_diff_characterization, check_quadratic_growth, check_quasar_inequality,
    check_supercoercive,
};
pub use sampler::{Sample, Sampler};
pub use traces::{check_trace_linear, check_trace_sublinear, tail_ratio_compliance, TailCompliance};

/// Relative slack for inequalities evaluated in exact arithmetic.
pub const EXACT_SLACK: f64 = 1e-9;
/// Relative slack for inequalities involving finite-difference gradients.
pub const FD_SLACK: f64 = 1e-5;

/// A point where an inequality failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    /// Interpolation weight, for checks that use one.
    pub lambda: Option<f64>,
    /// Iteration index, for trace checks.
    pub index: Option<usize>,
    /// `rhs - lhs` of the failed inequality (negative).
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub check: String,
    pub n_samples: usize,
    pub n_violations: usize,
    /// Smallest `rhs - lhs` seen; negative when something failed.
    pub worst_margin: f64,
    /// The worst violation, present iff `n_violations > 0`.
    pub witness: Option<Witness>,
}

impl ViolationReport {
    pub fn empty(check: impl Into<String>) -> Self {
        ViolationReport {
            check: check.into(),
            n_samples: 0,
            n_violations: 0,
            worst_margin: f64::INFINITY,
            witness: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.n_violations == 0
    }

    /// Records one evaluated inequality with margin `rhs - lhs` and allowed slack.
    pub(crate) fn record(&mut self, margin: f64, slack: f64, witness: impl FnOnce() -> Witness) {
        self.n_samples += 1;
        // NaN margins count as failures.
        let failed = !(margin >= -slack);
        if margin < self.worst_margin || (margin.is_nan() && !self.worst_margin.is_nan()) {
            self.worst_margin = margin;
        }
        if failed {
            self.n_violations += 1;
            let replace = match &self.witness {
                None => true,
                Some(w) => margin < w.margin,
            };
            if replace {
                let mut w = witness();
                w.margin = margin;
                self.witness = Some(w);
            }
        }
    }

    /// Combines two reports of the same check.
    pub fn merge(mut self, other: ViolationReport) -> ViolationReport {
        self.n_samples += other.n_samples;
        self.n_violations += other.n_violations;
        self.worst_margin = self.worst_margin.min(other.worst_margin);
        self.witness = match (self.witness, other.witness) {
            (Some(a), Some(b)) => Some(if b.margin < a.margin { b } else { a }),
            (a, b) => a.or(b),
        };
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
