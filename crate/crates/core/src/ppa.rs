//! The proximal point method `x^{k+1} in Prox_{beta_k h}(x^k)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::prox::{prox, ProxConfig, ProxResult};
use crate::space::{lex_cmp, Vector};
use crate::trace::{InnerStats, SolverKind, SolverTrace, Termination};

/// Step sizes `beta_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaSchedule {
    Constant { beta: f64 },
    /// `beta_k = initial * ratio^k`.
    Geometric { initial: f64, ratio: f64 },
    /// Explicit values; the last one repeats.
    List { values: Vec<f64> },
}

impl BetaSchedule {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            BetaSchedule::Constant { beta } => *beta,
            BetaSchedule::Geometric { initial, ratio } => initial * ratio.powi(k.min(i32::MAX as usize) as i32),
            BetaSchedule::List { values } => values[k.min(values.len() - 1)],
        }
    }

    /// Smallest and largest value over `k = 0..=last`.
    fn range(&self, last: usize) -> (f64, f64) {
        match self {
            BetaSchedule::Constant { beta } => (*beta, *beta),
            BetaSchedule::Geometric { .. } => {
                let (a, b) = (self.at(0), self.at(last));
                (a.min(b), a.max(b))
            }
            BetaSchedule::List { values } => values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v))),
        }
    }
}

impl Default for BetaSchedule {
    fn default() -> Self {
        BetaSchedule::Constant { beta: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpaConfig {
    pub beta_schedule: BetaSchedule,
    /// Lower bound `beta'` on every `beta_k`.
    pub beta_lower: f64,
    /// Optional upper bound `beta''`.
    pub beta_upper: Option<f64>,
    /// Stop once `|x^{k+1} - x^k| <= outer_tol`.
    pub outer_tol: f64,
    pub max_outer_iter: usize,
    /// Inner settings; its `beta` is replaced by `beta_k` at each step.
    pub prox: ProxConfig,
}

impl Default for PpaConfig {
    fn default() -> Self {
        PpaConfig {
            beta_schedule: BetaSchedule::default(),
            beta_lower: 0.05,
            beta_upper: None,
            outer_tol: 1e-9,
            max_outer_iter: 30_000,
            prox: ProxConfig::default(),
        }
    }
}

impl PpaConfig {
    /// Constant step `beta` with `beta' = beta`.
    pub fn constant(beta: f64) -> Self {
        PpaConfig {
            beta_schedule: BetaSchedule::Constant { beta },
            beta_lower: beta,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_lower > 0.0 && self.beta_lower.is_finite()) {
            return Err(Error::param("beta_lower", "must be positive and finite"));
        }
        if !(self.outer_tol > 0.0) {
            return Err(Error::param("outer_tol", "must be positive"));
        }
        if self.max_outer_iter == 0 {
            return Err(Error::param("max_outer_iter", "must be at least 1"));
        }
        if let BetaSchedule::List { values } = &self.beta_schedule {
            if values.is_empty() {
                return Err(Error::param("beta_schedule", "list must not be empty"));
            }
        }
        let (lo, hi) = self.beta_schedule.range(self.max_outer_iter);
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::param("beta_schedule", "values must be finite"));
        }
        if lo < self.beta_lower {
            return Err(Error::param(
                "beta_schedule",
                format!("value {lo} falls below beta_lower = {}", self.beta_lower),
            ));
        }
        if let Some(upper) = self.beta_upper {
            if hi > upper {
                return Err(Error::param(
                    "beta_schedule",
                    format!("value {hi} exceeds beta_upper = {upper}"),
                ));
            }
        }
        self.prox.validate()
    }
}

/// Picks the next iterate from a prox set: lowest subproblem value, then
/// lexicographically smallest point among values tied within the prox
/// tolerance. The prox result already holds only tied candidates, so this is
/// the lexicographic minimum over the set.
pub fn select_iterate(candidates: &ProxResult) -> Result<Vector> {
    candidates
        .minimizers
        .iter()
        .min_by(|a, b| lex_cmp(&a.point, &b.point))
        .map(|c| c.point.clone())
        .ok_or_else(|| Error::Internal("prox returned no candidates".into()))
}

/// Runs the proximal point method from `x0`.
pub fn run_ppa<F: Objective + ?Sized>(f: &F, x0: &Vector, cfg: &PpaConfig) -> Result<SolverTrace> {
    run_ppa_tracked(f, x0, cfg, None)
}

/// As [`run_ppa`], also recording distances to `reference`.
pub fn run_ppa_tracked<F: Objective + ?Sized>(
    f: &F,
    x0: &Vector,
    cfg: &PpaConfig,
    reference: Option<&Vector>,
) -> Result<SolverTrace> {
    cfg.validate()?;
    if x0.len() != f.dim() {
        return Err(Error::Dimension {
            expected: f.dim(),
            got: x0.len(),
        });
    }
    if let Some(i) = x0.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if let Some(r) = reference {
        if r.len() != f.dim() {
            return Err(Error::Dimension {
                expected: f.dim(),
                got: r.len(),
            });
        }
    }

    let mut trace = SolverTrace::start(SolverKind::Ppa, x0.clone(), f.value(x0), reference);
    let mut x = x0.clone();
    let mut inner = cfg.prox.clone();
    for k in 0..cfg.max_outer_iter {
        inner.beta = cfg.beta_schedule.at(k);
        let set = prox(f, &x, &inner)?;
        if !set.converged {
            trace.terminated_by = Termination::InnerFailure;
            return Ok(trace);
        }
        let next = select_iterate(&set)?;
        let residual = set
            .minimizers
            .iter()
            .find(|c| c.point == next)
            .map_or(f64::NAN, |c| c.residual_norm);
        let stats = InnerStats {
            iterations: set.inner_iterations.iter().sum(),
            residual,
        };
        let step = (&next - &x).norm();
        trace.push(next.clone(), f.value(&next), stats, reference);
        x = next;
        if step == 0.0 {
            trace.terminated_by = Termination::FixedPoint;
            return Ok(trace);
        }
        if step <= cfg.outer_tol {
            trace.terminated_by = Termination::StepTol;
            return Ok(trace);
        }
    }
    trace.terminated_by = Termination::MaxIter;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::ProxCandidate;

    fn cand(p: &[f64], v: f64) -> ProxCandidate {
        ProxCandidate {
            point: Vector::from_row_slice(p),
            objective_value: v,
            residual_norm: 0.0,
            certified: true,
        }
    }

    #[test]
    fn selection_rules() {
        let single = ProxResult {
            minimizers: vec![cand(&[0.3], 1.0)],
            converged: true,
            inner_iterations: vec![],
        };
        assert_eq!(select_iterate(&single).unwrap()[0], 0.3);

        let tied = ProxResult {
            minimizers: vec![cand(&[1.0], 1.125), cand(&[0.0], 1.125)],
            converged: true,
            inner_iterations: vec![],
        };
        assert_eq!(select_iterate(&tied).unwrap()[0], 0.0);

        let empty = ProxResult {
            minimizers: vec![],
            converged: false,
            inner_iterations: vec![],
        };
        assert!(matches!(select_iterate(&empty), Err(Error::Internal(_))));
    }

    #[test]
    fn schedule_bounds_are_enforced() {
        let mut cfg = PpaConfig::constant(0.05);
        assert!(cfg.validate().is_ok());
        cfg.beta_lower = 0.1;
        assert!(cfg.validate().is_err());

        let cfg = PpaConfig {
            beta_schedule: BetaSchedule::Geometric { initial: 1.0, ratio: 0.5 },
            beta_lower: 0.01,
            max_outer_iter: 10,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());

        let cfg = PpaConfig {
            beta_schedule: BetaSchedule::List { values: vec![0.1, 0.2] },
            beta_lower: 0.1,
            beta_upper: Some(0.15),
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        assert_eq!(cfg.beta_schedule.at(7), 0.2);
    }
}
