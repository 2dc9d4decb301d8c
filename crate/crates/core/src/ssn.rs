//! Semismooth Newton applied directly to `G(x) = 0`, `G` a Clarke element
//! of the objective. Used as the baseline against the proximal point method.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::newton::{damped_newton, Fallback, NewtonSettings, NewtonStatus};
use crate::objective::Objective;
use crate::space::Vector;
use crate::trace::{InnerStats, SolverKind, SolverTrace, Termination};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SsnConfig {
    /// Stop once `|G(x)| <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    /// Runs with `|x|` above this are stopped as diverged.
    pub divergence_guard: f64,
}

impl Default for SsnConfig {
    fn default() -> Self {
        SsnConfig {
            tol: 1e-9,
            max_iter: 30_000,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            divergence_guard: 1e8,
        }
    }
}

impl SsnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::param("tol", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter", "must be at least 1"));
        }
        for (name, v) in [("armijo_c", self.armijo_c), ("backtrack_factor", self.backtrack_factor)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::param(name, format!("must lie in (0, 1), got {v}")));
            }
        }
        if !(self.divergence_guard > 0.0) {
            return Err(Error::param("divergence_guard", "must be positive"));
        }
        Ok(())
    }
}

/// Damped semismooth Newton on the Clarke element map, with Armijo
/// backtracking on `|G|^2` and a steepest-descent step on `|G|^2 / 2`
/// when the Newton system is singular or its direction is rejected.
pub fn run_ssn<F: Objective + ?Sized>(f: &F, x0: &Vector, cfg: &SsnConfig) -> Result<SolverTrace> {
    run_ssn_tracked(f, x0, cfg, None)
}

/// As [`run_ssn`], also recording distances to `reference`.
pub fn run_ssn_tracked<F: Objective + ?Sized>(
    f: &F,
    x0: &Vector,
    cfg: &SsnConfig,
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
    let settings = NewtonSettings {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        armijo_c: cfg.armijo_c,
        backtrack_factor: cfg.backtrack_factor,
        max_backtracks: 60,
        divergence_guard: cfg.divergence_guard,
    };
    let mut trace = SolverTrace::start(SolverKind::Ssn, x0.clone(), f.value(x0), reference);
    let residual = |x: &Vector| f.clarke_element(x);
    let jacobian = |x: &Vector| f.clarke_jacobian(x);
    let out = damped_newton(
        x0,
        &residual,
        &jacobian,
        Fallback::ResidualDescent,
        f.domain(),
        &settings,
        &mut |step| {
            let stats = InnerStats {
                iterations: step.backtracks,
                residual: step.residual_norm,
            };
            trace.push(step.x.clone(), f.value(step.x), stats, reference);
        },
    );
    trace.terminated_by = match out.status {
        NewtonStatus::Converged => Termination::Stationary,
        NewtonStatus::MaxIter => Termination::MaxIter,
        NewtonStatus::Diverged => Termination::Diverged,
        NewtonStatus::Stalled => Termination::Stalled,
    };
    Ok(trace)
}
