use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_strong(kappa: f64, gamma: f64, beta_lower: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::param("kappa", format!("{kappa} is not in (0, 1]")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", "the linear rate needs gamma > 0"));
    }
    if !(beta_lower > 0.0 && beta_lower.is_finite()) {
        return Err(Error::param("beta_lower", "must be positive and finite"));
    }
    Ok(())
}

/// `1 + kappa beta' gamma + kappa^2 beta' gamma / (2 - kappa)`, the squared
/// inverse of the contraction factor.
fn contraction_base(kappa: f64, gamma: f64, beta_lower: f64) -> f64 {
    1.0 + kappa * beta_lower * gamma + kappa * kappa * beta_lower * gamma / (2.0 - kappa)
}

/// Per-step contraction factor of `|x^k - xbar|` for strongly quasar-convex
/// objectives: `1 / sqrt(1 + kappa beta' gamma + kappa^2 beta' gamma / (2 - kappa))`.
pub fn theoretical_rate(kappa: f64, gamma: f64, beta_lower: f64) -> Result<f64> {
    check_strong(kappa, gamma, beta_lower)?;
    Ok(1.0 / contraction_base(kappa, gamma, beta_lower).sqrt())
}

/// Ceiling that ignores rounding noise: values within `1e-9` (relative) of an
/// integer snap to it.
fn robust_ceil(x: f64) -> u64 {
    if x <= 0.0 {
        return 0;
    }
    let r = x.round();
    let c = if (x - r).abs() <= 1e-9 * r.max(1.0) { r } else { x.ceil() };
    c as u64
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::param("eps", "must be positive and finite"));
    }
    Ok(())
}

/// Iterations after which `|x^k - xbar| <= eps` is guaranteed:
/// `ceil((ln(1/eps) + ln dist0) / ln(1 / rate))`, and 0 if `dist0 <= eps`.
pub fn iteration_bound_strong(eps: f64, kappa: f64, gamma: f64, beta_lower: f64, dist0: f64) -> Result<u64> {
    check_eps(eps)?;
    check_strong(kappa, gamma, beta_lower)?;
    if !(dist0 >= 0.0 && dist0.is_finite()) {
        return Err(Error::param("dist0", "must be nonnegative and finite"));
    }
    if dist0 <= eps {
        return Ok(0);
    }
    let denom = contraction_base(kappa, gamma, beta_lower).sqrt().ln();
    Ok(robust_ceil((eps.recip().ln() + dist0.ln()) / denom))
}

/// How to read the distance term of the value-gap iteration bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueBoundReading {
    /// `1 + (ln(1/eps) + ln(dist0 / (2 kappa beta'))) / ln(1/rate)`, with the
    /// distance unsquared and one factor of the rate per step.
    Displayed,
    /// `1 + (ln(1/eps) + ln(dist0^2 / (2 kappa beta'))) / ln(1/rate^2)`, which
    /// is what `h(x^k) - h(xbar) <= |x^{k-1} - xbar|^2 / (2 kappa beta')`
    /// combined with the distance contraction gives.
    Squared,
}

/// Iterations after which `h(x^k) - h(xbar) <= eps` for strongly
/// quasar-convex objectives, under either reading of the distance term.
pub fn value_iteration_bound(
    eps: f64,
    kappa: f64,
    gamma: f64,
    beta_lower: f64,
    dist0: f64,
    reading: ValueBoundReading,
) -> Result<u64> {
    check_eps(eps)?;
    check_strong(kappa, gamma, beta_lower)?;
    if !(dist0 >= 0.0 && dist0.is_finite()) {
        return Err(Error::param("dist0", "must be nonnegative and finite"));
    }
    if dist0 == 0.0 {
        return Ok(0);
    }
    let log_rate = contraction_base(kappa, gamma, beta_lower).sqrt().ln();
    let scale = 2.0 * kappa * beta_lower;
    let raw = match reading {
        ValueBoundReading::Displayed => (eps.recip().ln() + (dist0 / scale).ln()) / log_rate,
        ValueBoundReading::Squared => (eps.recip().ln() + (dist0 * dist0 / scale).ln()) / (2.0 * log_rate),
    };
    Ok(1 + robust_ceil(raw))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Until some step satisfies `|x^{k+1} - x^k| <= eps`:
    /// `2 beta'' (h(x^0) - min h) / eps^2`.
    Step,
    /// Until `h(x^k) - min h <= eps`: `|x^0 - xbar|^2 / (2 kappa beta' eps)`.
    Value,
}

/// Iteration bounds for quasar-convex (possibly `gamma = 0`) objectives.
///
/// `start` is the initial gap `h(x^0) - min h` for [`BoundKind::Step`] and
/// the distance `|x^0 - xbar|` for [`BoundKind::Value`]. The step bound needs
/// `beta_upper`.
pub fn iteration_bound_quasar(
    eps: f64,
    kind: BoundKind,
    beta_lower: f64,
    beta_upper: Option<f64>,
    kappa: f64,
    start: f64,
) -> Result<u64> {
    check_eps(eps)?;
    if !(start >= 0.0 && start.is_finite()) {
        return Err(Error::param("start", "must be nonnegative and finite"));
    }
    let raw = match kind {
        BoundKind::Step => {
            let upper = beta_upper.ok_or_else(|| Error::param("beta_upper", "required for the step bound"))?;
            if !(upper > 0.0 && upper.is_finite()) {
                return Err(Error::param("beta_upper", "must be positive and finite"));
            }
            2.0 * upper * start / (eps * eps)
        }
        BoundKind::Value => {
            if !(kappa > 0.0 && kappa <= 1.0) {
                return Err(Error::param("kappa", format!("{kappa} is not in (0, 1]")));
            }
            if !(beta_lower > 0.0 && beta_lower.is_finite()) {
                return Err(Error::param("beta_lower", "must be positive and finite"));
            }
            start * start / (2.0 * kappa * beta_lower * eps)
        }
    };
    Ok(robust_ceil(raw))
}

/// Largest `t` in `[lo, hi]` with `passes(t)`, by bisection, assuming
/// `passes` holds below some threshold and fails above it. Returns `None` if
/// `passes(lo)` fails. Best-effort: sampled checks are not monotone in general.
pub fn bisect_largest(lo: f64, hi: f64, iterations: usize, mut passes: impl FnMut(f64) -> bool) -> Option<f64> {
    if !passes(lo) {
        return None;
    }
    if passes(hi) {
        return Some(hi);
    }
    let (mut good, mut bad) = (lo, hi);
    for _ in 0..iterations {
        let mid = 0.5 * (good + bad);
        if passes(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Some(good)
}
