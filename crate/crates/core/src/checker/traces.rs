use super::bounds::theoretical_rate;
use super::{ViolationReport, Witness, EXACT_SLACK};
use crate::error::{Error, Result};
use crate::objective::QuasarCertificate;
use crate::space::Vector;
use crate::trace::SolverTrace;

/// Absolute slack added to trace inequalities; absorbs the inexactness of
/// the inner solves.
const TRACE_ABS_SLACK: f64 = 1e-9;

fn distances(trace: &SolverTrace, xbar: &Vector) -> Result<Vec<f64>> {
    trace
        .iterates
        .iter()
        .map(|x| {
            if x.len() != xbar.len() {
                Err(Error::Dimension {
                    expected: xbar.len(),
                    got: x.len(),
                })
            } else {
                Ok((x - xbar).norm())
            }
        })
        .collect()
}

fn witness(trace: &SolverTrace, k: usize) -> Witness {
    Witness {
        x: trace.iterates[k].iter().copied().collect(),
        lambda: None,
        index: Some(k),
        margin: 0.0,
    }
}

/// Checks every step of a trace against the linear rate
/// `|x^{k+1} - xbar| <= rate |x^k - xbar|` and every iterate against the
/// value decay `h(x^k) - h(xbar) <= rate^{2(k-1)} |x^0 - xbar|^2 / (2 kappa beta')`.
///
/// Traces do not carry the objective, so `hbar = h(xbar)` is passed in.
pub fn check_trace_linear(
    trace: &SolverTrace,
    cert: &QuasarCertificate,
    hbar: f64,
    beta_lower: f64,
) -> Result<ViolationReport> {
    let rate = theoretical_rate(cert.kappa(), cert.gamma(), beta_lower)?;
    let xbar = cert.xbar();
    let dist = distances(trace, &xbar)?;
    let mut report = ViolationReport::empty("trace_linear");
    for k in 0..trace.steps() {
        let margin = rate * dist[k] - dist[k + 1];
        report.record(margin, TRACE_ABS_SLACK + EXACT_SLACK * dist[k], || witness(trace, k + 1));
    }
    let scale = dist[0] * dist[0] / (2.0 * cert.kappa() * beta_lower);
    for k in 1..trace.iterates.len() {
        let bound = rate.powi(2 * (k as i32 - 1)) * scale;
        let gap = trace.values[k] - hbar;
        report.record(bound - gap, TRACE_ABS_SLACK + EXACT_SLACK * gap.abs(), || witness(trace, k));
    }
    Ok(report)
}

/// Checks the sublinear value bound
/// `h(x^N) - h(xbar) <= |x^0 - xbar|^2 / (2 kappa beta' N)` for every `N >= 1`
/// and the Fejér inequality
/// `|x^{k+1} - xbar|^2 <= |x^k - xbar|^2 + 2 kappa beta' (h(xbar) - h(x^{k+1}))`.
///
/// The trace does not store `beta_k`; since `h(xbar) <= h(x^{k+1})`, using
/// `beta' <= beta_k` gives a weaker inequality that still must hold.
/// `hbar = h(xbar)` is passed in as for [`check_trace_linear`].
pub fn check_trace_sublinear(
    trace: &SolverTrace,
    cert: &QuasarCertificate,
    hbar: f64,
    beta_lower: f64,
) -> Result<ViolationReport> {
    if !(beta_lower > 0.0 && beta_lower.is_finite()) {
        return Err(Error::param("beta_lower", "must be positive and finite"));
    }
    let xbar = cert.xbar();
    let dist = distances(trace, &xbar)?;
    let kappa = cert.kappa();
    let mut report = ViolationReport::empty("trace_sublinear");
    let d0sq = dist[0] * dist[0];
    for n in 1..trace.iterates.len() {
        let gap = trace.values[n] - hbar;
        let bound = d0sq / (2.0 * kappa * beta_lower * n as f64);
        report.record(bound - gap, TRACE_ABS_SLACK + EXACT_SLACK * gap.abs(), || witness(trace, n));
    }
    for k in 0..trace.steps() {
        let rhs = dist[k] * dist[k] + 2.0 * kappa * beta_lower * (hbar - trace.values[k + 1]);
        let lhs = dist[k + 1] * dist[k + 1];
        report.record(rhs - lhs, TRACE_ABS_SLACK + EXACT_SLACK * dist[k] * dist[k], || witness(trace, k + 1));
    }
    Ok(report)
}

/// Share of tail steps obeying a per-step distance ratio bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TailCompliance {
    pub steps: usize,
    pub compliant: usize,
    pub max_ratio: f64,
}

impl TailCompliance {
    pub fn fraction(&self) -> f64 {
        if self.steps == 0 {
            1.0
        } else {
            self.compliant as f64 / self.steps as f64
        }
    }
}

/// Ratios `|x^{k+1} - xbar| / |x^k - xbar|` over the last `tail` share of the
/// steps (skipping steps that start at `xbar`), counted as compliant when
/// `ratio <= bound + slack`.
pub fn tail_ratio_compliance(trace: &SolverTrace, xbar: &Vector, bound: f64, tail: f64, slack: f64) -> Result<TailCompliance> {
    if !(tail > 0.0 && tail <= 1.0) {
        return Err(Error::param("tail", "must lie in (0, 1]"));
    }
    let dist = distances(trace, xbar)?;
    let steps = trace.steps();
    let first = steps - ((steps as f64 * tail).round() as usize).min(steps);
    let mut out = TailCompliance {
        steps: 0,
        compliant: 0,
        max_ratio: 0.0,
    };
    for k in first..steps {
        if dist[k] == 0.0 {
            continue;
        }
        let ratio = dist[k + 1] / dist[k];
        out.steps += 1;
        if ratio <= bound + slack {
            out.compliant += 1;
        }
        out.max_ratio = out.max_ratio.max(ratio);
    }
    Ok(out)
}
