use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::sampler::{Sample, Sampler};
use super::{ViolationReport, Witness, EXACT_SLACK, FD_SLACK};
use crate::error::{Error, Result};
use crate::objective::{Objective, QuasarCertificate};
use crate::space::{finite_diff_gradient, Vector};

const FD_STEP: f64 = 1e-6;

fn check_cert_dim<F: Objective + ?Sized>(f: &F, cert: &QuasarCertificate) -> Result<Vector> {
    let xbar = cert.xbar();
    if xbar.len() != f.dim() {
        return Err(Error::Dimension {
            expected: f.dim(),
            got: xbar.len(),
        });
    }
    Ok(xbar)
}

/// Evaluates `margin(sample)` on `n` seeded samples in parallel and folds
/// the results in sample order.
fn run_check<F: Objective + ?Sized>(
    name: &str,
    f: &F,
    xbar: &Vector,
    sampler: &Sampler,
    n: usize,
    seed: u64,
    margin: impl Fn(&Sample) -> Option<(f64, f64)> + Sync,
) -> ViolationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = sampler.draw(&mut rng, xbar, n, f.domain());
    let margins: Vec<Option<(f64, f64)>> = samples.par_iter().map(&margin).collect();
    let mut report = ViolationReport::empty(name);
    for (s, m) in samples.iter().zip(margins) {
        if let Some((m, slack)) = m {
            report.record(m, slack, || Witness {
                x: s.x.iter().copied().collect(),
                lambda: Some(s.lambda),
                index: None,
                margin: m,
            });
        }
    }
    report
}

/// Samples the defining inequality of `(kappa, gamma)`-strong quasar-convexity
/// with respect to `xbar`:
///
/// `h(l xbar + (1-l) x) <= kappa l h(xbar) + (1 - kappa l) h(x)
///      - l (1 - l / (2 - kappa)) (kappa gamma / 2) |x - xbar|^2`.
pub fn check_quasar_inequality<F: Objective + ?Sized>(
    f: &F,
    cert: &QuasarCertificate,
    sampler: &Sampler,
    n: usize,
    seed: u64,
) -> Result<ViolationReport> {
    let xbar = check_cert_dim(f, cert)?;
    let (kappa, gamma) = (cert.kappa(), cert.gamma());
    let hbar = f.value(&xbar);
    Ok(run_check("quasar_inequality", f, &xbar, sampler, n, seed, |s| {
        let l = s.lambda;
        let hx = f.value(&s.x);
        let mid = &xbar * l + &s.x * (1.0 - l);
        let lhs = f.value(&mid);
        let rhs = kappa * l * hbar + (1.0 - kappa * l) * hx
            - l * (1.0 - l / (2.0 - kappa)) * (kappa * gamma / 2.0) * (&s.x - &xbar).norm_squared();
        Some((rhs - lhs, EXACT_SLACK * (1.0 + hx.abs())))
    }))
}

/// Samples the quadratic growth bound
/// `h(xbar) + kappa gamma / (2 (2 - kappa)) |y - xbar|^2 <= h(y)`.
pub fn check_quadratic_growth<F: Objective + ?Sized>(
    f: &F,
    cert: &QuasarCertificate,
    sampler: &Sampler,
    n: usize,
    seed: u64,
) -> Result<ViolationReport> {
    let xbar = check_cert_dim(f, cert)?;
    let modulus = cert.growth_modulus();
    let hbar = f.value(&xbar);
    Ok(run_check("quadratic_growth", f, &xbar, sampler, n, seed, |s| {
        let hy = f.value(&s.x);
        let margin = hy - hbar - modulus * (&s.x - &xbar).norm_squared();
        Some((margin, EXACT_SLACK * (1.0 + hy.abs())))
    }))
}

/// Samples the first-order form
/// `h(xbar) >= h(y) + (1/kappa) <grad h(y), xbar - y> + (gamma/2) |y - xbar|^2`
/// with finite-difference gradients.
///
/// Points where the finite-difference gradient and the Clarke element
/// disagree (kinks) are nudged up to three times and skipped if still
/// nonsmooth; skipped points do not count as samples.
pub fn check_diff_characterization<F: Objective + ?Sized>(
    f: &F,
    cert: &QuasarCertificate,
    sampler: &Sampler,
    n: usize,
    seed: u64,
) -> Result<ViolationReport> {
    let xbar = check_cert_dim(f, cert)?;
    let (kappa, gamma) = (cert.kappa(), cert.gamma());
    let hbar = f.value(&xbar);
    Ok(run_check("diff_characterization", f, &xbar, sampler, n, seed, |s| {
        let y = smooth_point(f, &s.x)?;
        let (y, grad) = y;
        let hy = f.value(&y);
        let d = &xbar - &y;
        let rhs = hy + grad.dot(&d) / kappa + gamma / 2.0 * d.norm_squared();
        let slack = FD_SLACK * (1.0 + hy.abs() + grad.norm() * d.norm() / kappa);
        Some((hbar - rhs, slack))
    }))
}

/// Finds a point near `x` where `f` looks differentiable; returns it with its
/// finite-difference gradient.
fn smooth_point<F: Objective + ?Sized>(f: &F, x: &Vector) -> Option<(Vector, Vector)> {
    let mut y = x.clone();
    for attempt in 0..4 {
        if let Ok(g) = finite_diff_gradient(f, &y, FD_STEP) {
            let e = f.clarke_element(&y);
            if g.iter().all(|v| v.is_finite()) && (&g - &e).norm() <= 1e-4 * (1.0 + g.norm()) {
                return Some((y, g));
            }
        }
        // deterministic nudge away from the kink
        let shift = 1e-4 * (attempt + 1) as f64;
        y = y.map_with_location(|i, _, v| v + shift * if i % 2 == 0 { 1.0 } else { -0.7 });
    }
    None
}

/// Minimum of `h(x) / |x|^2` over `samples_per_radius` points on the sphere
/// of the largest radius (centred at the origin). For 2-supercoercive `h`
/// this stays bounded away from zero.
///
/// Every radius is sampled; the function returns the value at the last one,
/// so callers can pass a ladder and read the tail.
pub fn check_supercoercive<F: Objective + ?Sized>(
    f: &F,
    radii: &[f64],
    samples_per_radius: usize,
    seed: u64,
) -> Result<f64> {
    if radii.is_empty() {
        return Err(Error::param("radii", "must not be empty"));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return Err(Error::param("radii", "must be positive and increasing"));
    }
    if samples_per_radius == 0 {
        return Err(Error::param("samples_per_radius", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = f.dim();
    let origin = Vector::zeros(dim);
    let mut last = f64::INFINITY;
    for &r in radii {
        let sphere = Sampler::SphereStratified { radius: 1.0 };
        last = sphere
            .draw(&mut rng, &origin, samples_per_radius, None)
            .into_iter()
            .map(|s| {
                let norm = s.x.norm();
                let x = if norm > 0.0 { s.x * (r / norm) } else { s.x };
                let x = match f.domain() {
                    Some(b) => crate::space::project_box(&x.abs(), b).unwrap_or(x),
                    None => x,
                };
                f.value(&x) / x.norm_squared()
            })
            .filter(|v| !v.is_nan())
            .fold(f64::INFINITY, f64::min);
    }
    Ok(last)
}
