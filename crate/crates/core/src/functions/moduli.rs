//! Moduli of positively homogeneous functions.
//!
//! `theta(l) = (1 - (1 - l)^a) / l` and
//! `Q(l) = (theta(l) - k) / ((1 - l / (2 - k)) k / 2)` on `(0, 1]`, together
//! with their closed-form infima and the strong modulus they induce.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::space::{BoxConstraint, Vector};

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::param("lambda", format!("{lambda} is not in (0, 1]")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param("alpha", format!("{alpha} is not positive")));
    }
    Ok(())
}

/// `kappa` must lie in `(0, alpha)` when `alpha <= 1` and in `(0, 1]` otherwise.
fn check_kappa(alpha: f64, kappa: f64) -> Result<()> {
    let ok = if alpha <= 1.0 {
        kappa > 0.0 && kappa < alpha
    } else {
        kappa > 0.0 && kappa <= 1.0
    };
    if !ok {
        let range = if alpha <= 1.0 {
            format!("(0, {alpha})")
        } else {
            "(0, 1]".to_string()
        };
        return Err(Error::param("kappa", format!("{kappa} is not in {range}")));
    }
    Ok(())
}

pub fn theta_alpha(lambda: f64, alpha: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Ok(1.0);
    }
    // 1 - (1 - l)^a without cancellation for small l.
    Ok(-(alpha * (-lambda).ln_1p()).exp_m1() / lambda)
}

pub fn q_alpha_kappa(lambda: f64, alpha: f64, kappa: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_alpha(alpha)?;
    check_kappa(alpha, kappa)?;
    if kappa == 1.0 && lambda == 1.0 {
        // removable singularity
        return Ok(2.0);
    }
    let theta = theta_alpha(lambda, alpha)?;
    Ok((theta - kappa) / ((1.0 - lambda / (2.0 - kappa)) * kappa / 2.0))
}

/// `inf theta` over `(0, 1]`: `alpha` for `alpha <= 1`, else 1.
pub fn theta_infimum(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(if alpha <= 1.0 { alpha } else { 1.0 })
}

/// `inf Q` over `(0, 1]`: `2 (alpha - kappa) / kappa` for `alpha < 2`,
/// `2 (2 - kappa) / kappa` for `alpha >= 2`.
pub fn q_infimum(alpha: f64, kappa: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_kappa(alpha, kappa)?;
    Ok(if alpha < 2.0 {
        2.0 * (alpha - kappa) / kappa
    } else {
        2.0 * (2.0 - kappa) / kappa
    })
}

/// Data of a homogeneous function on a compact set `K`: degree `alpha`,
/// sphere radius `c`, `m = sup ||x||` over `K`, and `s_c`, the minimum of the
/// function on the radius-`c` sphere inside `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousParams {
    pub alpha: f64,
    pub c: f64,
    pub m: f64,
    pub s_c: f64,
}

impl HomogeneousParams {
    pub fn new(alpha: f64, c: f64, m: f64, s_c: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("c", c), ("M", m), ("S_c", s_c)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("{v} is not positive")));
            }
        }
        if c > m {
            return Err(Error::param("c", format!("{c} exceeds M = {m}")));
        }
        Ok(Self { alpha, c, m, s_c })
    }
}

/// Certified `gamma` such that the function is `(kappa, gamma)`-strongly
/// quasar-convex with respect to the origin on `K`.
pub fn strong_modulus(params: &HomogeneousParams, kappa: f64) -> Result<f64> {
    let HomogeneousParams { alpha, c, m, s_c } = *params;
    if alpha > 2.0 {
        return Err(Error::Unsupported(format!(
            "degree {alpha} > 2 admits no strong modulus (h(x)/||x||^2 -> 0 at the origin)"
        )));
    }
    check_kappa(alpha, kappa)?;
    if alpha == 2.0 {
        Ok(2.0 * (2.0 - kappa) * s_c / (kappa * c * c))
    } else {
        Ok(2.0 * (alpha - kappa) * s_c / (kappa * c.powf(alpha) * m.powf(2.0 - alpha)))
    }
}

/// Minimum of `f` over the sphere of radius `c` around the origin, restricted
/// to `domain` when given, estimated by deterministic dense sampling.
///
/// In 2-D the sphere is sampled at `samples` equally spaced angles. In higher
/// dimension the points are a Halton sequence mapped onto the sphere.
pub fn sphere_minimum<F: Objective + ?Sized>(
    f: &F,
    c: f64,
    domain: Option<&BoxConstraint>,
    samples: usize,
) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::param("c", "must be positive"));
    }
    let n = f.dim();
    let inside = |x: &Vector| domain.map_or(true, |d| d.contains(x));
    let mut best = f64::INFINITY;
    let mut consider = |x: Vector| {
        if inside(&x) {
            best = best.min(f.value(&x));
        }
    };
    match n {
        1 => {
            consider(Vector::from_element(1, c));
            consider(Vector::from_element(1, -c));
        }
        2 => {
            for i in 0..samples {
                let t = std::f64::consts::TAU * i as f64 / samples as f64;
                consider(Vector::from_vec(vec![c * t.cos(), c * t.sin()]));
            }
            // Axis points are frequent minimizers (and the orthant corners).
            for (a, b) in [(c, 0.0), (0.0, c), (-c, 0.0), (0.0, -c)] {
                consider(Vector::from_vec(vec![a, b]));
            }
        }
        _ => {
            for i in 0..n {
                for s in [c, -c] {
                    let mut e = Vector::zeros(n);
                    e[i] = s;
                    consider(e);
                }
            }
            for k in 1..=samples {
                let mut x = Vector::from_fn(n, |i, _| 2.0 * halton(k, PRIMES[i % PRIMES.len()]) - 1.0);
                let r = x.norm();
                if r > 1e-12 {
                    x *= c / r;
                    consider(x.clone());
                    // Fold into the orthant as well, so restricted domains get coverage.
                    consider(x.map(f64::abs));
                }
            }
        }
    }
    if best.is_infinite() {
        return Err(Error::Domain("sphere does not meet the domain".into()));
    }
    Ok(best)
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn halton(mut index: usize, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while index > 0 {
        f /= b;
        r += f * (index as u64 % base) as f64;
        index /= base as usize;
    }
    r
}
