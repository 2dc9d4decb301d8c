use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::space::{BoxConstraint, Matrix, Vector};

use super::{stable_norm, Homogeneous};

/// `sum_i d_i x_i^2` with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    weights: Vec<f64>,
}

impl Quadratic {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::param("weights", "must be nonempty, positive and finite"));
        }
        Ok(Self { weights })
    }

    /// `scale * ||x||^2`.
    pub fn isotropic(dim: usize, scale: f64) -> Self {
        Self {
            weights: vec![scale; dim],
        }
    }

    /// Strong-convexity modulus `2 min_i d_i`.
    pub fn strong_convexity(&self) -> f64 {
        2.0 * self.weights.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

impl Objective for Quadratic {
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn dim(&self) -> usize {
        self.weights.len()
    }
    fn value(&self, x: &Vector) -> f64 {
        x.iter().zip(&self.weights).map(|(v, w)| w * v * v).sum()
    }
    fn clarke_element(&self, x: &Vector) -> Vector {
        Vector::from_iterator(x.len(), x.iter().zip(&self.weights).map(|(v, w)| 2.0 * w * v))
    }
    fn clarke_jacobian(&self, _x: &Vector) -> Option<Matrix> {
        Some(Matrix::from_diagonal(&Vector::from_iterator(
            self.weights.len(),
            self.weights.iter().map(|w| 2.0 * w),
        )))
    }
}

impl Homogeneous for Quadratic {
    fn degree(&self) -> f64 {
        2.0
    }
}

/// `||x||^alpha` (Euclidean norm).
pub fn euclid_power(x: &Vector, alpha: f64) -> f64 {
    stable_norm(x).powf(alpha)
}

/// `||x||^alpha` with `0 < alpha <= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclidPower {
    dim: usize,
    alpha: f64,
}

impl EuclidPower {
    pub fn new(dim: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::param("alpha", format!("{alpha} is not in (0, 2]")));
        }
        Ok(Self { dim, alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Objective for EuclidPower {
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Vector) -> f64 {
        euclid_power(x, self.alpha)
    }
    fn clarke_element(&self, x: &Vector) -> Vector {
        let r = stable_norm(x);
        if r == 0.0 {
            return Vector::zeros(x.len());
        }
        x * (self.alpha * r.powf(self.alpha - 2.0))
    }
    fn clarke_jacobian(&self, x: &Vector) -> Option<Matrix> {
        let n = x.len();
        let r = stable_norm(x);
        if r == 0.0 {
            let d = if self.alpha == 2.0 { 2.0 } else { 0.0 };
            return Some(Matrix::identity(n, n) * d);
        }
        let u = x / r;
        let scale = self.alpha * r.powf(self.alpha - 2.0);
        Some((Matrix::identity(n, n) + (&u * u.transpose()) * (self.alpha - 2.0)) * scale)
    }
}

impl Homogeneous for EuclidPower {
    fn degree(&self) -> f64 {
        self.alpha
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("p", format!("{p} is not in (0, 1)")));
    }
    Ok(())
}

/// The quasi-norm `(sum_i |x_i|^p)^(1/p)` for `0 < p < 1`.
pub fn lp_quasinorm(x: &Vector, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(lp_sum(x, p).powf(1.0 / p))
}

/// The regularizer `sum_i |x_i|^p` for `0 < p < 1`.
pub fn lp_regularizer(x: &Vector, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(lp_sum(x, p))
}

fn lp_sum(x: &Vector, p: f64) -> f64 {
    x.iter().map(|v| v.abs().powf(p)).sum()
}

/// `(sum_i |x_i|^p)^(1/p)`, positively homogeneous of degree 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LpQuasiNorm {
    dim: usize,
    p: f64,
}

impl LpQuasiNorm {
    pub fn new(dim: usize, p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Self { dim, p })
    }
}

impl Objective for LpQuasiNorm {
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Vector) -> f64 {
        lp_sum(x, self.p).powf(1.0 / self.p)
    }
    // Coordinates equal to zero take the zero element of their |.|^p branch.
    fn clarke_element(&self, x: &Vector) -> Vector {
        let s = lp_sum(x, self.p);
        if s == 0.0 {
            return Vector::zeros(x.len());
        }
        let outer = s.powf(1.0 / self.p - 1.0);
        x.map(|v| {
            if v == 0.0 {
                0.0
            } else {
                outer * v.abs().powf(self.p - 1.0) * v.signum()
            }
        })
    }
    fn clarke_jacobian(&self, x: &Vector) -> Option<Matrix> {
        let n = x.len();
        let p = self.p;
        let s = lp_sum(x, p);
        let mut h = Matrix::zeros(n, n);
        if s == 0.0 {
            return Some(h);
        }
        let w = x.map(|v| if v == 0.0 { 0.0 } else { v.abs().powf(p - 1.0) * v.signum() });
        let a = (1.0 - p) * s.powf(1.0 / p - 2.0);
        let b = (1.0 - p) * s.powf(1.0 / p - 1.0);
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] = a * w[i] * w[j];
            }
            if x[i] != 0.0 {
                h[(i, i)] -= b * x[i].abs().powf(p - 2.0);
            }
        }
        Some(h)
    }
}

impl Homogeneous for LpQuasiNorm {
    fn degree(&self) -> f64 {
        1.0
    }
}

/// `sum_i |x_i|^p`, positively homogeneous of degree `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpRegularizer {
    dim: usize,
    p: f64,
}

impl LpRegularizer {
    pub fn new(dim: usize, p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Self { dim, p })
    }
}

impl Objective for LpRegularizer {
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Vector) -> f64 {
        lp_sum(x, self.p)
    }
    fn clarke_element(&self, x: &Vector) -> Vector {
        let p = self.p;
        x.map(|v| if v == 0.0 { 0.0 } else { p * v.abs().powf(p - 1.0) * v.signum() })
    }
    fn clarke_jacobian(&self, x: &Vector) -> Option<Matrix> {
        let p = self.p;
        let d = x.map(|v| if v == 0.0 { 0.0 } else { p * (p - 1.0) * v.abs().powf(p - 2.0) });
        Some(Matrix::from_diagonal(&d))
    }
}

impl Homogeneous for LpRegularizer {
    fn degree(&self) -> f64 {
        self.p
    }
}

fn check_weights(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(Error::param("alphas", "must be nonempty, positive and finite"));
    }
    Ok(())
}

fn check_nonnegative(x: &Vector) -> Result<()> {
    if let Some(i) = x.iter().position(|v| *v < 0.0) {
        return Err(Error::Domain(format!("component {i} is negative ({})", x[i])));
    }
    Ok(())
}

/// CES aggregate `(sum_i alpha_i x_i^beta)^(1/beta)` on the nonnegative orthant.
///
/// For `beta < 0` the value is 0 whenever some component is 0.
pub fn ces(x: &Vector, alphas: &[f64], beta: f64) -> Result<f64> {
    check_weights(alphas)?;
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::param("beta", "must be finite and nonzero"));
    }
    if x.len() != alphas.len() {
        return Err(Error::Dimension {
            expected: alphas.len(),
            got: x.len(),
        });
    }
    check_nonnegative(x)?;
    Ok(ces_value(x, alphas, beta))
}

fn ces_value(x: &Vector, alphas: &[f64], beta: f64) -> f64 {
    if beta < 0.0 && x.iter().any(|v| *v == 0.0) {
        return 0.0;
    }
    let t: f64 = x.iter().zip(alphas).map(|(v, a)| a * v.powf(beta)).sum();
    t.powf(1.0 / beta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ces {
    alphas: Vec<f64>,
    beta: f64,
    domain: BoxConstraint,
}

impl Ces {
    pub fn new(alphas: Vec<f64>, beta: f64) -> Result<Self> {
        check_weights(&alphas)?;
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::param("beta", "must be finite and nonzero"));
        }
        let domain = BoxConstraint::nonnegative(alphas.len());
        Ok(Self {
            alphas,
            beta,
            domain,
        })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl Objective for Ces {
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn dim(&self) -> usize {
        self.alphas.len()
    }
    fn value(&self, x: &Vector) -> f64 {
        if !self.domain.contains(x) {
            return f64::INFINITY;
        }
        ces_value(x, &self.alphas, self.beta)
    }
    fn clarke_element(&self, x: &Vector) -> Vector {
        let n = x.len();
        if x.iter().any(|v| *v <= 0.0) && (self.beta < 0.0 || x.iter().all(|v| *v <= 0.0)) {
            return Vector::zeros(n);
        }
        let t: f64 = x
            .iter()
            .zip(&self.alphas)
            .map(|(v, a)| a * v.max(0.0).powf(self.beta))
            .sum();
        let outer = t.powf(1.0 / self.beta - 1.0);
        Vector::from_iterator(
            n,
            x.iter().zip(&self.alphas).map(|(v, a)| {
                if *v > 0.0 {
                    outer * a * v.powf(self.beta - 1.0)
                } else {
                    0.0
                }
            }),
        )
    }
    fn clarke_jacobian(&self, x: &Vector) -> Option<Matrix> {
        let n = x.len();
        let mut h = Matrix::zeros(n, n);
        if x.iter().any(|v| *v <= 0.0) {
            return Some(h);
        }
        let b = self.beta;
        let t: f64 = x.iter().zip(&self.alphas).map(|(v, a)| a * v.powf(b)).sum();
        let w: Vec<f64> = x
            .iter()
            .zip(&self.alphas)
            .map(|(v, a)| a * v.powf(b - 1.0))
            .collect();
        let c1 = (1.0 - b) * t.powf(1.0 / b - 2.0);
        let c2 = t.powf(1.0 / b - 1.0) * (b - 1.0);
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] = c1 * w[i] * w[j];
            }
            h[(i, i)] += c2 * self.alphas[i] * x[i].powf(b - 2.0);
        }
        Some(h)
    }
    fn domain(&self) -> Option<&BoxConstraint> {
        Some(&self.domain)
    }
}

impl Homogeneous for Ces {
    fn degree(&self) -> f64 {
        1.0
    }
}

/// Leontief aggregate `min_i (x_i / alpha_i)^exponent` on the nonnegative orthant.
pub fn leontief(x: &Vector, alphas: &[f64], exponent: f64) -> Result<f64> {
    check_weights(alphas)?;
    if !(exponent > 0.0 && exponent.is_finite()) {
        return Err(Error::param("alpha_exp", "must be positive"));
    }
    if x.len() != alphas.len() {
        return Err(Error::Dimension {
            expected: alphas.len(),
            got: x.len(),
        });
    }
    check_nonnegative(x)?;
    Ok(leontief_min(x, alphas).1.powf(exponent))
}

/// Index (lowest on ties) and value of `min_i x_i / alpha_i`.
fn leontief_min(x: &Vector, alphas: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, (v, a)) in x.iter().zip(alphas).enumerate() {
        let r = v / a;
        if r < best.1 {
            best = (i, r);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leontief {
    alphas: Vec<f64>,
    exponent: f64,
    domain: BoxConstraint,
}

impl Leontief {
    pub fn new(alphas: Vec<f64>, exponent: f64) -> Result<Self> {
        check_weights(&alphas)?;
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::param("alpha_exp", "must be positive"));
        }
        let domain = BoxConstraint::nonnegative(alphas.len());
        Ok(Self {
            alphas,
            exponent,
            domain,
        })
    }
}

impl Objective for Leontief {
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn dim(&self) -> usize {
        self.alphas.len()
    }
    fn value(&self, x: &Vector) -> f64 {
        if !self.domain.contains(x) {
            return f64::INFINITY;
        }
        leontief_min(x, &self.alphas).1.powf(self.exponent)
    }
    fn clarke_element(&self, x: &Vector) -> Vector {
        let (j, m) = leontief_min(x, &self.alphas);
        let mut g = Vector::zeros(x.len());
        let a = self.exponent;
        let slope = if m > 0.0 {
            a * m.powf(a - 1.0)
        } else if a == 1.0 {
            1.0
        } else {
            0.0
        };
        g[j] = slope / self.alphas[j];
        g
    }
    fn clarke_jacobian(&self, x: &Vector) -> Option<Matrix> {
        let n = x.len();
        let (j, m) = leontief_min(x, &self.alphas);
        let mut h = Matrix::zeros(n, n);
        let a = self.exponent;
        if m > 0.0 {
            h[(j, j)] = a * (a - 1.0) * m.powf(a - 2.0) / (self.alphas[j] * self.alphas[j]);
        }
        Some(h)
    }
    fn domain(&self) -> Option<&BoxConstraint> {
        Some(&self.domain)
    }
}

impl Homogeneous for Leontief {
    fn degree(&self) -> f64 {
        self.exponent
    }
}
