//! The objective-function interface shared by every solver and check.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{BoxConstraint, Matrix, Vector};

/// A possibly nonsmooth objective `h: R^n -> R ∪ {+inf}`.
///
/// Implementations are pure: evaluation never mutates the object, so a single
/// instance can be shared across threads.
///
/// At nondifferentiable points `clarke_element` returns one element of the
/// Clarke subdifferential, picked from the active smooth branch with the
/// lowest index. `clarke_jacobian` returns one element of the generalized
/// Jacobian of that selection.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    /// Function value; `+inf` outside the domain.
    fn value(&self, x: &Vector) -> f64;

    fn clarke_element(&self, x: &Vector) -> Vector;

    fn clarke_jacobian(&self, _x: &Vector) -> Option<Matrix> {
        None
    }

    /// The closed box `K` the objective lives on; `None` means all of `R^n`.
    fn domain(&self) -> Option<&BoxConstraint> {
        None
    }

    /// A known lower bound on the objective over its domain. `prox` uses it
    /// to bound how far prox points can lie from `z`.
    fn lower_bound(&self) -> Option<f64> {
        None
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        (**self).value(x)
    }
    fn clarke_element(&self, x: &Vector) -> Vector {
        (**self).clarke_element(x)
    }
    fn clarke_jacobian(&self, x: &Vector) -> Option<Matrix> {
        (**self).clarke_jacobian(x)
    }
    fn domain(&self) -> Option<&BoxConstraint> {
        (**self).domain()
    }
    fn lower_bound(&self) -> Option<f64> {
        (**self).lower_bound()
    }
}

impl<T: Objective + ?Sized> Objective for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        (**self).value(x)
    }
    fn clarke_element(&self, x: &Vector) -> Vector {
        (**self).clarke_element(x)
    }
    fn clarke_jacobian(&self, x: &Vector) -> Option<Matrix> {
        (**self).clarke_jacobian(x)
    }
    fn domain(&self) -> Option<&BoxConstraint> {
        (**self).domain()
    }
    fn lower_bound(&self) -> Option<f64> {
        (**self).lower_bound()
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        (**self).value(x)
    }
    fn clarke_element(&self, x: &Vector) -> Vector {
        (**self).clarke_element(x)
    }
    fn clarke_jacobian(&self, x: &Vector) -> Option<Matrix> {
        (**self).clarke_jacobian(x)
    }
    fn domain(&self) -> Option<&BoxConstraint> {
        (**self).domain()
    }
    fn lower_bound(&self) -> Option<f64> {
        (**self).lower_bound()
    }
}

type ValueFn = dyn Fn(&Vector) -> f64 + Send + Sync;
type GradFn = dyn Fn(&Vector) -> Vector + Send + Sync;
type JacFn = dyn Fn(&Vector) -> Matrix + Send + Sync;

/// An objective assembled from closures.
#[derive(Clone)]
pub struct FnObjective {
    dim: usize,
    value: Arc<ValueFn>,
    element: Arc<GradFn>,
    jacobian: Option<Arc<JacFn>>,
    domain: Option<BoxConstraint>,
    lower_bound: Option<f64>,
}

impl FnObjective {
    pub fn new(
        dim: usize,
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        element: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            value: Arc::new(value),
            element: Arc::new(element),
            jacobian: None,
            domain: None,
            lower_bound: None,
        }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&Vector) -> Matrix + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn with_domain(mut self, domain: BoxConstraint) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn with_lower_bound(mut self, bound: f64) -> Self {
        self.lower_bound = Some(bound);
        self
    }
}

impl fmt::Debug for FnObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnObjective")
            .field("dim", &self.dim)
            .field("has_jacobian", &self.jacobian.is_some())
            .field("domain", &self.domain)
            .finish()
    }
}

impl Objective for FnObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &Vector) -> f64 {
        match &self.domain {
            Some(d) if !d.contains(x) => f64::INFINITY,
            _ => (self.value)(x),
        }
    }

    fn clarke_element(&self, x: &Vector) -> Vector {
        (self.element)(x)
    }

    fn clarke_jacobian(&self, x: &Vector) -> Option<Matrix> {
        self.jacobian.as_ref().map(|j| j(x))
    }

    fn lower_bound(&self) -> Option<f64> {
        self.lower_bound
    }

    fn domain(&self) -> Option<&BoxConstraint> {
        self.domain.as_ref()
    }
}

/// Restricts an objective to a box, keeping its formulas.
#[derive(Debug, Clone)]
pub struct Restricted<F> {
    inner: F,
    domain: BoxConstraint,
}

impl<F: Objective> Restricted<F> {
    pub fn new(inner: F, domain: BoxConstraint) -> Result<Self> {
        if domain.dim() != inner.dim() {
            return Err(Error::Dimension {
                expected: inner.dim(),
                got: domain.dim(),
            });
        }
        Ok(Self { inner, domain })
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }
}

impl<F: Objective> Objective for Restricted<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        if self.domain.contains(x) {
            self.inner.value(x)
        } else {
            f64::INFINITY
        }
    }
    fn clarke_element(&self, x: &Vector) -> Vector {
        self.inner.clarke_element(x)
    }
    fn clarke_jacobian(&self, x: &Vector) -> Option<Matrix> {
        self.inner.clarke_jacobian(x)
    }
    fn domain(&self) -> Option<&BoxConstraint> {
        Some(&self.domain)
    }
    fn lower_bound(&self) -> Option<f64> {
        self.inner.lower_bound()
    }
}

/// A claim that an objective is `(kappa, gamma)`-strongly quasar-convex with
/// respect to the minimizer `xbar`. `gamma = 0` is plain quasar-convexity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasarCertificate {
    kappa: f64,
    gamma: f64,
    xbar: Vec<f64>,
}

impl QuasarCertificate {
    pub fn new(kappa: f64, gamma: f64, xbar: Vector) -> Result<Self> {
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::param("kappa", format!("{kappa} is not in (0, 1]")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::param("gamma", format!("{gamma} is not a finite value >= 0")));
        }
        if let Some(i) = xbar.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            kappa,
            gamma,
            xbar: xbar.as_slice().to_vec(),
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn xbar(&self) -> Vector {
        Vector::from_column_slice(&self.xbar)
    }

    /// Strong certificates claim a unique minimizer.
    pub fn is_strong(&self) -> bool {
        self.gamma > 0.0
    }

    /// Quadratic-growth modulus `kappa gamma / (2 (2 - kappa))`.
    pub fn growth_modulus(&self) -> f64 {
        self.kappa * self.gamma / (2.0 * (2.0 - self.kappa))
    }
}
