//! Damped Newton iteration on a (semismooth) residual map with Armijo
//! backtracking on the squared residual norm.

use crate::space::{BoxConstraint, Matrix, Vector};

#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    pub divergence_guard: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum NewtonStatus {
    Converged,
    MaxIter,
    Diverged,
    /// Neither the Newton nor the fallback direction produced sufficient decrease.
    Stalled,
}

#[derive(Debug, Clone)]
pub(crate) struct NewtonOutcome {
    pub x: Vector,
    pub residual_norm: f64,
    pub iterations: usize,
    pub status: NewtonStatus,
}

/// What to do when the Newton system is singular or its direction is rejected.
pub(crate) enum Fallback<'a> {
    /// Steepest descent on `||F||^2 / 2`, direction `-J^T F`.
    ResidualDescent,
    /// Gradient step on a merit function whose gradient is `F` itself,
    /// direction `-F` with Armijo on `merit`.
    Gradient(&'a (dyn Fn(&Vector) -> f64 + Sync)),
}

/// One accepted iteration, reported to the observer.
pub(crate) struct IterationReport<'a> {
    pub x: &'a Vector,
    pub residual_norm: f64,
    pub backtracks: usize,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn damped_newton(
    x0: &Vector,
    residual: &dyn Fn(&Vector) -> Vector,
    jacobian: &dyn Fn(&Vector) -> Option<Matrix>,
    fallback: Fallback<'_>,
    bounds: Option<&BoxConstraint>,
    settings: &NewtonSettings,
    observer: &mut dyn FnMut(IterationReport<'_>),
) -> NewtonOutcome {
    let clamp = |x: Vector| match bounds {
        Some(b) => crate::space::project_box(&x, b).unwrap_or(x),
        None => x,
    };
    let mut x = clamp(x0.clone());
    let mut f = residual(&x);
    let mut fnorm = f.norm();
    let mut iterations = 0;

    let status = loop {
        if !fnorm.is_finite() || x.norm() > settings.divergence_guard {
            break NewtonStatus::Diverged;
        }
        if fnorm <= settings.tol {
            break NewtonStatus::Converged;
        }
        if iterations >= settings.max_iter {
            break NewtonStatus::MaxIter;
        }
        iterations += 1;

        let jac = jacobian(&x);
        let newton_dir = jac.as_ref().and_then(|j| {
            let d = j.clone().lu().solve(&(-&f))?;
            d.iter().all(|v| v.is_finite()).then_some(d)
        });

        let mut accepted = None;
        if let Some(d) = newton_dir {
            // grad(||F||^2/2) . d = -||F||^2 for an exact Newton direction.
            let f2 = fnorm * fnorm;
            accepted = backtrack(settings, |t| {
                let trial = clamp(&x + &d * t);
                let ft = residual(&trial);
                let ok = ft.norm_squared() <= (1.0 - 2.0 * settings.armijo_c * t) * f2;
                ok.then_some((trial, ft))
            });
        }
        if accepted.is_none() {
            accepted = match &fallback {
                Fallback::ResidualDescent => jac.as_ref().and_then(|j| {
                    let g = j.transpose() * &f;
                    let slope = g.norm_squared();
                    if !(slope > 0.0 && slope.is_finite()) {
                        return None;
                    }
                    let f2 = fnorm * fnorm;
                    backtrack(settings, |t| {
                        let trial = clamp(&x - &g * t);
                        let ft = residual(&trial);
                        (ft.norm_squared() <= f2 - 2.0 * settings.armijo_c * t * slope).then_some((trial, ft))
                    })
                }),
                Fallback::Gradient(merit) => {
                    let m0 = merit(&x);
                    let slope = fnorm * fnorm;
                    backtrack(settings, |t| {
                        let trial = clamp(&x - &f * t);
                        (merit(&trial) <= m0 - settings.armijo_c * t * slope).then(|| {
                            let ft = residual(&trial);
                            (trial, ft)
                        })
                    })
                }
            };
        }

        match accepted {
            Some(((nx, nf), backtracks)) => {
                x = nx;
                f = nf;
                fnorm = f.norm();
                observer(IterationReport {
                    x: &x,
                    residual_norm: fnorm,
                    backtracks,
                });
            }
            None => break NewtonStatus::Stalled,
        }
    };

    NewtonOutcome {
        x,
        residual_norm: fnorm,
        iterations,
        status,
    }
}

/// Tries `t = 1, r, r^2, ...` until `attempt` accepts.
fn backtrack<T>(settings: &NewtonSettings, mut attempt: impl FnMut(f64) -> Option<T>) -> Option<(T, usize)> {
    let mut t = 1.0;
    for k in 0..=settings.max_backtracks {
        if let Some(v) = attempt(t) {
            return Some((v, k));
        }
        t *= settings.backtrack_factor;
    }
    None
}

/// Settings of the gradient-sampling polish.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SamplingSettings {
    /// Certify once the min-norm element is below this at the smallest radius.
    pub tol: f64,
    pub max_iter: usize,
    pub radius: f64,
    pub min_radius: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub(crate) struct SamplingOutcome {
    pub x: Vector,
    /// Norm of the min-norm element of the sampled subgradients at the end.
    pub measure: f64,
    pub iterations: usize,
    pub certified: bool,
}

/// Gradient sampling on a locally Lipschitz `merit` whose (Clarke) gradient
/// is `grad`. Each iteration collects gradients at `x` and at `dim + 3`
/// random points within `radius`, steps along minus the min-norm element of
/// their convex hull, and shrinks the radius by 10 whenever that element is
/// below `tol` or no step is accepted.
pub(crate) fn gradient_sampling(
    x0: &Vector,
    merit: &dyn Fn(&Vector) -> f64,
    grad: &dyn Fn(&Vector) -> Vector,
    bounds: Option<&BoxConstraint>,
    settings: &SamplingSettings,
) -> SamplingOutcome {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    let clamp = |x: Vector| match bounds {
        Some(b) => crate::space::project_box(&x, b).unwrap_or(x),
        None => x,
    };
    let n = x0.len();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(settings.seed);
    let mut x = clamp(x0.clone());
    let mut value = merit(&x);
    let mut radius = settings.radius;
    let mut measure = f64::INFINITY;
    let mut iterations = 0;
    let mut certified = false;

    while iterations < settings.max_iter {
        iterations += 1;
        let mut grads = vec![grad(&x)];
        for _ in 0..n + 3 {
            let g = Vector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(&mut rng)));
            let u: f64 = rand::Rng::gen(&mut rng);
            let dir = g.normalize() * (radius * u.powf(1.0 / n as f64));
            grads.push(grad(&clamp(&x + dir)));
        }
        if grads.iter().any(|g| g.iter().any(|v| !v.is_finite())) {
            break;
        }
        let (d, _) = crate::minnorm::min_norm_point(&grads);
        measure = d.norm();
        if measure <= settings.tol {
            if radius <= settings.min_radius {
                certified = true;
                break;
            }
            radius *= 0.1;
            continue;
        }
        let slope = measure * measure;
        let step = backtrack(
            &NewtonSettings {
                tol: 0.0,
                max_iter: 0,
                armijo_c: settings.armijo_c,
                backtrack_factor: settings.backtrack_factor,
                max_backtracks: settings.max_backtracks,
                divergence_guard: f64::INFINITY,
            },
            |t| {
                let trial = clamp(&x - &d * t);
                let v = merit(&trial);
                (v <= value - settings.armijo_c * t * slope).then_some((trial, v))
            },
        );
        match step {
            Some(((nx, nv), _)) => {
                x = nx;
                value = nv;
            }
            None => {
                if radius <= settings.min_radius {
                    break;
                }
                radius *= 0.1;
            }
        }
    }
    SamplingOutcome {
        x,
        measure,
        iterations,
        certified,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> NewtonSettings {
        NewtonSettings {
            tol: 1e-12,
            max_iter: 100,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            max_backtracks: 50,
            divergence_guard: 1e8,
        }
    }

    #[test]
    fn solves_linear_system_in_one_step() {
        let a = Matrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let b = Vector::from_vec(vec![1.0, -1.0]);
        let res = |x: &Vector| &a * x - &b;
        let jac = |_: &Vector| Some(a.clone());
        let out = damped_newton(
            &Vector::zeros(2),
            &res,
            &jac,
            Fallback::ResidualDescent,
            None,
            &settings(),
            &mut |_| {},
        );
        assert_eq!(out.status, NewtonStatus::Converged);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn singular_jacobian_uses_fallback() {
        // F(x) = x^3 has J(0) = 0; start away from 0 with a jacobian that
        // claims singularity everywhere.
        let res = |x: &Vector| x.map(|v| v * v * v);
        let jac = |x: &Vector| Some(Matrix::from_diagonal(&x.map(|v| 3.0 * v * v)) * 0.0);
        let out = damped_newton(
            &Vector::from_element(1, 0.5),
            &res,
            &jac,
            Fallback::ResidualDescent,
            None,
            &settings(),
            &mut |_| {},
        );
        // zero gradient of the merit: nothing can be done
        assert_eq!(out.status, NewtonStatus::Stalled);

        let merit = |x: &Vector| x[0].powi(4) / 4.0;
        let out = damped_newton(
            &Vector::from_element(1, 0.5),
            &res,
            &jac,
            Fallback::Gradient(&merit),
            None,
            &NewtonSettings { tol: 1e-6, max_iter: 10_000, ..settings() },
            &mut |_| {},
        );
        assert_eq!(out.status, NewtonStatus::Converged);
    }
}
