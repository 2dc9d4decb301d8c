//! Proximity operator `argmin_{x in K} h(x) + |z - x|^2 / (2 beta)` for
//! nonsmooth objectives, computed by multi-start damped semismooth Newton on
//! the stationarity residual.

use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::newton::{
    damped_newton, gradient_sampling, Fallback, NewtonSettings, NewtonStatus, SamplingSettings,
};
use crate::objective::Objective;
use crate::space::{lex_cmp, project_box, BoxConstraint, Matrix, Vector};

/// Settings of one prox evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProxConfig {
    pub beta: f64,
    /// Stop the inner Newton loop once `|F(x)| <= inner_tol`.
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    pub n_starts: usize,
    /// Radius of the ball around `z` the random starts are drawn from.
    pub start_radius: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    /// Candidates closer than this in the max-norm are merged.
    pub merge_tol: f64,
    /// Relative gap under which two subproblem values count as tied.
    pub value_rtol: f64,
    /// Stationarity tolerance at kinks: the min-norm element of residuals
    /// sampled within a tiny radius must fall below this.
    pub kink_tol: f64,
    pub seed: u64,
}

impl Default for ProxConfig {
    fn default() -> Self {
        ProxConfig {
            beta: 0.05,
            inner_tol: 1e-8,
            inner_max_iter: 10_000,
            n_starts: 5,
            start_radius: 1.0,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            merge_tol: 1e-6,
            value_rtol: 1e-9,
            kink_tol: 1e-6,
            seed: 0,
        }
    }
}

impl ProxConfig {
    pub fn with_beta(beta: f64) -> Self {
        ProxConfig {
            beta,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive and finite, got {v}")))
            }
        };
        positive("beta", self.beta)?;
        positive("inner_tol", self.inner_tol)?;
        positive("merge_tol", self.merge_tol)?;
        positive("value_rtol", self.value_rtol)?;
        positive("kink_tol", self.kink_tol)?;
        if self.inner_max_iter == 0 {
            return Err(Error::param("inner_max_iter", "must be at least 1"));
        }
        if self.n_starts == 0 {
            return Err(Error::param("n_starts", "must be at least 1"));
        }
        if !(self.start_radius >= 0.0 && self.start_radius.is_finite()) {
            return Err(Error::param("start_radius", "must be nonnegative and finite"));
        }
        for (name, v) in [("armijo_c", self.armijo_c), ("backtrack_factor", self.backtrack_factor)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::param(name, format!("must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }

    pub(crate) fn newton_settings(&self) -> NewtonSettings {
        NewtonSettings {
            tol: self.inner_tol,
            max_iter: self.inner_max_iter,
            armijo_c: self.armijo_c,
            backtrack_factor: self.backtrack_factor,
            max_backtracks: 60,
            divergence_guard: 1e12,
        }
    }
}

/// One element of the computed prox set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxCandidate {
    pub point: Vector,
    /// Subproblem value `h(x) + |z - x|^2 / (2 beta)`.
    pub objective_value: f64,
    /// `|F(x)|` at `point`, or the sampled min-norm residual for points
    /// certified at a kink.
    pub residual_norm: f64,
    /// Whether a subsolve certified `point` as stationary.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxResult {
    /// Tied global candidates, sorted by value then lexicographically.
    pub minimizers: Vec<ProxCandidate>,
    /// Whether at least one returned minimizer is certified, either by a small
    /// residual or by a local probe test (for kinks where no residual vanishes).
    pub converged: bool,
    /// Newton iterations spent from each start.
    pub inner_iterations: Vec<usize>,
}

impl ProxResult {
    pub fn best(&self) -> Option<&ProxCandidate> {
        self.minimizers.first()
    }
}

/// Outcome of a single Newton run on the subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsolveResult {
    pub x: Vector,
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
}

/// Stationarity residual `F(x) = g(x) + (x - z) / beta` with `g` a Clarke element.
pub fn prox_residual<F: Objective + ?Sized>(f: &F, x: &Vector, z: &Vector, beta: f64) -> Vector {
    f.clarke_element(x) + (x - z) / beta
}

/// Subproblem objective `h(x) + |z - x|^2 / (2 beta)`.
pub fn prox_objective<F: Objective + ?Sized>(f: &F, x: &Vector, z: &Vector, beta: f64) -> f64 {
    f.value(x) + (z - x).norm_squared() / (2.0 * beta)
}

fn check_dims<F: Objective + ?Sized>(f: &F, v: &Vector) -> Result<()> {
    if v.len() != f.dim() {
        return Err(Error::Dimension {
            expected: f.dim(),
            got: v.len(),
        });
    }
    if let Some(i) = v.iter().position(|e| !e.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

/// Damped semismooth Newton on `F(x) = 0` from `x0`.
///
/// The Newton system uses `V + I / beta` with `V` the objective's generalized
/// Jacobian. When that system is singular, or its direction fails the Armijo
/// test on `|F|^2`, a gradient step on the subproblem objective is taken
/// instead. Iterates are clamped into the objective's domain, if any.
pub fn ssn_subsolve<F: Objective + ?Sized>(
    f: &F,
    z: &Vector,
    x0: &Vector,
    cfg: &ProxConfig,
) -> Result<SubsolveResult> {
    cfg.validate()?;
    check_dims(f, z)?;
    check_dims(f, x0)?;
    let beta = cfg.beta;
    let n = f.dim();
    let residual = |x: &Vector| prox_residual(f, x, z, beta);
    let jacobian = |x: &Vector| f.clarke_jacobian(x).map(|v| v + Matrix::identity(n, n) / beta);
    let merit = |x: &Vector| prox_objective(f, x, z, beta);
    let out = damped_newton(
        x0,
        &residual,
        &jacobian,
        Fallback::Gradient(&merit),
        f.domain(),
        &cfg.newton_settings(),
        &mut |_| {},
    );
    if out.status == NewtonStatus::Converged {
        return Ok(SubsolveResult {
            converged: true,
            x: out.x,
            iterations: out.iterations,
            residual_norm: out.residual_norm,
        });
    }
    // Newton stalls at kinks, where the residual jumps between branches.
    // Polish with gradient sampling, which also certifies kink minimizers.
    Ok(polish(f, z, &out.x, out.iterations, cfg))
}

/// Approximates the prox set of `f` at `z`.
///
/// Newton runs start at `z`, at the origin and at `n_starts - 2` uniform draws
/// in the ball of radius `start_radius` around `z`. In dimension 1 and 2 a
/// grid scan of the region that can hold prox points adds starts at its best
/// local minima. Start points, Newton end points and (for bounded boxes) the
/// projection of `z` and the box corners are all compared by subproblem
/// value; every candidate within `value_rtol` of the best is returned, merged
/// by distance. If the best candidate is neither Newton-certified nor
/// probe-minimal, up to three descent rounds (gradient sampling, Newton,
/// compass search) start from it.
pub fn prox<F: Objective + ?Sized>(f: &F, z: &Vector, cfg: &ProxConfig) -> Result<ProxResult> {
    cfg.validate()?;
    check_dims(f, z)?;
    let n = f.dim();
    let domain = f.domain();
    let clamp = |x: Vector| match domain {
        Some(b) => project_box(&x, b).unwrap_or(x),
        None => x,
    };

    let mut starts = vec![z.clone()];
    if cfg.n_starts >= 2 {
        starts.push(Vector::zeros(n));
    }
    if cfg.n_starts > 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(start_seed(cfg.seed, z));
        for _ in 2..cfg.n_starts {
            starts.push(z + ball_draw(&mut rng, n, cfg.start_radius));
        }
    }

    // (point, certified residual)
    let mut points: Vec<(Vector, Option<f64>)> = Vec::with_capacity(2 * starts.len() + 4);
    let mut inner_iterations = Vec::with_capacity(starts.len());
    for s in &starts {
        let s = clamp(s.clone());
        let run = ssn_subsolve(f, z, &s, cfg)?;
        inner_iterations.push(run.iterations);
        points.push((s, None));
        points.push((clamp(run.x), run.converged.then_some(run.residual_norm)));
    }
    for s in screen_starts(f, z, cfg, &points) {
        let s = clamp(s);
        let run = ssn_subsolve(f, z, &s, cfg)?;
        inner_iterations.push(run.iterations);
        points.push((s, None));
        points.push((clamp(run.x), run.converged.then_some(run.residual_norm)));
    }
    if let Some(b) = domain {
        points.push((clamp(z.clone()), None));
        if b.is_bounded() && n <= 4 {
            points.extend(box_corners(b).into_iter().map(|c| (c, None)));
        }
    }

    for round in 0..=DESCENT_ROUNDS {
        let (minimizers, converged) = select(f, z, cfg, &points)?;
        if converged || round == DESCENT_ROUNDS {
            return Ok(ProxResult {
                minimizers,
                converged,
                inner_iterations,
            });
        }
        // Newton may have stopped at saddles or maxima of the subproblem and
        // left an uncertified start point on top. Descend from it.
        let run = descend(f, z, &minimizers[0].point, cfg);
        inner_iterations.push(run.iterations);
        points.push((clamp(run.x), run.converged.then_some(run.residual_norm)));
    }
    unreachable!("the last round always returns")
}

/// Extra descent runs `prox` may spend on an uncertified best candidate.
const DESCENT_ROUNDS: usize = 3;

/// Scores candidates, keeps those tied with the best and merges neighbours.
fn select<F: Objective + ?Sized>(
    f: &F,
    z: &Vector,
    cfg: &ProxConfig,
    points: &[(Vector, Option<f64>)],
) -> Result<(Vec<ProxCandidate>, bool)> {
    let mut scored: Vec<(&Vector, Option<f64>, f64)> = points
        .iter()
        .map(|(p, c)| (p, *c, prox_objective(f, p, z, cfg.beta)))
        .filter(|(_, _, v)| v.is_finite())
        .collect();
    if scored.is_empty() {
        return Err(Error::Internal(
            "no prox candidate has a finite subproblem value".into(),
        ));
    }
    scored.sort_by(|a, b| a.2.total_cmp(&b.2).then_with(|| lex_cmp(a.0, b.0)));

    let best = scored[0].2;
    let cutoff = best + cfg.value_rtol * best.abs();
    let mut minimizers: Vec<ProxCandidate> = Vec::new();
    for (p, cert, v) in scored.into_iter().take_while(|(_, _, v)| *v <= cutoff) {
        if let Some(m) = minimizers.iter_mut().find(|m| (&m.point - p).amax() <= cfg.merge_tol) {
            if let (false, Some(r)) = (m.certified, cert) {
                m.certified = true;
                m.residual_norm = m.residual_norm.min(r);
            }
            continue;
        }
        let plain = prox_residual(f, p, z, cfg.beta).norm();
        minimizers.push(ProxCandidate {
            residual_norm: cert.map_or(plain, |r| r.min(plain)),
            certified: cert.is_some() || plain <= cfg.inner_tol,
            point: p.clone(),
            objective_value: v,
        });
    }
    // Final order: value first, lexicographic among exact ties.
    minimizers.sort_by(|a, b| match a.objective_value.total_cmp(&b.objective_value) {
        Ordering::Equal => lex_cmp(&a.point, &b.point),
        o => o,
    });
    let converged = minimizers
        .iter()
        .any(|m| m.certified || is_probe_minimal(f, &m.point, z, cfg.beta));
    Ok((minimizers, converged))
}

/// Gradient sampling on the subproblem objective from `x`, then Newton from
/// where it stopped, then compass search if neither converged. Every accepted
/// step decreases the subproblem value.
fn descend<F: Objective + ?Sized>(f: &F, z: &Vector, x: &Vector, cfg: &ProxConfig) -> SubsolveResult {
    let polished = polish(f, z, x, 0, cfg);
    let out = match ssn_subsolve(f, z, &polished.x, cfg) {
        Ok(run)
            if run.converged
                && prox_objective(f, &run.x, z, cfg.beta) <= prox_objective(f, &polished.x, z, cfg.beta) =>
        {
            SubsolveResult {
                iterations: run.iterations + polished.iterations,
                ..run
            }
        }
        _ => polished,
    };
    if out.converged {
        return out;
    }
    // Where the objective is not locally Lipschitz (|t|^p with p < 1 at
    // t = 0) gradients are useless; compass search needs only values.
    let (y, evals) = pattern_search(f, z, &out.x, cfg);
    SubsolveResult {
        residual_norm: prox_residual(f, &y, z, cfg.beta).norm(),
        converged: false,
        x: y,
        iterations: out.iterations + evals,
    }
}

/// Opportunistic compass search on the subproblem objective over
/// [`probe_directions`], halving the step when no direction improves.
/// Returns the final point and the number of evaluations.
fn pattern_search<F: Objective + ?Sized>(f: &F, z: &Vector, x: &Vector, cfg: &ProxConfig) -> (Vector, usize) {
    const MAX_EVALS: usize = 20_000;
    let dirs = probe_directions(x.len());
    let scale = x.amax().max(1.0);
    let clamp = |y: Vector| match f.domain() {
        Some(b) => project_box(&y, b).unwrap_or(y),
        None => y,
    };
    let mut x = x.clone();
    let mut fx = prox_objective(f, &x, z, cfg.beta);
    let mut step = 1e-2 * scale;
    let mut evals = 0;
    while step >= 1e-12 * scale && evals < MAX_EVALS {
        let mut moved = false;
        for d in &dirs {
            let y = clamp(&x + d * step);
            let fy = prox_objective(f, &y, z, cfg.beta);
            evals += 1;
            if fy < fx {
                x = y;
                fx = fy;
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (x, evals)
}

/// Largest number of grid cells per axis in [`screen_starts`].
const SCREEN_MAX_CELLS: usize = 64;
/// Target grid spacing of the screen.
const SCREEN_SPACING: f64 = 0.05;
/// Grid local minima handed to Newton as extra starts.
const SCREEN_STARTS: usize = 6;

/// Extra Newton starts for objectives of dimension 1 or 2.
///
/// Any prox point `x` has `|x - z|^2 <= 2 beta (phi_best - inf h)`, where
/// `phi_best` is the best subproblem value found so far. The ball is scanned
/// with a grid and its best local minima are returned. Without a known lower
/// bound the smallest objective value seen stands in for `inf h`.
fn screen_starts<F: Objective + ?Sized>(
    f: &F,
    z: &Vector,
    cfg: &ProxConfig,
    points: &[(Vector, Option<f64>)],
) -> Vec<Vector> {
    let n = z.len();
    if n == 0 || n > 2 {
        return Vec::new();
    }
    let beta = cfg.beta;
    let best = points
        .iter()
        .map(|(p, _)| prox_objective(f, p, z, beta))
        .fold(f64::INFINITY, f64::min);
    let floor = f
        .lower_bound()
        .unwrap_or_else(|| points.iter().map(|(p, _)| f.value(p)).fold(f64::INFINITY, f64::min));
    let radius = (2.0 * beta * (best - floor)).max(0.0).sqrt();
    if !(radius > 0.0 && radius.is_finite()) {
        return Vec::new();
    }
    let mut lo: Vec<f64> = z.iter().map(|v| v - radius).collect();
    let mut hi: Vec<f64> = z.iter().map(|v| v + radius).collect();
    if let Some(b) = f.domain() {
        for i in 0..n {
            lo[i] = lo[i].max(b.lower()[i]);
            hi[i] = hi[i].min(b.upper()[i]);
        }
    }
    if (0..n).any(|i| !(lo[i] < hi[i])) {
        return Vec::new();
    }
    let cells = ((2.0 * radius / SCREEN_SPACING).ceil() as usize).clamp(8, SCREEN_MAX_CELLS);
    let side = cells + 1;
    let coord = |i: usize, k: usize| lo[i] + (hi[i] - lo[i]) * k as f64 / cells as f64;
    let total = if n == 1 { side } else { side * side };
    let at = |idx: usize| {
        let ks = [idx % side, idx / side];
        Vector::from_iterator(n, (0..n).map(|i| coord(i, ks[i])))
    };
    let values: Vec<f64> = (0..total)
        .map(|idx| {
            let v = prox_objective(f, &at(idx), z, beta);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        })
        .collect();
    let mut minima: Vec<usize> = (0..total)
        .filter(|&idx| {
            let v = values[idx];
            if !v.is_finite() {
                return false;
            }
            let (kx, ky) = (idx % side, idx / side);
            let ys: &[isize] = if n == 1 { &[0] } else { &[-1, 0, 1] };
            ys.iter().all(|&dy| {
                [-1isize, 0, 1].iter().all(|&dx| {
                    let (nx, ny) = (kx as isize + dx, ky as isize + dy);
                    if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= side as isize || ny >= side as isize {
                        return true;
                    }
                    values[ny as usize * side + nx as usize] >= v
                })
            })
        })
        .collect();
    minima.sort_by(|a, b| values[*a].total_cmp(&values[*b]).then(a.cmp(b)));
    minima.into_iter().take(SCREEN_STARTS).map(at).collect()
}

/// Gradient sampling on the subproblem objective from `x`.
fn polish<F: Objective + ?Sized>(f: &F, z: &Vector, x: &Vector, spent: usize, cfg: &ProxConfig) -> SubsolveResult {
    let beta = cfg.beta;
    let residual = |y: &Vector| prox_residual(f, y, z, beta);
    let merit = |y: &Vector| prox_objective(f, y, z, beta);
    let scale = x.amax().max(1.0);
    let out = gradient_sampling(
        x,
        &merit,
        &residual,
        f.domain(),
        &SamplingSettings {
            tol: cfg.kink_tol,
            max_iter: cfg.inner_max_iter,
            radius: 1e-3 * scale,
            min_radius: 1e-10 * scale,
            armijo_c: cfg.armijo_c,
            backtrack_factor: cfg.backtrack_factor,
            max_backtracks: 60,
            seed: start_seed(cfg.seed, x),
        },
    );
    let residual_norm = residual(&out.x).norm();
    SubsolveResult {
        converged: out.certified || residual_norm <= cfg.inner_tol,
        residual_norm: if out.certified { out.measure.min(residual_norm) } else { residual_norm },
        x: out.x,
        iterations: spent + out.iterations,
    }
}

/// Coordinate directions plus, in 2-D, 16 evenly spread unit vectors, or in
/// higher dimension the pairwise diagonals.
fn probe_directions(n: usize) -> Vec<Vector> {
    let mut dirs: Vec<Vector> = Vec::new();
    for i in 0..n {
        let mut e = Vector::zeros(n);
        e[i] = 1.0;
        dirs.push(e.clone());
        dirs.push(-e);
    }
    if n == 2 {
        for k in 0..16 {
            let t = std::f64::consts::PI * (2 * k + 1) as f64 / 16.0;
            dirs.push(Vector::from_vec(vec![t.cos(), t.sin()]));
        }
    } else {
        for i in 0..n {
            for j in (i + 1)..n {
                for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    let mut d = Vector::zeros(n);
                    d[i] = si * std::f64::consts::FRAC_1_SQRT_2;
                    d[j] = sj * std::f64::consts::FRAC_1_SQRT_2;
                    dirs.push(d);
                }
            }
        }
    }
    dirs
}

/// Checks that no small displacement of `x` lowers the subproblem value.
/// Certifies minimizers at kinks, where the residual never vanishes.
fn is_probe_minimal<F: Objective + ?Sized>(f: &F, x: &Vector, z: &Vector, beta: f64) -> bool {
    let base = prox_objective(f, x, z, beta);
    let slack = 8.0 * f64::EPSILON * base.abs();
    let dirs = probe_directions(x.len());
    let scale = x.amax().max(1.0);
    [1e-9, 1e-7, 1e-5].iter().all(|r| {
        dirs.iter().all(|d| {
            let v = prox_objective(f, &(x + d * (r * scale)), z, beta);
            !(v < base - slack)
        })
    })
}

fn start_seed(seed: u64, z: &Vector) -> u64 {
    z.iter().fold(splitmix(seed), |acc, v| splitmix(acc ^ v.to_bits()))
}

pub(crate) fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform draw from the ball of the given radius centred at the origin.
fn ball_draw(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vector {
    let dir = loop {
        let g = Vector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)));
        let norm = g.norm();
        if norm > 1e-12 {
            break g / norm;
        }
    };
    let u: f64 = Uniform::new(0.0, 1.0).sample(rng);
    dir * (radius * u.powf(1.0 / n as f64))
}

fn box_corners(b: &BoxConstraint) -> Vec<Vector> {
    let n = b.dim();
    (0..1usize << n)
        .map(|mask| {
            Vector::from_iterator(
                n,
                (0..n).map(|i| if mask >> i & 1 == 1 { b.upper()[i] } else { b.lower()[i] }),
            )
        })
        .collect()
}

/// Brute-force prox oracle: minimizes the subproblem objective over a uniform
/// grid on a bounded box of dimension 1 or 2.
///
/// The grid has `resolution` cells per axis. Grid points whose value is within
/// one cell's worth of variation of the best value are kept (the variation is
/// measured between the best point and its grid neighbours), then grouped into
/// connected clusters; the best point of each cluster is returned.
pub fn prox_oracle_grid<F: Objective + ?Sized>(
    f: &F,
    z: &Vector,
    beta: f64,
    bounds: &BoxConstraint,
    resolution: usize,
) -> Result<Vec<Vector>> {
    Ok(oracle_grid(f, z, beta, bounds, resolution)?
        .into_iter()
        .map(|(p, _)| p)
        .collect())
}

/// Grid oracle followed by `levels` rounds of zooming: each returned point is
/// re-minimized on a grid of the same resolution spanning two cells around it.
/// Returns `(point, subproblem value)` pairs sorted by value.
pub fn prox_oracle_grid_refined<F: Objective + ?Sized>(
    f: &F,
    z: &Vector,
    beta: f64,
    bounds: &BoxConstraint,
    resolution: usize,
    levels: usize,
) -> Result<Vec<(Vector, f64)>> {
    let mut found = oracle_grid(f, z, beta, bounds, resolution)?;
    let mut cell: Vec<f64> = (0..bounds.dim())
        .map(|i| (bounds.upper()[i] - bounds.lower()[i]) / resolution as f64)
        .collect();
    for _ in 0..levels {
        let mut next = Vec::new();
        for (p, _) in &found {
            let lo: Vec<f64> = (0..p.len())
                .map(|i| (p[i] - 2.0 * cell[i]).max(bounds.lower()[i]))
                .collect();
            let hi: Vec<f64> = (0..p.len())
                .map(|i| (p[i] + 2.0 * cell[i]).min(bounds.upper()[i]))
                .collect();
            let sub = BoxConstraint::new(lo, hi)?;
            next.extend(oracle_grid(f, z, beta, &sub, resolution)?);
        }
        cell.iter_mut().for_each(|c| *c *= 4.0 / resolution as f64);
        next.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = next[0].1;
        let cutoff = best + 1e-9 * best.abs().max(1.0);
        found = Vec::new();
        for (p, v) in next.into_iter().take_while(|(_, v)| *v <= cutoff) {
            if !found.iter().any(|(q, _): &(Vector, f64)| (q - &p).amax() <= 2.0 * cell.iter().cloned().fold(0.0, f64::max)) {
                found.push((p, v));
            }
        }
    }
    found.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| lex_cmp(&a.0, &b.0)));
    Ok(found)
}

fn oracle_grid<F: Objective + ?Sized>(
    f: &F,
    z: &Vector,
    beta: f64,
    bounds: &BoxConstraint,
    resolution: usize,
) -> Result<Vec<(Vector, f64)>> {
    let n = bounds.dim();
    if n == 0 || n > 2 {
        return Err(Error::param("bounds", "grid oracle supports dimension 1 or 2"));
    }
    if !bounds.is_bounded() {
        return Err(Error::param("bounds", "grid oracle needs a bounded box"));
    }
    if resolution == 0 {
        return Err(Error::param("resolution", "must be at least 1"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::param("beta", "must be positive and finite"));
    }
    check_dims(f, z)?;

    let side = resolution + 1;
    let coord = |i: usize, k: usize| {
        let (lo, hi) = (bounds.lower()[i], bounds.upper()[i]);
        if k == resolution {
            hi
        } else {
            lo + (hi - lo) * k as f64 / resolution as f64
        }
    };
    let point = |idx: usize| {
        let ks = [idx % side, idx / side];
        Vector::from_iterator(n, (0..n).map(|i| coord(i, ks[i])))
    };
    let total = if n == 1 { side } else { side * side };
    let values: Vec<f64> = (0..total)
        .map(|idx| {
            let v = prox_objective(f, &point(idx), z, beta);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        })
        .collect();

    let neighbours = |idx: usize| -> Vec<usize> {
        let (i, j) = (idx % side, idx / side);
        let mut out = Vec::with_capacity(8);
        let dj: &[isize] = if n == 1 { &[0] } else { &[-1, 0, 1] };
        for &dy in dj {
            for dx in [-1isize, 0, 1] {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (a, b) = (i as isize + dx, j as isize + dy);
                if a >= 0 && b >= 0 && (a as usize) < side && (b as usize) < side.max(1) {
                    if n == 1 && b != 0 {
                        continue;
                    }
                    out.push(b as usize * side + a as usize);
                }
            }
        }
        out
    };

    let best_idx = (0..total)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("grid is nonempty");
    let best = values[best_idx];
    if !best.is_finite() {
        return Err(Error::Domain("subproblem is infinite on the whole grid".into()));
    }
    let spread = neighbours(best_idx)
        .into_iter()
        .map(|k| values[k] - best)
        .filter(|d| d.is_finite())
        .fold(0.0f64, f64::max);
    let cutoff = best + spread.max(1e-9 * best.abs().max(1.0));

    let mut seen = vec![false; total];
    let mut clusters = Vec::new();
    for start in 0..total {
        if seen[start] || values[start] > cutoff {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut rep = start;
        while let Some(k) = stack.pop() {
            if values[k] < values[rep] {
                rep = k;
            }
            for nb in neighbours(k) {
                if !seen[nb] && values[nb] <= cutoff {
                    seen[nb] = true;
                    stack.push(nb);
                }
            }
        }
        clusters.push((point(rep), values[rep]));
    }
    Ok(clusters)
}
