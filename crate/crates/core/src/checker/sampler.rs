use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::space::{project_box, BoxConstraint, Vector};

/// Where test points are drawn, relative to a centre (normally `xbar`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampler {
    /// Uniform in the ball of the given radius.
    UniformBall { radius: f64 },
    /// Uniform directions with radii stratified over `[0, radius]`.
    SphereStratified { radius: f64 },
    /// Points close to the usual nonsmooth sets: coordinate hyperplanes,
    /// spheres of the given radii, and the centre itself.
    NearKink { radius: f64, kink_radii: Vec<f64> },
    /// Uniform in the ball intersected with the nonnegative orthant.
    Orthant { radius: f64 },
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler::UniformBall { radius: 1.0 }
    }
}

/// A test point and an interpolation weight in `[1e-8, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vector,
    pub lambda: f64,
}

impl Sampler {
    pub fn radius(&self) -> f64 {
        match self {
            Sampler::UniformBall { radius }
            | Sampler::SphereStratified { radius }
            | Sampler::NearKink { radius, .. }
            | Sampler::Orthant { radius } => *radius,
        }
    }

    /// Draws `n` samples around `center`, clamped into `domain` if given.
    pub fn draw(
        &self,
        rng: &mut ChaCha8Rng,
        center: &Vector,
        n: usize,
        domain: Option<&BoxConstraint>,
    ) -> Vec<Sample> {
        let dim = center.len();
        (0..n)
            .map(|i| {
                let offset = self.offset(rng, dim, i, n);
                let lambda = 10f64.powf(rng.gen_range(-8.0..=0.0));
                let mut x = center + offset;
                if let Some(b) = domain {
                    x = project_box(&x, b).unwrap_or(x);
                }
                Sample { x, lambda }
            })
            .collect()
    }

    fn offset(&self, rng: &mut ChaCha8Rng, dim: usize, i: usize, n: usize) -> Vector {
        match self {
            Sampler::UniformBall { radius } => unit_direction(rng, dim) * (radius * ball_radius(rng, dim)),
            Sampler::Orthant { radius } => {
                unit_direction(rng, dim).abs() * (radius * ball_radius(rng, dim))
            }
            Sampler::SphereStratified { radius } => {
                let u: f64 = rng.gen();
                unit_direction(rng, dim) * (radius * (i as f64 + u) / n as f64)
            }
            Sampler::NearKink { radius, kink_radii } => {
                let tiny = 10f64.powf(-rng.gen_range(1.0..9.0));
                let mode = rng.gen_range(0..3usize);
                let mut d = unit_direction(rng, dim);
                match mode {
                    0 => {
                        // near a coordinate hyperplane
                        let j = rng.gen_range(0..dim);
                        d[j] = tiny * d[j].signum();
                        let norm = d.norm();
                        d * (radius * ball_radius(rng, dim) / norm)
                    }
                    1 if !kink_radii.is_empty() => {
                        let r = kink_radii[rng.gen_range(0..kink_radii.len())];
                        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                        d * (r * (1.0 + sign * tiny))
                    }
                    _ => d * (radius * tiny),
                }
            }
        }
    }
}

fn unit_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    loop {
        let g = Vector::from_iterator(dim, (0..dim).map(|_| StandardNormal.sample(rng)));
        let norm = g.norm();
        if norm > 1e-12 {
            return g / norm;
        }
    }
}

fn ball_radius(rng: &mut ChaCha8Rng, dim: usize) -> f64 {
    rng.gen::<f64>().powf(1.0 / dim as f64)
}
