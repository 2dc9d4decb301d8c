//! Randomized product family `h(x) = h1(||x||) * h2(x / ||x||)` on `R^2`.
//!
//! `h2(v) = 1 + (1 / 4N) sum_i (a_i sin^2(b_i v_1) + c_i cos^2(d_i v_2))`, with
//! `a_i, c_i ~ U[0, 20]` and `b_i, d_i ~ U[-25, 25]`. The radial factor is
//! `max(q1 r^2, q2 r^2 - k)` (strongly quasar-convex family) or
//! `max(r, q r - k)` (quasar-convex family).
//!
//! Coefficients are drawn from `ChaCha8Rng::seed_from_u64(seed)` in the order
//! `a_1, b_1, c_1, d_1, a_2, ...`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{Objective, QuasarCertificate};
use crate::space::{Matrix, Vector};

use super::stable_norm;

pub const COEFF_AMPLITUDE_RANGE: (f64, f64) = (0.0, 20.0);
pub const COEFF_FREQUENCY_RANGE: (f64, f64) = (-25.0, 25.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExampleId {
    Example1,
    Example2,
}

impl ExampleId {
    pub fn number(self) -> u8 {
        match self {
            ExampleId::Example1 => 1,
            ExampleId::Example2 => 2,
        }
    }
}

impl std::fmt::Display for ExampleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "example{}", self.number())
    }
}

impl std::str::FromStr for ExampleId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "example1" | "ex1" => Ok(ExampleId::Example1),
            "2" | "example2" | "ex2" => Ok(ExampleId::Example2),
            other => Err(Error::param("example", format!("unknown example `{other}`"))),
        }
    }
}

/// The radial factor `h1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RadialProfile {
    /// `max(q1 r^2, q2 r^2 - k)`, `q2 > q1 > 0`.
    Quadratic { q1: f64, q2: f64, k: u32 },
    /// `max(r, q r - k)`, `q > 1`.
    Linear { q: f64, k: u32 },
}

impl RadialProfile {
    fn validate(&self) -> Result<()> {
        match *self {
            RadialProfile::Quadratic { q1, q2, .. } => {
                if !(q1 > 0.0 && q2 > q1 && q2.is_finite()) {
                    return Err(Error::param("q1/q2", format!("need q2 > q1 > 0, got q1={q1}, q2={q2}")));
                }
            }
            RadialProfile::Linear { q, .. } => {
                if !(q > 1.0 && q.is_finite()) {
                    return Err(Error::param("q", format!("need q > 1, got {q}")));
                }
            }
        }
        Ok(())
    }

    /// Value and first two derivatives of the active branch; the first branch
    /// wins ties.
    fn eval(&self, r: f64) -> (f64, f64, f64) {
        match *self {
            RadialProfile::Quadratic { q1, q2, k } => {
                let b0 = q1 * r * r;
                let b1 = q2 * r * r - k as f64;
                if b0 >= b1 {
                    (b0, 2.0 * q1 * r, 2.0 * q1)
                } else {
                    (b1, 2.0 * q2 * r, 2.0 * q2)
                }
            }
            RadialProfile::Linear { q, k } => {
                let b1 = q * r - k as f64;
                if r >= b1 {
                    (r, 1.0, 0.0)
                } else {
                    (b1, q, 0.0)
                }
            }
        }
    }

    /// `h1(r) / r` and `h1(r) / r^2`, computed without forming `r^2` where the
    /// branch allows it.
    fn ratios(&self, r: f64) -> (f64, f64) {
        match *self {
            RadialProfile::Quadratic { q1, q2, k } => {
                if q1 * r * r >= q2 * r * r - k as f64 {
                    (q1 * r, q1)
                } else {
                    let h = q2 * r * r - k as f64;
                    (h / r, h / r / r)
                }
            }
            RadialProfile::Linear { q, k } => {
                if r >= q * r - k as f64 {
                    (1.0, 1.0 / r)
                } else {
                    let h = q * r - k as f64;
                    (h / r, h / r / r)
                }
            }
        }
    }
}

/// Parameters of one random instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomFamilyParams {
    pub example: ExampleId,
    pub n_terms: usize,
    pub seed: u64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub radial: RadialProfile,
    /// Evaluate the trigonometric factor at `x` instead of `x / ||x||`.
    #[serde(default)]
    pub raw_coordinates: bool,
}

impl RandomFamilyParams {
    /// Default radial factor of each example: `q1 = 1, q2 = 2, k = 2` and `q = 2, k = 2`.
    pub fn default_radial(example: ExampleId) -> RadialProfile {
        match example {
            ExampleId::Example1 => RadialProfile::Quadratic { q1: 1.0, q2: 2.0, k: 2 },
            ExampleId::Example2 => RadialProfile::Linear { q: 2.0, k: 2 },
        }
    }

    /// Draws the coefficients from a fresh generator seeded with `seed`.
    pub fn draw(example: ExampleId, n_terms: usize, radial: RadialProfile, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::draw_from(example, n_terms, radial, seed, &mut rng)
    }

    /// Draws the coefficients from `rng`, leaving it positioned after the draws.
    pub fn draw_from(
        example: ExampleId,
        n_terms: usize,
        radial: RadialProfile,
        seed: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let (alo, ahi) = COEFF_AMPLITUDE_RANGE;
        let (flo, fhi) = COEFF_FREQUENCY_RANGE;
        let mut p = Self {
            example,
            n_terms,
            seed,
            a: Vec::with_capacity(n_terms),
            b: Vec::with_capacity(n_terms),
            c: Vec::with_capacity(n_terms),
            d: Vec::with_capacity(n_terms),
            radial,
            raw_coordinates: false,
        };
        for _ in 0..n_terms {
            p.a.push(rng.gen_range(alo..=ahi));
            p.b.push(rng.gen_range(flo..=fhi));
            p.c.push(rng.gen_range(alo..=ahi));
            p.d.push(rng.gen_range(flo..=fhi));
        }
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_terms == 0 {
            return Err(Error::param("N", "must be positive"));
        }
        for (name, v) in [("a", &self.a), ("b", &self.b), ("c", &self.c), ("d", &self.d)] {
            if v.len() != self.n_terms {
                return Err(Error::param(name, format!("expected {} entries, got {}", self.n_terms, v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::param(name, "non-finite coefficient"));
            }
        }
        let (alo, ahi) = COEFF_AMPLITUDE_RANGE;
        if self.a.iter().chain(&self.c).any(|x| *x < alo || *x > ahi) {
            return Err(Error::param("a/c", "amplitudes must lie in [0, 20]"));
        }
        self.radial.validate()?;
        match (self.example, self.radial) {
            (ExampleId::Example1, RadialProfile::Quadratic { .. })
            | (ExampleId::Example2, RadialProfile::Linear { .. }) => Ok(()),
            _ => Err(Error::param("radial", format!("profile does not match {}", self.example))),
        }
    }
}

/// `h1(||x||) * h2(x / ||x||)` with `h(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductFamily {
    params: RandomFamilyParams,
}

pub fn make_example1(params: RandomFamilyParams) -> Result<ProductFamily> {
    if params.example != ExampleId::Example1 {
        return Err(Error::param("example", "expected example1 parameters"));
    }
    ProductFamily::new(params)
}

pub fn make_example2(params: RandomFamilyParams) -> Result<ProductFamily> {
    if params.example != ExampleId::Example2 {
        return Err(Error::param("example", "expected example2 parameters"));
    }
    ProductFamily::new(params)
}

impl ProductFamily {
    pub fn new(params: RandomFamilyParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &RandomFamilyParams {
        &self.params
    }

    /// The certificate this family carries: `(1, 2 min(q1, q2))` for the
    /// quadratic profile and `(1, 0)` for the linear one, both about the origin.
    pub fn certificate(&self) -> QuasarCertificate {
        let gamma = match self.params.radial {
            RadialProfile::Quadratic { q1, q2, .. } => 2.0 * q1.min(q2),
            RadialProfile::Linear { .. } => 0.0,
        };
        QuasarCertificate::new(1.0, gamma, Vector::zeros(2)).expect("valid by construction")
    }

    /// `h2` at `v` with its gradient and (diagonal) Hessian.
    fn trig(&self, v: &Vector) -> (f64, Vector, Matrix) {
        let p = &self.params;
        let scale = 1.0 / (4.0 * p.n_terms as f64);
        let (mut val, mut g1, mut g2, mut h1, mut h2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..p.n_terms {
            let (a, b, c, d) = (p.a[i], p.b[i], p.c[i], p.d[i]);
            let s = (b * v[0]).sin();
            let co = (d * v[1]).cos();
            val += a * s * s + c * co * co;
            g1 += a * b * (2.0 * b * v[0]).sin();
            g2 -= c * d * (2.0 * d * v[1]).sin();
            h1 += 2.0 * a * b * b * (2.0 * b * v[0]).cos();
            h2 -= 2.0 * c * d * d * (2.0 * d * v[1]).cos();
        }
        let grad = Vector::from_vec(vec![g1 * scale, g2 * scale]);
        let mut hess = Matrix::zeros(2, 2);
        hess[(0, 0)] = h1 * scale;
        hess[(1, 1)] = h2 * scale;
        (1.0 + val * scale, grad, hess)
    }

    fn origin_direction() -> Vector {
        Vector::from_vec(vec![1.0, 0.0])
    }
}

impl Objective for ProductFamily {
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &Vector) -> f64 {
        let r = stable_norm(x);
        if r == 0.0 {
            return 0.0;
        }
        let (h1, _, _) = self.params.radial.eval(r);
        let arg = if self.params.raw_coordinates { x.clone() } else { x / r };
        h1 * self.trig(&arg).0
    }

    fn clarke_element(&self, x: &Vector) -> Vector {
        let r = stable_norm(x);
        if r == 0.0 {
            return Vector::zeros(2);
        }
        let u = x / r;
        let radial = self.params.radial;
        let (_, d1, _) = radial.eval(r);
        if self.params.raw_coordinates {
            let (h1, _, _) = radial.eval(r);
            let (phi, g, _) = self.trig(x);
            return &u * (d1 * phi) + g * h1;
        }
        let (over_r, _) = radial.ratios(r);
        let (phi, g, _) = self.trig(&u);
        let pg = &g - &u * u.dot(&g);
        &u * (d1 * phi) + pg * over_r
    }

    fn clarke_jacobian(&self, x: &Vector) -> Option<Matrix> {
        let r = stable_norm(x);
        let radial = self.params.radial;
        if r == 0.0 {
            return Some(match radial {
                RadialProfile::Quadratic { q1, .. } => {
                    let dir = if self.params.raw_coordinates {
                        Vector::zeros(2)
                    } else {
                        Self::origin_direction()
                    };
                    Matrix::identity(2, 2) * (2.0 * q1 * self.trig(&dir).0)
                }
                RadialProfile::Linear { .. } => Matrix::zeros(2, 2),
            });
        }
        let u = x / r;
        let uu = &u * u.transpose();
        let proj = Matrix::identity(2, 2) - &uu;
        let (h1, d1, d2) = radial.eval(r);
        if self.params.raw_coordinates {
            let (phi, g, hess) = self.trig(x);
            let cross = &u * g.transpose() + &g * u.transpose();
            return Some(uu * (d2 * phi) + proj * (d1 * phi / r) + cross * d1 + hess * h1);
        }
        let (_, over_r2) = radial.ratios(r);
        let (phi, g, a) = self.trig(&u);
        let pg = &proj * &g;
        // r^2 * Hess[h2(x / r)] = P A P - (u.g) P - u (Pg)^T - (Pg) u^T
        let hess_phi_r2 = &proj * a * &proj - &proj * u.dot(&g) - &u * pg.transpose() - &pg * u.transpose();
        // r * grad[h2(x / r)] = P g
        let cross = &u * pg.transpose() + &pg * u.transpose();
        Some(uu * (d2 * phi) + &proj * (d1 * phi / r) + cross * (d1 / r) + hess_phi_r2 * over_r2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{finite_diff_gradient, vector};
    use approx::assert_abs_diff_eq;

    fn flat(example: ExampleId, n: usize, radial: RadialProfile) -> RandomFamilyParams {
        RandomFamilyParams {
            example,
            n_terms: n,
            seed: 0,
            a: vec![0.0; n],
            b: vec![1.0; n],
            c: vec![0.0; n],
            d: vec![1.0; n],
            radial,
            raw_coordinates: false,
        }
    }

    #[test]
    fn origin_value_is_zero() {
        for ex in [ExampleId::Example1, ExampleId::Example2] {
            let p = RandomFamilyParams::draw(ex, 5, RandomFamilyParams::default_radial(ex), 3).unwrap();
            let h = ProductFamily::new(p).unwrap();
            assert_eq!(h.value(&Vector::zeros(2)), 0.0);
        }
    }

    #[test]
    fn flat_trig_layer_collapses() {
        let h = make_example1(flat(
            ExampleId::Example1,
            3,
            RadialProfile::Quadratic { q1: 1.0, q2: 2.0, k: 100 },
        ))
        .unwrap();
        assert_eq!(h.value(&vector(&[1.0, 0.0]).unwrap()), 1.0);

        let h2 = make_example2(flat(ExampleId::Example2, 3, RadialProfile::Linear { q: 2.0, k: 2 })).unwrap();
        assert_eq!(h2.value(&vector(&[1.0, 0.0]).unwrap()), 1.0);
        // On the kink circle ||x|| = 2 both branches equal 2; the first branch
        // (slope 1) supplies the element.
        let x = vector(&[0.0, 2.0]).unwrap();
        assert_eq!(h2.value(&x), 2.0);
        let g = h2.clarke_element(&x);
        assert_abs_diff_eq!(g[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g[0], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn wrong_example_rejected() {
        let p = RandomFamilyParams::draw(ExampleId::Example2, 2, RandomFamilyParams::default_radial(ExampleId::Example2), 1).unwrap();
        assert!(make_example1(p).is_err());
        assert!(RadialProfile::Quadratic { q1: 2.0, q2: 1.0, k: 1 }.validate().is_err());
        assert!(RadialProfile::Linear { q: 1.0, k: 1 }.validate().is_err());
    }

    #[test]
    fn seeded_draws_are_bit_identical() {
        let r = RandomFamilyParams::default_radial(ExampleId::Example1);
        let a = RandomFamilyParams::draw(ExampleId::Example1, 10, r, 99).unwrap();
        let b = RandomFamilyParams::draw(ExampleId::Example1, 10, r, 99).unwrap();
        assert_eq!(a, b);
        let c = RandomFamilyParams::draw(ExampleId::Example1, 10, r, 100).unwrap();
        assert_ne!(a, c);
        for i in 0..10 {
            assert!((0.0..=20.0).contains(&a.a[i]) && (0.0..=20.0).contains(&a.c[i]));
            assert!((-25.0..=25.0).contains(&a.b[i]) && (-25.0..=25.0).contains(&a.d[i]));
        }
    }

    #[test]
    fn params_json_roundtrip() {
        let p = RandomFamilyParams::draw(ExampleId::Example2, 4, RandomFamilyParams::default_radial(ExampleId::Example2), 7).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let back: RandomFamilyParams = serde_json::from_str(&s).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for ex in [ExampleId::Example1, ExampleId::Example2] {
            for raw in [false, true] {
                let mut p = RandomFamilyParams::draw(ex, 4, RandomFamilyParams::default_radial(ex), 21).unwrap();
                p.raw_coordinates = raw;
                let h = ProductFamily::new(p).unwrap();
                for _ in 0..200 {
                    let x = Vector::from_fn(2, |_, _| rng.gen_range(-2.5..2.5));
                    let r = x.norm();
                    if r < 0.05 || (r - 2f64.sqrt()).abs() < 1e-3 || (r - 2.0).abs() < 1e-3 {
                        continue;
                    }
                    let g = h.clarke_element(&x);
                    let fd = finite_diff_gradient(&h, &x, 1e-7).unwrap();
                    assert!((&g - &fd).norm() <= 1e-5 * (1.0 + g.norm()), "{ex} raw={raw} x={x:?} g={g:?} fd={fd:?}");
                    let jac = h.clarke_jacobian(&x).unwrap();
                    let step = 1e-7;
                    for j in 0..2 {
                        let mut xp = x.clone();
                        let mut xm = x.clone();
                        xp[j] += step;
                        xm[j] -= step;
                        let col = (h.clarke_element(&xp) - h.clarke_element(&xm)) / (2.0 * step);
                        for i in 0..2 {
                            assert!(
                                (jac[(i, j)] - col[i]).abs() <= 1e-4 * (1.0 + col[i].abs()),
                                "{ex} raw={raw} ({i},{j}) at {x:?}: {} vs {}",
                                jac[(i, j)],
                                col[i]
                            );
                        }
                    }
                }
            }
        }
    }
}
