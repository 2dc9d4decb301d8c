//! Test-function gallery: positively homogeneous nonsmooth functions with
//! closed-form quasar-convexity moduli, and the randomized product families
//! used in the benchmark tables.

mod family;
mod gallery;
mod moduli;

pub use family::{
    make_example1, make_example2, ExampleId, ProductFamily, RadialProfile, RandomFamilyParams,
    COEFF_AMPLITUDE_RANGE, COEFF_FREQUENCY_RANGE,
};
pub use gallery::{
    ces, euclid_power, leontief, lp_quasinorm, lp_regularizer, Ces, EuclidPower, Leontief,
    LpQuasiNorm, LpRegularizer, Quadratic,
};
pub use moduli::{
    q_alpha_kappa, q_infimum, sphere_minimum, strong_modulus, theta_alpha, theta_infimum,
    HomogeneousParams,
};

/// Functions satisfying `h(t x) = t^degree h(x)` for `t` in `[0, 1]`.
pub trait Homogeneous {
    fn degree(&self) -> f64;
}

/// Euclidean norm that does not underflow for tiny entries.
pub(crate) fn stable_norm(x: &crate::Vector) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}
