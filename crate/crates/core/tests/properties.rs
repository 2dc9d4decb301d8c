//! Randomized invariants across modules.

use proptest::prelude::*;
use quasar_ppa::checker::{
    check_quasar_inequality, iteration_bound_strong, theoretical_rate, Sampler,
};
use quasar_ppa::experiments::{emit_tables, run_plan, ExperimentPlan};
use quasar_ppa::functions::{
    q_alpha_kappa, q_infimum, theta_alpha, Ces, EuclidPower, ExampleId, Homogeneous, Leontief, LpQuasiNorm,
    LpRegularizer, ProductFamily, Quadratic, RandomFamilyParams,
};
use quasar_ppa::prox::prox_objective;
use quasar_ppa::{
    finite_diff_gradient, project_box, prox, run_ppa, run_ppa_tracked, run_ssn, BoxConstraint, Objective,
    PpaConfig, ProxConfig, QuasarCertificate, SsnConfig, Termination, Vector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn family(example: ExampleId, n: usize, seed: u64) -> ProductFamily {
    let radial = RandomFamilyParams::default_radial(example);
    ProductFamily::new(RandomFamilyParams::draw(example, n, radial, seed).unwrap()).unwrap()
}

/// Gallery member `which` in dimension 3 with exponent-like parameter `s` in (0, 1).
fn gallery(which: usize, s: f64) -> (Box<dyn Objective>, f64) {
    let alphas = vec![1.0, 2.0, 0.5];
    match which {
        0 => (Box::new(Quadratic::new(vec![1.0, 0.5 + s, 3.0]).unwrap()), 2.0),
        1 => {
            let f = EuclidPower::new(3, 0.2 + 1.8 * s).unwrap();
            let d = f.degree();
            (Box::new(f), d)
        }
        2 => (Box::new(LpRegularizer::new(3, 0.1 + 0.8 * s).unwrap()), 0.1 + 0.8 * s),
        3 => (Box::new(LpQuasiNorm::new(3, 0.1 + 0.8 * s).unwrap()), 1.0),
        4 => {
            let beta = if s < 0.5 { -1.0 - s } else { 0.2 + s };
            (Box::new(Ces::new(alphas, beta).unwrap()), 1.0)
        }
        _ => {
            let f = Leontief::new(alphas, 0.3 + 2.0 * s).unwrap();
            let d = f.degree();
            (Box::new(f), d)
        }
    }
}

proptest! {
    #![proptest_config(cfg(200))]

    #[test]
    fn clarke_element_matches_gradient_at_smooth_points(
        which in 0usize..6,
        s in 0.05f64..0.95,
        mags in prop::array::uniform3(0.1f64..2.0),
        signs in prop::array::uniform3(any::<bool>()),
    ) {
        let (f, _) = gallery(which, s);
        let orthant = f.domain().is_some();
        let x = Vector::from_iterator(3, mags.iter().zip(signs).map(|(m, neg)| if neg && !orthant { -m } else { *m }));
        if which == 5 {
            // Leontief is smooth only where the smallest ratio is unique.
            let mut r: Vec<f64> = x.iter().zip([1.0, 2.0, 0.5]).map(|(v, a)| v / a).collect();
            r.sort_by(f64::total_cmp);
            prop_assume!(r[1] - r[0] > 1e-3);
        }
        let g = f.clarke_element(&x);
        let fd = finite_diff_gradient(&f, &x, 1e-6).unwrap();
        prop_assert!((&g - &fd).norm() <= 1e-5 * (1.0 + g.norm()), "g={g} fd={fd}");
    }

    #[test]
    fn projection_is_idempotent(
        x in prop::collection::vec(-10.0f64..10.0, 3),
        lo in prop::collection::vec(-3.0f64..0.0, 3),
        width in prop::collection::vec(0.0f64..4.0, 3),
    ) {
        let hi: Vec<f64> = lo.iter().zip(&width).map(|(l, w)| l + w).collect();
        let b = BoxConstraint::new(lo, hi).unwrap();
        let p = project_box(&Vector::from_vec(x), &b).unwrap();
        prop_assert!(b.contains(&p));
        prop_assert_eq!(project_box(&p, &b).unwrap(), p);
    }

    #[test]
    fn gallery_is_positively_homogeneous(
        which in 0usize..6,
        s in 0.05f64..0.95,
        x in prop::array::uniform3(0.0f64..2.0),
        t in 0.0f64..=1.0,
    ) {
        let (f, degree) = gallery(which, s);
        let x = Vector::from_row_slice(&x);
        let hx = f.value(&x);
        let htx = f.value(&(&x * t));
        prop_assert!((htx - t.powf(degree) * hx).abs() <= 1e-10 * (1.0 + hx.abs()), "{htx} vs {}", t.powf(degree) * hx);
    }

    #[test]
    fn q_never_below_its_infimum(alpha in 0.05f64..4.0, frac in 0.01f64..0.99) {
        let kappa = if alpha <= 1.0 { frac * alpha } else { frac };
        let inf = q_infimum(alpha, kappa).unwrap();
        for i in 1..=1000 {
            let l = i as f64 / 1000.0;
            let q = q_alpha_kappa(l, alpha, kappa).unwrap();
            prop_assert!(q >= inf - 1e-9 * (1.0 + inf.abs()), "Q({l}) = {q} < {inf}");
        }
    }

    #[test]
    fn family_draws_are_seed_deterministic(seed in any::<u64>(), n in 1usize..30, second in any::<bool>()) {
        let ex = if second { ExampleId::Example2 } else { ExampleId::Example1 };
        let radial = RandomFamilyParams::default_radial(ex);
        let a = RandomFamilyParams::draw(ex, n, radial, seed).unwrap();
        let b = RandomFamilyParams::draw(ex, n, radial, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn rate_decreases_in_kappa_gamma_beta(kappa in 0.05f64..1.0, gamma in 0.01f64..10.0, beta in 0.01f64..2.0, bump in 1.01f64..3.0) {
        let r = theoretical_rate(kappa, gamma, beta).unwrap();
        prop_assert!(r < 1.0);
        prop_assert!(theoretical_rate(kappa, gamma * bump, beta).unwrap() < r);
        prop_assert!(theoretical_rate(kappa, gamma, beta * bump).unwrap() < r);
        prop_assert!(theoretical_rate((kappa * bump).min(1.0), gamma, beta).unwrap() <= r);
    }
}

#[test]
fn theta_monotone_by_regime() {
    for alpha in [0.1, 0.3, 0.5, 0.9, 1.5, 2.0, 3.0, 7.0] {
        let vals: Vec<f64> = (1..=1000).map(|i| theta_alpha(i as f64 / 1000.0, alpha).unwrap()).collect();
        for w in vals.windows(2) {
            if alpha < 1.0 {
                assert!(w[1] >= w[0] - 1e-15, "alpha {alpha}");
            } else {
                assert!(w[1] <= w[0] + 1e-15, "alpha {alpha}");
            }
        }
    }
}

#[test]
fn example1_quadratic_growth_about_origin() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..10 {
        let f = family(ExampleId::Example1, [2, 5, 10, 20][seed as usize % 4], seed);
        let cert = f.certificate();
        let (k, g) = (cert.kappa(), cert.gamma());
        let coef = k * g / (2.0 * (2.0 - k));
        for _ in 0..1000 {
            let x = Vector::from_fn(2, |_, _| rng.gen_range(-3.0..3.0));
            assert!(f.value(&x) >= coef * x.norm_squared() * (1.0 - 1e-12), "seed {seed} x {x}");
        }
    }
}

/// Objectives with a known certificate about the origin.
fn certified(which: usize, seed: u64) -> (Box<dyn Objective>, QuasarCertificate) {
    match which {
        0 => {
            let w = vec![0.5 + (seed % 7) as f64 * 0.3, 1.0];
            let gamma = 2.0 * w.iter().cloned().fold(f64::INFINITY, f64::min);
            (Box::new(Quadratic::new(w).unwrap()), QuasarCertificate::new(1.0, gamma, Vector::zeros(2)).unwrap())
        }
        1 => {
            let alpha = 0.3 + 0.1 * (seed % 7) as f64;
            (Box::new(EuclidPower::new(2, alpha).unwrap()), QuasarCertificate::new(alpha, 0.0, Vector::zeros(2)).unwrap())
        }
        2 => {
            let f = family(ExampleId::Example1, 2 + (seed % 3) as usize, seed);
            let c = f.certificate();
            (Box::new(f), c)
        }
        _ => {
            let f = family(ExampleId::Example2, 2 + (seed % 3) as usize, seed);
            let c = f.certificate();
            (Box::new(f), c)
        }
    }
}

proptest! {
    #![proptest_config(cfg(48))]

    #[test]
    fn prox_points_satisfy_descent_and_three_point_bound(
        which in 0usize..4,
        seed in 0u64..1000,
        z in prop::array::uniform2(-2.5f64..2.5),
        beta in 0.02f64..1.0,
    ) {
        let (f, cert) = certified(which, seed);
        let z = Vector::from_row_slice(&z);
        let res = prox(&f, &z, &ProxConfig { seed, ..ProxConfig::with_beta(beta) }).unwrap();
        prop_assert!(res.converged);
        let hz = f.value(&z);
        let xbar = cert.xbar();
        let hbar = f.value(&xbar);
        for c in &res.minimizers {
            let x = &c.point;
            let sub = prox_objective(&f, x, &z, beta);
            prop_assert!(sub <= hz + 1e-9 * (1.0 + hz.abs()), "descent: {sub} > {hz}");
            let rhs = (x - &z).dot(&(&xbar - x)) / (cert.kappa() * beta) - cert.gamma() / 2.0 * (x - &xbar).norm_squared();
            let tol = 1e-6 * (1.0 + hz.abs() + z.norm_squared() / beta);
            prop_assert!(f.value(x) - hbar <= rhs + tol, "three-point: {} > {}", f.value(x) - hbar, rhs);
        }
    }

    #[test]
    fn prox_moves_off_nonminimizers_and_fixes_the_minimizer(
        which in 0usize..4,
        seed in 0u64..1000,
        z in prop::array::uniform2(-2.0f64..2.0),
    ) {
        let (f, cert) = certified(which, seed);
        let z = Vector::from_row_slice(&z);
        prop_assume!(z.norm() > 1e-3);
        let pc = ProxConfig { seed, ..ProxConfig::with_beta(0.1) };
        let moved = prox(&f, &z, &pc).unwrap();
        prop_assert!(moved.minimizers.iter().all(|c| (&c.point - &z).norm() > 1e-9));
        prop_assert!(moved.minimizers.iter().all(|c| f.value(&c.point) < f.value(&z)));
        let fixed = prox(&f, &cert.xbar(), &pc).unwrap();
        prop_assert!(fixed.minimizers.iter().any(|c| (&c.point - &cert.xbar()).norm() <= 1e-7));
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn ppa_decreases_and_respects_fejer_and_rate(
        which in 0usize..4,
        seed in 0u64..1000,
        x0 in prop::array::uniform2(-2.0f64..2.0),
    ) {
        let (f, cert) = certified(which, seed);
        let x0 = Vector::from_row_slice(&x0);
        let beta = 0.05;
        let mut cfg = PpaConfig::constant(beta);
        cfg.prox.seed = seed;
        let xbar = cert.xbar();
        let t = run_ppa_tracked(&f, &x0, &cfg, Some(&xbar)).unwrap();
        prop_assert!(t.terminated_by.is_converged(), "{:?}", t.terminated_by);
        let hbar = f.value(&xbar);
        let d = t.distances_to_ref.as_ref().unwrap();
        for k in 0..t.steps() {
            let (v0, v1) = (t.values[k], t.values[k + 1]);
            prop_assert!(v1 <= v0 + 1e-9 * (1.0 + v0.abs()), "value rose at {k}: {v0} -> {v1}");
            let fejer = d[k] * d[k] + 2.0 * cert.kappa() * beta * (hbar - v1);
            prop_assert!(d[k + 1] * d[k + 1] <= fejer + 1e-9 * (1.0 + d[k] * d[k]), "Fejer at {k}");
        }
        if which == 0 {
            let rate = theoretical_rate(cert.kappa(), cert.gamma(), beta).unwrap();
            for k in 0..t.steps() {
                prop_assert!(d[k + 1] <= rate * d[k] + 1e-9, "rate at {k}");
            }
            let eps = 1e-4;
            let bound = iteration_bound_strong(eps, cert.kappa(), cert.gamma(), beta, d[0]).unwrap() as usize;
            let first = d.iter().position(|v| *v <= eps).unwrap();
            prop_assert!(first <= bound, "first {first} > bound {bound}");
        }
        prop_assert!(t.final_value() - hbar <= 1e-6, "final {}", t.final_value());
    }

    #[test]
    fn ssn_success_means_small_residual_and_runs_replay(
        which in 0usize..4,
        seed in 0u64..1000,
        x0 in prop::array::uniform2(-2.0f64..2.0),
    ) {
        let (f, _) = certified(which, seed);
        let x0 = Vector::from_row_slice(&x0);
        let cfg = SsnConfig::default();
        let a = run_ssn(&f, &x0, &cfg).unwrap();
        let b = run_ssn(&f, &x0, &cfg).unwrap();
        prop_assert_eq!(&a.iterates, &b.iterates);
        if a.terminated_by == Termination::Stationary {
            prop_assert!(f.clarke_element(a.final_point()).norm() <= cfg.tol);
        }
    }
}

#[test]
fn checks_replay_bit_identically() {
    let f = LpRegularizer::new(2, 0.5).unwrap();
    let cert = QuasarCertificate::new(0.9, 0.0, Vector::zeros(2)).unwrap();
    let s = Sampler::UniformBall { radius: 1.0 };
    let a = check_quasar_inequality(&f, &cert, &s, 2000, 5).unwrap();
    let b = check_quasar_inequality(&f, &cert, &s, 2000, 5).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert!(!a.passed());
}

#[test]
fn ppa_runs_replay() {
    let f = family(ExampleId::Example1, 5, 3);
    let x0 = Vector::from_row_slice(&[1.3, -0.7]);
    let cfg = PpaConfig::default();
    assert_eq!(run_ppa(&f, &x0, &cfg).unwrap(), run_ppa(&f, &x0, &cfg).unwrap());
}

#[test]
fn tables_replay_and_example2_sublinear_bound_holds() {
    let mut plan = ExperimentPlan::defaults(ExampleId::Example2);
    plan.n_values = vec![2];
    plan.instances_per_cell = 3;
    plan.master_seed = 99;
    let a = run_plan(&plan).unwrap();
    let b = run_plan(&plan).unwrap();
    assert_eq!(emit_tables(&a), emit_tables(&b));

    for inst in quasar_ppa::experiments::generate_cell(&plan, 2).unwrap() {
        let f = inst.objective().unwrap();
        let x0 = inst.start();
        let t = run_ppa(&f, &x0, &plan.ppa).unwrap();
        for (n, v) in t.values.iter().enumerate().skip(1) {
            let bound = x0.norm_squared() / (2.0 * 0.05 * n as f64);
            assert!(*v <= bound + 1e-12, "N={n}: {v} > {bound}");
        }
    }
}
