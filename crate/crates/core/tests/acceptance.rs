//! Acceptance suite. Each test prints one `criterion N [PASS|FAIL]` line and
//! then asserts the criterion.

use std::io::Write;
use std::time::Instant;

use quasar_ppa::checker::{
    check_diff_characterization, check_quadratic_growth, check_quasar_inequality, iteration_bound_quasar,
    iteration_bound_strong, tail_ratio_compliance, theoretical_rate, BoundKind, Sampler, ViolationReport,
};
use quasar_ppa::experiments::{emit_tables, make_instance, run_cell, BatchReport, ExperimentPlan};
use quasar_ppa::functions::{
    q_alpha_kappa, q_infimum, sphere_minimum, strong_modulus, theta_alpha, theta_infimum, Ces, EuclidPower,
    ExampleId, HomogeneousParams, Leontief, LpQuasiNorm, LpRegularizer, ProductFamily, Quadratic, RandomFamilyParams,
};
use quasar_ppa::prox::{prox_objective, prox_oracle_grid_refined};
use quasar_ppa::trace::SCHEMA_VERSION;
use quasar_ppa::{
    prox, run_ppa, run_ppa_tracked, BoxConstraint, Objective, PpaConfig, ProxConfig, QuasarCertificate, Restricted,
    Vector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: u32, pass: bool, detail: impl std::fmt::Display, started: Instant) {
    // Written to the stderr handle directly so the line shows without --nocapture.
    let _ = writeln!(
        std::io::stderr().lock(),
        "criterion {n} [{}]: {detail} ({:.1}s)",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    assert!(pass, "criterion {n} failed: {detail}");
}

fn family(example: ExampleId, n: usize, seed: u64) -> ProductFamily {
    let radial = RandomFamilyParams::default_radial(example);
    ProductFamily::new(RandomFamilyParams::draw(example, n, radial, seed).unwrap()).unwrap()
}

#[test]
fn criterion_01_set_valued_prox() {
    let t = Instant::now();
    let f = Restricted::new(EuclidPower::new(1, 0.5).unwrap(), BoxConstraint::cube(1, -2.0, 2.0).unwrap()).unwrap();
    let z = Vector::from_element(1, 1.5);
    let res = prox(&f, &z, &ProxConfig::with_beta(1.0)).unwrap();
    let mut pts: Vec<f64> = res.minimizers.iter().map(|c| c.point[0]).collect();
    pts.sort_by(f64::total_cmp);
    // sqrt|x| + (x - 1.5)^2 / 2 at x = 0 and x = 1.
    let expected = [0.0, 1.0];
    let values_ok = res
        .minimizers
        .iter()
        .all(|c| (prox_objective(&f, &c.point, &z, 1.0) - 1.125).abs() <= 1e-9);
    let pass = res.converged
        && pts.len() == 2
        && pts.iter().zip(expected).all(|(p, e)| (p - e).abs() <= 1e-6)
        && values_ok;
    verdict(1, pass, format!("minimizers {pts:?}, values within 1e-9 of 1.125: {values_ok}"), t);
}

#[test]
fn criterion_02_fixed_points_and_strict_decrease() {
    let t = Instant::now();
    let alphas = vec![1.0, 2.0];
    let cube = BoxConstraint::cube(2, -2.0, 2.0).unwrap();
    let gallery: Vec<(&str, Box<dyn Objective>)> = vec![
        ("quadratic", Box::new(Quadratic::new(vec![1.0, 3.0]).unwrap())),
        ("euclid^0.5", Box::new(EuclidPower::new(2, 0.5).unwrap())),
        ("euclid^1.5", Box::new(EuclidPower::new(2, 1.5).unwrap())),
        ("sqrt|x| on box", Box::new(Restricted::new(EuclidPower::new(2, 0.5).unwrap(), cube).unwrap())),
        ("lp 0.5", Box::new(LpRegularizer::new(2, 0.5).unwrap())),
        ("lp-norm 0.5", Box::new(LpQuasiNorm::new(2, 0.5).unwrap())),
        ("ces 0.5", Box::new(Ces::new(alphas.clone(), 0.5).unwrap())),
        ("ces 2", Box::new(Ces::new(alphas.clone(), 2.0).unwrap())),
        ("leontief", Box::new(Leontief::new(alphas, 1.0).unwrap())),
        ("example1", Box::new(family(ExampleId::Example1, 5, 1))),
        ("example2", Box::new(family(ExampleId::Example2, 5, 1))),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    for (name, f) in &gallery {
        let xbar = Vector::zeros(2);
        let orthant = f.domain().is_some_and(|d| d.lower().iter().all(|l| *l >= 0.0));
        let cfg = ProxConfig::with_beta(0.5);
        let at_min = prox(f, &xbar, &cfg).unwrap();
        if !at_min.minimizers.iter().any(|c| (&c.point - &xbar).norm() <= 1e-7) {
            failures.push(format!("{name}: origin not returned"));
        }
        for i in 0..100 {
            let z = if orthant {
                // Leontief vanishes on the boundary, so stay in the open orthant.
                Vector::from_fn(2, |_, _| rng.gen_range(0.05..2.0))
            } else {
                Vector::from_fn(2, |_, _| rng.gen_range(-2.0..2.0))
            };
            let cfg = ProxConfig { seed: i, ..cfg.clone() };
            let res = prox(f, &z, &cfg).unwrap();
            let hz = f.value(&z);
            if !res.converged || !res.minimizers.iter().all(|c| f.value(&c.point) < hz) {
                failures.push(format!("{name}: z={z:?}"));
            }
        }
    }
    verdict(
        2,
        failures.is_empty(),
        format!("{} functions x 100 points, failures: {failures:?}", gallery.len()),
        t,
    );
}

#[test]
fn criterion_03_linear_rate_on_example1() {
    let t = Instant::now();
    let (kappa, gamma, beta) = (1.0, 2.0, 0.05);
    let bound = theoretical_rate(kappa, gamma, beta).unwrap();
    // Independent evaluation of 1/sqrt(1 + k b g + k^2 b g / (2 - k)).
    assert!((bound - 1.0 / (1.0f64 + 0.1 + 0.1).sqrt()).abs() < 1e-15);
    let mut plan = ExperimentPlan::defaults(ExampleId::Example1);
    plan.master_seed = 3;
    let cfg = PpaConfig::constant(beta);
    let (mut steps, mut ok, mut worst) = (0, 0, 0.0f64);
    for i in 0..20 {
        let inst = make_instance(&plan, [2, 5, 10, 20][i % 4], i).unwrap();
        let f = inst.objective().unwrap();
        let xbar = f.certificate().xbar();
        let trace = run_ppa_tracked(&f, &inst.start(), &cfg, Some(&xbar)).unwrap();
        let c = tail_ratio_compliance(&trace, &xbar, bound, 0.8, 1e-6).unwrap();
        steps += c.steps;
        ok += c.compliant;
        worst = worst.max(c.max_ratio);
    }
    let share = ok as f64 / steps as f64;
    verdict(
        3,
        share >= 0.95,
        format!("{ok}/{steps} tail steps ({:.2}%) within bound {bound:.5}, largest ratio {worst:.5}", 100.0 * share),
        t,
    );
}

#[test]
fn criterion_04_sublinear_bound_on_example2() {
    let t = Instant::now();
    let mut plan = ExperimentPlan::defaults(ExampleId::Example2);
    plan.master_seed = 4;
    let cfg = PpaConfig::constant(0.05);
    let (mut checked, mut violations) = (0, Vec::new());
    for i in 0..20 {
        let inst = make_instance(&plan, [2, 5, 10, 20][i % 4], i).unwrap();
        let f = inst.objective().unwrap();
        let x0 = inst.start();
        let trace = run_ppa(&f, &x0, &cfg).unwrap();
        for (n, v) in trace.values.iter().enumerate().skip(1) {
            checked += 1;
            if *v > x0.norm_squared() / (2.0 * 0.05 * n as f64) {
                violations.push((i, n, *v));
            }
        }
    }
    verdict(4, violations.is_empty(), format!("{checked} iterates checked, violations {violations:?}"), t);
}

fn run_table(example: ExampleId, master_seed: u64) -> BatchReport {
    let mut plan = ExperimentPlan::defaults(example);
    plan.master_seed = master_seed;
    let cells = plan.n_values.iter().map(|&n| run_cell(&plan, n).unwrap()).collect();
    let report = BatchReport {
        schema_version: SCHEMA_VERSION,
        plan,
        cells,
    };
    print!("{}", emit_tables(&report).text);
    report
}

#[test]
fn criterion_05_table1() {
    let t = Instant::now();
    let report = run_table(ExampleId::Example1, 20261016);
    // Published SSN counts and medians for N = 2, 5, 10, 20.
    let published_ssn = [(19usize, 1.34e-6f64), (25, 1.01e-6), (31, 7.41e-7), (35, 5.34e-7)];
    let mut notes = Vec::new();
    let mut pass = true;
    for (cell, (count, median)) in report.cells.iter().zip(published_ssn) {
        let ppa_ok = cell.ppa.success_count == 50 && cell.ppa.median_final_value.is_some_and(|m| m <= 1e-8);
        let ssn_count_ok = cell.ssn.success_count.abs_diff(count) <= 10;
        let ssn_median_ok = cell
            .ssn
            .median_final_value
            .is_some_and(|m| m > 0.0 && (m.log10() - median.log10()).abs() <= 1.0);
        pass &= ppa_ok && ssn_count_ok && ssn_median_ok;
        notes.push(format!(
            "N={}: PPA {} {}, SSN {} count {} median {}",
            cell.n_terms,
            cell.ppa.cell_text(),
            if ppa_ok { "ok" } else { "off" },
            cell.ssn.cell_text(),
            if ssn_count_ok { "ok" } else { "off" },
            if ssn_median_ok { "ok" } else { "off" },
        ));
    }
    verdict(5, pass, notes.join("; "), t);
}

#[test]
fn criterion_06_table2() {
    let t = Instant::now();
    let report = run_table(ExampleId::Example2, 20261017);
    let mut notes = Vec::new();
    let mut pass = true;
    for cell in &report.cells {
        let ppa_ok = cell.ppa.success_count >= 49
            && cell.ppa.median_final_value.is_some_and(|m| (1e-7..=1e-4).contains(&m));
        let ssn_ok = cell.ssn.success_count <= 15 && cell.ssn.median_final_value.is_none();
        pass &= ppa_ok && ssn_ok;
        notes.push(format!(
            "N={}: PPA {} {}, SSN {} {}",
            cell.n_terms,
            cell.ppa.cell_text(),
            if ppa_ok { "ok" } else { "off" },
            cell.ssn.cell_text(),
            if ssn_ok { "ok" } else { "off" },
        ));
    }
    verdict(6, pass, notes.join("; "), t);
}

#[test]
fn criterion_07_theta_and_q_infima() {
    let t = Instant::now();
    // Log-spaced grid: the infima for alpha < 2 are approached as lambda -> 0.
    let grid: Vec<f64> = (0..10_000).map(|i| 10f64.powf(-10.0 + 10.0 * i as f64 / 9_999.0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let alpha = match i % 5 {
            0 => rng.gen_range(0.05..1.0),
            1 => 1.0,
            2 => rng.gen_range(1.0..2.0),
            3 => 2.0,
            _ => rng.gen_range(2.0..6.0),
        };
        let kappa = if alpha <= 1.0 {
            alpha * rng.gen_range(0.05..0.95)
        } else {
            rng.gen_range(0.05..=1.0)
        };
        let th = grid.iter().map(|l| theta_alpha(*l, alpha).unwrap()).fold(f64::INFINITY, f64::min);
        let q = grid.iter().map(|l| q_alpha_kappa(*l, alpha, kappa).unwrap()).fold(f64::INFINITY, f64::min);
        // Closed forms re-derived here: inf theta = min(alpha, 1);
        // inf Q = 2 (min(alpha, 2) - kappa) / kappa.
        let th_inf = alpha.min(1.0);
        let q_inf = 2.0 * (alpha.min(2.0) - kappa) / kappa;
        assert!((theta_infimum(alpha).unwrap() - th_inf).abs() < 1e-15);
        assert!((q_infimum(alpha, kappa).unwrap() - q_inf).abs() < 1e-12 * (1.0 + q_inf.abs()));
        worst = worst.max((th - th_inf).abs()).max((q - q_inf).abs());
    }
    verdict(7, worst <= 1e-6, format!("largest gap between grid minimum and closed form {worst:.2e}"), t);
}

#[test]
fn criterion_08_certification_suite() {
    let t = Instant::now();
    let n = 100_000;
    let mut reports: Vec<(&str, ViolationReport)> = Vec::new();

    let lp = LpRegularizer::new(2, 0.5).unwrap();
    let ball = Sampler::UniformBall { radius: 1.0 };
    let lp_cert = QuasarCertificate::new(0.4, 0.0, Vector::zeros(2)).unwrap();
    reports.push(("lp kappa=0.4 quasar", check_quasar_inequality(&lp, &lp_cert, &ball, n, 1).unwrap()));
    reports.push(("lp kappa=0.4 growth", check_quadratic_growth(&lp, &lp_cert, &ball, n, 2).unwrap()));
    reports.push(("lp kappa=0.4 diff", check_diff_characterization(&lp, &lp_cert, &ball, n, 3).unwrap()));

    let ces = Ces::new(vec![4.0, 9.0], 1.0).unwrap();
    // 4 x1 + 9 x2 is linear, so its minimum on the quarter circle sits on an axis: 4.
    let s_c = sphere_minimum(&ces, 1.0, ces.domain(), 10_001).unwrap();
    assert!((s_c - 4.0).abs() < 1e-9, "sphere minimum {s_c}");
    let gamma_c = strong_modulus(&HomogeneousParams::new(1.0, 1.0, 1.0, 4.0).unwrap(), 0.5).unwrap();
    assert!((gamma_c - 8.0).abs() < 1e-12);
    let ces_cert = QuasarCertificate::new(0.5, gamma_c, Vector::zeros(2)).unwrap();
    let orthant = Sampler::Orthant { radius: 1.0 };
    reports.push(("ces quasar", check_quasar_inequality(&ces, &ces_cert, &orthant, n, 4).unwrap()));
    reports.push(("ces growth", check_quadratic_growth(&ces, &ces_cert, &orthant, n, 5).unwrap()));
    reports.push(("ces diff", check_diff_characterization(&ces, &ces_cert, &orthant, n, 6).unwrap()));

    let ex1 = family(ExampleId::Example1, 5, 8);
    let q1 = 1.0;
    let ex1_cert = QuasarCertificate::new(1.0, 2.0 * q1, Vector::zeros(2)).unwrap();
    let wide = Sampler::UniformBall { radius: 3.0 };
    reports.push(("example1 quasar", check_quasar_inequality(&ex1, &ex1_cert, &wide, n, 7).unwrap()));
    reports.push(("example1 growth", check_quadratic_growth(&ex1, &ex1_cert, &wide, n, 8).unwrap()));
    reports.push(("example1 diff", check_diff_characterization(&ex1, &ex1_cert, &wide, n, 9).unwrap()));

    let bad = QuasarCertificate::new(0.9, 0.0, Vector::zeros(2)).unwrap();
    let witness = check_quasar_inequality(&lp, &bad, &ball, n, 10).unwrap();

    let clean = reports.iter().all(|(_, r)| r.passed() && r.n_samples > 0);
    let detail: Vec<String> = reports
        .iter()
        .map(|(name, r)| format!("{name}: {}/{}", r.n_violations, r.n_samples))
        .collect();
    verdict(
        8,
        clean && witness.witness.is_some(),
        format!(
            "{}; lp kappa=0.9 witness {:?}",
            detail.join(", "),
            witness.witness.as_ref().map(|w| (w.x.clone(), w.margin))
        ),
        t,
    );
}

#[test]
fn criterion_09_oracle_equivalence() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for i in 0..50 {
        let example = if i % 2 == 0 { ExampleId::Example1 } else { ExampleId::Example2 };
        let f = family(example, [2, 5, 10, 20][rng.gen_range(0..4)], rng.gen());
        let z = Vector::from_fn(2, |_, _| rng.gen_range(-1.5..1.5));
        let beta = rng.gen_range(0.02..0.1);
        let res = prox(&f, &z, &ProxConfig { seed: i, ..ProxConfig::with_beta(beta) }).unwrap();
        let ours = prox_objective(&f, &res.best().unwrap().point, &z, beta);
        // Any prox point lies within sqrt(2 beta h(z)) of z.
        let r = (2.0 * beta * f.value(&z)).sqrt() + 0.05;
        let bounds = BoxConstraint::new(vec![z[0] - r, z[1] - r], vec![z[0] + r, z[1] + r]).unwrap();
        let oracle = prox_oracle_grid_refined(&f, &z, beta, &bounds, 300, 3).unwrap();
        let gap = (ours - oracle[0].1).abs();
        if gap > worst {
            worst = gap;
            detail = format!("instance {i}: prox {ours:.10} oracle {:.10}", oracle[0].1);
        }
    }
    verdict(9, worst <= 1e-4, format!("largest value gap {worst:.2e} ({detail})"), t);
}

#[test]
fn criterion_10_bound_calculators() {
    let t = Instant::now();
    let strong = iteration_bound_strong(1e-3, 1.0, 2.0, 1.0, 1.0).unwrap();
    // Re-derivation: smallest k with rate^k * dist0 <= eps, rate = 1/sqrt(1 + 2 + 2).
    let rate = 1.0 / 5f64.sqrt();
    let strong_ref = (0..).find(|k| rate.powi(*k) <= 1e-3).unwrap() as u64;
    let quasar = iteration_bound_quasar(1e-2, BoundKind::Value, 0.05, None, 1.0, 1.0).unwrap();
    // Re-derivation: smallest N with dist0^2 / (2 kappa beta' N) <= eps.
    let quasar_ref = (1u64..).find(|n| 1.0 / (2.0 * 0.05 * *n as f64) <= 1e-2 * (1.0 + 1e-12)).unwrap();
    let pass = strong == 9 && strong == strong_ref && quasar == 1000 && quasar == quasar_ref;
    verdict(
        10,
        pass,
        format!("strong {strong} (re-derived {strong_ref}), quasar {quasar} (re-derived {quasar_ref})"),
        t,
    );
}
