use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use quasar_ppa::checker::{
    check_diff_characterization, check_quadratic_growth, check_quasar_inequality, iteration_bound_quasar,
    iteration_bound_strong, theoretical_rate, value_iteration_bound, BoundKind, Sampler, ValueBoundReading,
};
use quasar_ppa::experiments::{emit_tables, emit_traces, generate_instances, run_plan, ExperimentPlan, Instance};
use quasar_ppa::functions::ExampleId;
use quasar_ppa::prox::prox_objective;
use quasar_ppa::trace::{SolverKind, SCHEMA_VERSION};
use quasar_ppa::{
    prox, prox_oracle_grid, run_ppa, run_ssn, BetaSchedule, Objective, PpaConfig, ProxConfig, QuasarCertificate,
    SsnConfig, Termination, Vector,
};
use serde_json::{json, Value};

use crate::args::*;
use crate::problem::{build, radial_profile};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NOT_CONVERGED: u8 = 2;
pub const EXIT_DIVERGED: u8 = 3;

pub fn run(cli: Cli) -> Result<u8> {
    let seed = cli.seed;
    match cli.command {
        Command::Solve(a) => solve(a, seed),
        Command::Prox(a) => prox_cmd(a, seed),
        Command::Certify(a) => certify(a, seed),
        Command::Table(a) => table(a, seed),
        Command::Trace(a) => trace(a, seed),
        Command::Bounds(a) => bounds(a),
        Command::Instance(a) => instance(a, seed),
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

fn point(v: &[f64], dim: usize, flag: &str) -> Result<Vector> {
    if v.len() != dim {
        bail!("{flag} has {} entries but the function has dimension {dim}", v.len());
    }
    if v.iter().any(|x| !x.is_finite()) {
        bail!("{flag} must be finite");
    }
    Ok(Vector::from_row_slice(v))
}

fn vec_of(x: &Vector) -> Vec<f64> {
    x.iter().copied().collect()
}

pub fn exit_code(t: Termination) -> u8 {
    match t {
        Termination::Diverged => EXIT_DIVERGED,
        t if t.is_converged() => EXIT_OK,
        _ => EXIT_NOT_CONVERGED,
    }
}

fn solve(a: SolveArgs, seed: u64) -> Result<u8> {
    let p = build(&a.function, a.x0.as_ref().map(Vec::len), seed)?;
    let f = &p.objective;
    let x0 = match (&a.x0, &p.instance_x0) {
        (Some(x), _) | (None, Some(x)) => point(x, f.dim(), "--x0")?,
        (None, None) => bail!("--x0 is required for gallery functions"),
    };
    let trace = match a.solver {
        SolverChoice::Ppa => {
            let mut cfg = PpaConfig::constant(a.beta);
            cfg.outer_tol = a.tol;
            cfg.max_outer_iter = a.max_iter;
            cfg.prox.seed = seed;
            run_ppa(f, &x0, &cfg)?
        }
        SolverChoice::Ssn => {
            let cfg = SsnConfig {
                tol: a.tol,
                max_iter: a.max_iter,
                ..SsnConfig::default()
            };
            run_ssn(f, &x0, &cfg)?
        }
    };
    if let Some(path) = &a.trace {
        fs::write(path, trace.to_csv_string()).with_context(|| format!("writing {}", path.display()))?;
    }
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "solver": match a.solver { SolverChoice::Ppa => "ppa", SolverChoice::Ssn => "ssn" },
        "function": p.description,
        "x0": vec_of(&x0),
        "final_point": vec_of(trace.final_point()),
        "final_value": finite_or_null(trace.final_value()),
        "iterations": trace.steps(),
        "terminated_by": trace.terminated_by,
        "converged": trace.terminated_by.is_converged(),
    });
    write_or_print(a.summary.as_deref(), &pretty(&summary))?;
    Ok(exit_code(trace.terminated_by))
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn prox_cmd(a: ProxArgs, seed: u64) -> Result<u8> {
    let p = build(&a.function, Some(a.z.len()), seed)?;
    let f = &p.objective;
    let z = point(&a.z, f.dim(), "--z")?;
    let cfg = ProxConfig {
        beta: a.beta,
        n_starts: a.n_starts,
        seed,
        ..ProxConfig::default()
    };
    let res = prox(f, &z, &cfg)?;
    let minimizers: Vec<Value> = res
        .minimizers
        .iter()
        .map(|c| {
            json!({
                "point": vec_of(&c.point),
                "value": f.value(&c.point),
                "subproblem_value": c.objective_value,
                "residual_norm": c.residual_norm,
            })
        })
        .collect();
    let mut out = json!({
        "schema_version": SCHEMA_VERSION,
        "function": p.description,
        "z": a.z,
        "beta": a.beta,
        "converged": res.converged,
        "minimizers": minimizers,
    });
    if let Some(resolution) = a.oracle_resolution {
        let bounds = f
            .domain()
            .context("the grid oracle needs a bounded domain; pass --box LO,HI")?;
        let grid = prox_oracle_grid(f, &z, a.beta, bounds, resolution)?;
        out["oracle"] = grid
            .iter()
            .map(|x| json!({ "point": vec_of(x), "subproblem_value": prox_objective(f, x, &z, a.beta) }))
            .collect();
    }
    print!("{}", pretty(&out));
    Ok(if res.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn certify(a: CertifyArgs, seed: u64) -> Result<u8> {
    let hint = a.xbar.as_ref().map(Vec::len);
    let p = build(&a.function, hint, seed)?;
    let f = &p.objective;
    let xbar = match &a.xbar {
        Some(x) => point(x, f.dim(), "--xbar")?,
        None => Vector::zeros(f.dim()),
    };
    let cert = QuasarCertificate::new(a.kappa, a.gamma, xbar.clone())?;
    let orthant_domain = f.domain().is_some_and(|d| d.lower().iter().all(|l| *l >= 0.0));
    let radius = a.radius;
    let sampler = match a.sampler.unwrap_or(if orthant_domain { SamplerChoice::Orthant } else { SamplerChoice::Ball }) {
        SamplerChoice::Ball => Sampler::UniformBall { radius },
        SamplerChoice::Sphere => Sampler::SphereStratified { radius },
        SamplerChoice::NearKink => Sampler::NearKink {
            radius,
            kink_radii: vec![],
        },
        SamplerChoice::Orthant => Sampler::Orthant { radius },
    };
    let checks = a
        .checks
        .unwrap_or_else(|| vec![CheckChoice::Quasar, CheckChoice::Growth, CheckChoice::Diff]);
    let mut reports = Vec::new();
    for (i, c) in checks.iter().enumerate() {
        // Each check gets its own stream so adding a check does not shift the others.
        let s = seed.wrapping_add(i as u64);
        let r = match c {
            CheckChoice::Quasar => check_quasar_inequality(f, &cert, &sampler, a.samples, s)?,
            CheckChoice::Growth => check_quadratic_growth(f, &cert, &sampler, a.samples, s)?,
            CheckChoice::Diff => check_diff_characterization(f, &cert, &sampler, a.samples, s)?,
        };
        reports.push(r);
    }
    let passed = reports.iter().all(|r| r.passed());
    let out = json!({
        "schema_version": SCHEMA_VERSION,
        "function": p.description,
        "certificate": cert,
        "sampler": sampler,
        "seed": seed,
        "passed": passed,
        "reports": reports,
    });
    print!("{}", pretty(&out));
    Ok(if passed { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn load_plan(a: &PlanArgs, seed: u64) -> Result<ExperimentPlan> {
    let example: ExampleId = a.example.parse()?;
    let mut plan = match &a.plan {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing plan {}", path.display()))?
        }
        None => {
            let mut p = ExperimentPlan::defaults(example);
            p.master_seed = seed;
            p
        }
    };
    if let Some(n) = a.instances {
        plan.instances_per_cell = n;
    }
    if let Some(ns) = &a.n_values {
        plan.n_values = ns.clone();
    }
    if a.raw_coordinates {
        plan.raw_coordinates = true;
    }
    if let Some(beta) = a.beta {
        plan.ppa.beta_schedule = BetaSchedule::Constant { beta };
        plan.ppa.beta_lower = beta;
    }
    plan.validate()?;
    Ok(plan)
}

fn table(a: TableArgs, seed: u64) -> Result<u8> {
    let plan = load_plan(&a.plan, seed)?;
    let report = run_plan(&plan)?;
    let tables = emit_tables(&report);
    if let Some(path) = &a.csv {
        fs::write(path, &tables.csv).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &a.report {
        fs::write(path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{}", tables.text);
    Ok(EXIT_OK)
}

fn trace(a: TraceArgs, seed: u64) -> Result<u8> {
    let mut plan = load_plan(&a.plan, seed)?;
    if a.plan.instances.is_none() && a.plan.plan.is_none() {
        plan.instances_per_cell = 1;
    }
    let solvers: &[SolverKind] = match a.solver {
        TraceSolvers::Ppa => &[SolverKind::Ppa],
        TraceSolvers::Ssn => &[SolverKind::Ssn],
        TraceSolvers::Both => &[SolverKind::Ppa, SolverKind::Ssn],
    };
    let instances = generate_instances(&plan)?;
    let files = emit_traces(&plan, &instances, solvers)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    for (name, csv) in &files {
        let path = a.out_dir.join(name);
        fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(EXIT_OK)
}

fn bounds(a: BoundsArgs) -> Result<u8> {
    let strong = a.gamma > 0.0;
    let mut out = json!({
        "schema_version": SCHEMA_VERSION,
        "kappa": a.kappa,
        "gamma": a.gamma,
        "beta_lower": a.beta_lower,
        "eps": a.eps,
        "dist0": a.dist0,
    });
    if strong {
        out["rate"] = json!(theoretical_rate(a.kappa, a.gamma, a.beta_lower)?);
        out["iterations_distance"] = json!(iteration_bound_strong(a.eps, a.kappa, a.gamma, a.beta_lower, a.dist0)?);
        out["iterations_value_squared"] = json!(value_iteration_bound(
            a.eps,
            a.kappa,
            a.gamma,
            a.beta_lower,
            a.dist0,
            ValueBoundReading::Squared
        )?);
        out["iterations_value_displayed"] = json!(value_iteration_bound(
            a.eps,
            a.kappa,
            a.gamma,
            a.beta_lower,
            a.dist0,
            ValueBoundReading::Displayed
        )?);
    }
    out["iterations_value_sublinear"] =
        json!(iteration_bound_quasar(a.eps, BoundKind::Value, a.beta_lower, a.beta_upper, a.kappa, a.dist0)?);
    if let (Some(upper), Some(gap)) = (a.beta_upper, a.gap0) {
        out["iterations_step"] = json!(iteration_bound_quasar(a.eps, BoundKind::Step, a.beta_lower, Some(upper), a.kappa, gap)?);
    }
    print!("{}", pretty(&out));
    Ok(EXIT_OK)
}

fn instance(a: InstanceArgs, seed: u64) -> Result<u8> {
    let example: ExampleId = a.example.parse()?;
    let radial = radial_profile(example, a.q1, a.q2, a.q, a.k);
    let inst = Instance::from_seed(example, a.n_terms, radial, seed, a.raw_coordinates)?;
    let mut v = serde_json::to_value(&inst)?;
    v["schema_version"] = json!(SCHEMA_VERSION);
    write_or_print(a.out.as_deref(), &pretty(&v))?;
    Ok(EXIT_OK)
}
