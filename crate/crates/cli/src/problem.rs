//! Turns the function flags into an objective.

use anyhow::{bail, Context, Result};
use quasar_ppa::experiments::Instance;
use quasar_ppa::functions::{
    Ces, EuclidPower, ExampleId, Leontief, LpQuasiNorm, LpRegularizer, ProductFamily, Quadratic,
    RadialProfile,
};
use quasar_ppa::{BoxConstraint, Objective, Restricted};
use serde_json::{json, Value};

use crate::args::{FnArgs, FnKind};

pub struct Problem {
    pub objective: Box<dyn Objective>,
    /// Start stored in an instance file.
    pub instance_x0: Option<Vec<f64>>,
    /// Echo of the function settings for JSON outputs.
    pub description: Value,
}

pub fn radial_profile(example: ExampleId, q1: f64, q2: f64, q: f64, k: u32) -> RadialProfile {
    match example {
        ExampleId::Example1 => RadialProfile::Quadratic { q1, q2, k },
        ExampleId::Example2 => RadialProfile::Linear { q, k },
    }
}

/// Builds the objective. `hint` is the length of a point flag, used when
/// neither `--dim` nor the function itself fixes the dimension.
pub fn build(args: &FnArgs, hint: Option<usize>, seed: u64) -> Result<Problem> {
    if let Some(path) = &args.instance {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let inst = Instance::from_json(&text).with_context(|| format!("parsing instance {}", path.display()))?;
        let description = json!({ "instance": path.display().to_string(), "params": inst.params });
        let objective = restrict(Box::new(inst.objective()?), args)?;
        return Ok(Problem {
            objective,
            instance_x0: Some(inst.x0),
            description,
        });
    }
    let kind = args.function.context("either --fn or --instance is required")?;
    let dim = |fixed: Option<usize>| -> Result<usize> {
        let d = args.dim.or(fixed).or(hint).unwrap_or(2);
        if d == 0 {
            bail!("dimension must be positive");
        }
        Ok(d)
    };
    let coeffs = |d: usize| args.alphas.clone().unwrap_or_else(|| vec![1.0; d]);

    let (objective, description): (Box<dyn Objective>, Value) = match kind {
        FnKind::Quadratic => {
            let w = match &args.weights {
                Some(w) => w.clone(),
                None => vec![1.0; dim(None)?],
            };
            (Box::new(Quadratic::new(w.clone())?), json!({ "fn": "quadratic", "weights": w }))
        }
        FnKind::Euclid => {
            let d = dim(None)?;
            (
                Box::new(EuclidPower::new(d, args.alpha)?),
                json!({ "fn": "euclid", "dim": d, "alpha": args.alpha }),
            )
        }
        FnKind::Lp => {
            let d = dim(None)?;
            (Box::new(LpRegularizer::new(d, args.p)?), json!({ "fn": "lp", "dim": d, "p": args.p }))
        }
        FnKind::LpNorm => {
            let d = dim(None)?;
            (Box::new(LpQuasiNorm::new(d, args.p)?), json!({ "fn": "lp-norm", "dim": d, "p": args.p }))
        }
        FnKind::Ces => {
            let a = coeffs(dim(args.alphas.as_ref().map(Vec::len))?);
            (
                Box::new(Ces::new(a.clone(), args.ces_beta)?),
                json!({ "fn": "ces", "alphas": a, "beta": args.ces_beta }),
            )
        }
        FnKind::Leontief => {
            let a = coeffs(dim(args.alphas.as_ref().map(Vec::len))?);
            (
                Box::new(Leontief::new(a.clone(), args.alpha)?),
                json!({ "fn": "leontief", "alphas": a, "exponent": args.alpha }),
            )
        }
        FnKind::Ex1 | FnKind::Ex2 => {
            if let Some(d) = args.dim.filter(|d| *d != 2) {
                bail!("the random families are two-dimensional, got --dim {d}");
            }
            let example = if kind == FnKind::Ex1 { ExampleId::Example1 } else { ExampleId::Example2 };
            let radial = radial_profile(example, args.q1, args.q2, args.q, args.k);
            let inst = Instance::from_seed(example, args.n_terms, radial, seed, args.raw_coordinates)?;
            let description = json!({ "fn": example.to_string(), "params": inst.params });
            let f: Box<dyn Objective> = Box::new(ProductFamily::new(inst.params)?);
            return Ok(Problem {
                objective: restrict(f, args)?,
                instance_x0: Some(inst.x0),
                description,
            });
        }
    };
    let mut description = description;
    if let Some(c) = &args.cube {
        description["box"] = json!(c);
    }
    Ok(Problem {
        objective: restrict(objective, args)?,
        instance_x0: None,
        description,
    })
}

fn restrict(f: Box<dyn Objective>, args: &FnArgs) -> Result<Box<dyn Objective>> {
    let Some(c) = &args.cube else { return Ok(f) };
    let [lo, hi] = c.as_slice() else {
        bail!("--box takes two numbers LO,HI");
    };
    if f.domain().is_some() {
        bail!("--box cannot be combined with a function that already has a domain");
    }
    let cube = BoxConstraint::cube(f.dim(), *lo, *hi)?;
    Ok(Box::new(Restricted::new(f, cube)?))
}
