//! Iterate histories recorded by the outer solvers, with CSV export.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::space::Vector;

/// Version tag written into every exported artifact.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Step length fell to the outer tolerance.
    StepTol,
    MaxIter,
    /// The new iterate equals the old one exactly.
    FixedPoint,
    /// The Clarke element norm fell to the tolerance (SSN only).
    Stationary,
    /// Iterates or residuals blew past the overflow guard.
    Diverged,
    /// A prox subproblem could not be solved; the run stopped there.
    InnerFailure,
    /// No descent direction was accepted by the line search.
    Stalled,
}

impl Termination {
    /// Whether the run stopped because its own convergence test fired.
    pub fn is_converged(self) -> bool {
        matches!(self, Termination::StepTol | Termination::FixedPoint | Termination::Stationary)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Termination::StepTol => "step_tol",
            Termination::MaxIter => "max_iter",
            Termination::FixedPoint => "fixed_point",
            Termination::Stationary => "stationary",
            Termination::Diverged => "diverged",
            Termination::InnerFailure => "inner_failure",
            Termination::Stalled => "stalled",
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Ppa,
    Ssn,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Ppa => "ppa",
            SolverKind::Ssn => "ssn",
        }
    }
}

/// Per-outer-step inner solver statistics.
///
/// For PPA, `iterations` sums Newton iterations over all starts and
/// `residual` is the residual of the selected prox point. For SSN,
/// `iterations` counts line-search backtracks and `residual` is `|G(x)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerStats {
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub solver: SolverKind,
    /// `x^0, x^1, ...`
    pub iterates: Vec<Vector>,
    /// `h(x^k)`, same length as `iterates`.
    pub values: Vec<f64>,
    /// `|x^{k+1} - x^k|`, one shorter than `iterates`.
    pub step_norms: Vec<f64>,
    /// `|x^k - xbar|` when a reference point was supplied.
    pub distances_to_ref: Option<Vec<f64>>,
    /// One entry per step.
    pub inner_stats: Vec<InnerStats>,
    pub terminated_by: Termination,
}

impl SolverTrace {
    pub(crate) fn start(solver: SolverKind, x0: Vector, value: f64, reference: Option<&Vector>) -> Self {
        let distances_to_ref = reference.map(|r| vec![(&x0 - r).norm()]);
        SolverTrace {
            solver,
            iterates: vec![x0],
            values: vec![value],
            step_norms: Vec::new(),
            distances_to_ref,
            inner_stats: Vec::new(),
            terminated_by: Termination::MaxIter,
        }
    }

    pub(crate) fn push(&mut self, x: Vector, value: f64, stats: InnerStats, reference: Option<&Vector>) {
        let prev = self.iterates.last().expect("trace starts with x0");
        self.step_norms.push((&x - prev).norm());
        if let (Some(d), Some(r)) = (self.distances_to_ref.as_mut(), reference) {
            d.push((&x - r).norm());
        }
        self.iterates.push(x);
        self.values.push(value);
        self.inner_stats.push(stats);
    }

    /// Number of steps taken.
    pub fn steps(&self) -> usize {
        self.step_norms.len()
    }

    pub fn final_point(&self) -> &Vector {
        self.iterates.last().expect("trace is never empty")
    }

    /// Final objective value; NaN for diverged runs.
    pub fn final_value(&self) -> f64 {
        if self.terminated_by == Termination::Diverged {
            return f64::NAN;
        }
        *self.values.last().expect("trace is never empty")
    }

    /// Writes one row per iterate:
    /// `k,value,norm,step_norm,dist_to_ref,inner_iters,inner_residual`.
    ///
    /// Row `k` carries the step into `x^k` and its inner statistics, so the
    /// row for `k = 0` leaves those columns empty, as it does `dist_to_ref`
    /// when no reference was given. The first line is a `#` comment with the
    /// schema version, solver and termination reason.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "# quasar-ppa trace schema={} solver={} terminated_by={}",
            SCHEMA_VERSION,
            self.solver.as_str(),
            self.terminated_by
        )?;
        writeln!(w, "k,value,norm,step_norm,dist_to_ref,inner_iters,inner_residual")?;
        for (k, (x, v)) in self.iterates.iter().zip(&self.values).enumerate() {
            let dist = self
                .distances_to_ref
                .as_ref()
                .map(|d| format!("{:e}", d[k]))
                .unwrap_or_default();
            let (step, iters, res) = if k == 0 {
                (String::new(), String::new(), String::new())
            } else {
                let s = self.inner_stats[k - 1];
                (
                    format!("{:e}", self.step_norms[k - 1]),
                    s.iterations.to_string(),
                    format!("{:e}", s.residual),
                )
            };
            writeln!(w, "{k},{v:e},{:e},{step},{dist},{iters},{res}", x.norm())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ASCII")
    }
}
