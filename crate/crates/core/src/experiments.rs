//! Seeded batch comparison of the proximal point method against plain
//! semismooth Newton on the random product families, aggregated into
//! success-count / median tables and per-run trace CSVs.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{ExampleId, ProductFamily, RadialProfile, RandomFamilyParams};
use crate::objective::Objective;
use crate::ppa::{run_ppa_tracked, PpaConfig};
use crate::prox::splitmix;
use crate::space::Vector;
use crate::ssn::{run_ssn_tracked, SsnConfig};
use crate::trace::{SolverKind, SolverTrace, Termination, SCHEMA_VERSION};

/// Starting points are uniform in `[-X0_RANGE, X0_RANGE]^2`.
pub const X0_RANGE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub example: ExampleId,
    pub n_values: Vec<usize>,
    pub instances_per_cell: usize,
    pub master_seed: u64,
    /// A run succeeds when its final value is below this.
    pub success_threshold: f64,
    pub radial: RadialProfile,
    #[serde(default)]
    pub raw_coordinates: bool,
    pub ppa: PpaConfig,
    pub ssn: SsnConfig,
}

impl ExperimentPlan {
    /// `N = 2, 5, 10, 20`, 50 instances per cell, thresholds `1e-6` and `1e-3`.
    pub fn defaults(example: ExampleId) -> Self {
        ExperimentPlan {
            example,
            n_values: vec![2, 5, 10, 20],
            instances_per_cell: 50,
            master_seed: 0,
            success_threshold: match example {
                ExampleId::Example1 => 1e-6,
                ExampleId::Example2 => 1e-3,
            },
            radial: RandomFamilyParams::default_radial(example),
            raw_coordinates: false,
            ppa: PpaConfig::default(),
            ssn: SsnConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.instances_per_cell == 0 {
            return Err(Error::param("instances_per_cell", "must be at least 1"));
        }
        if self.n_values.iter().any(|n| *n == 0) {
            return Err(Error::param("n_values", "every N must be positive"));
        }
        if !(self.success_threshold > 0.0) {
            return Err(Error::param("success_threshold", "must be positive"));
        }
        self.ppa.validate()?;
        self.ssn.validate()
    }
}

/// One random instance with its starting point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub index: usize,
    pub params: RandomFamilyParams,
    pub x0: Vec<f64>,
}

impl Instance {
    /// Coefficients and then `x0`, all from one ChaCha8 stream seeded with `seed`.
    pub fn from_seed(
        example: ExampleId,
        n_terms: usize,
        radial: RadialProfile,
        seed: u64,
        raw_coordinates: bool,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = RandomFamilyParams::draw_from(example, n_terms, radial, seed, &mut rng)?;
        params.raw_coordinates = raw_coordinates;
        let x0 = (0..2).map(|_| rng.gen_range(-X0_RANGE..=X0_RANGE)).collect();
        Ok(Instance { index: 0, params, x0 })
    }

    pub fn objective(&self) -> Result<ProductFamily> {
        ProductFamily::new(self.params.clone())
    }

    pub fn start(&self) -> Vector {
        Vector::from_row_slice(&self.x0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(text)?;
        inst.params.validate()?;
        if inst.x0.len() != 2 || inst.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("x0", "must hold two finite numbers"));
        }
        Ok(inst)
    }
}

/// Seed of instance `index` in cell `(example, n_terms)`. Each cell hashes to
/// its own stream, so cells never share seeds.
pub fn instance_seed(master_seed: u64, example: ExampleId, n_terms: usize, index: usize) -> u64 {
    let cell = splitmix(splitmix(master_seed ^ u64::from(example.number())) ^ n_terms as u64);
    splitmix(cell ^ splitmix(index as u64))
}

/// Instance `index` of a cell, drawn by [`Instance::from_seed`] with the
/// seed from [`instance_seed`].
pub fn make_instance(plan: &ExperimentPlan, n_terms: usize, index: usize) -> Result<Instance> {
    let seed = instance_seed(plan.master_seed, plan.example, n_terms, index);
    let mut inst = Instance::from_seed(plan.example, n_terms, plan.radial, seed, plan.raw_coordinates)?;
    inst.index = index;
    Ok(inst)
}

pub fn generate_cell(plan: &ExperimentPlan, n_terms: usize) -> Result<Vec<Instance>> {
    (0..plan.instances_per_cell)
        .map(|i| make_instance(plan, n_terms, i))
        .collect()
}

/// All instances of the plan, cell by cell in `n_values` order.
pub fn generate_instances(plan: &ExperimentPlan) -> Result<Vec<Instance>> {
    plan.validate()?;
    let mut out = Vec::new();
    for &n in &plan.n_values {
        out.extend(generate_cell(plan, n)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// NaN for diverged or failed runs.
    pub final_value: f64,
    pub success: bool,
    pub iterations: usize,
    pub terminated_by: Option<Termination>,
    /// Set when the solver returned an error instead of a trace.
    pub error: Option<String>,
}

impl RunRecord {
    fn from_outcome(outcome: Result<SolverTrace>, threshold: f64) -> Self {
        match outcome {
            Ok(t) => {
                let v = t.final_value();
                RunRecord {
                    final_value: v,
                    success: v < threshold,
                    iterations: t.steps(),
                    terminated_by: Some(t.terminated_by),
                    error: None,
                }
            }
            Err(e) => RunRecord {
                final_value: f64::NAN,
                success: false,
                iterations: 0,
                terminated_by: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub index: usize,
    pub seed: u64,
    pub x0: Vec<f64>,
    pub ppa: RunRecord,
    pub ssn: RunRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub success_count: usize,
    /// `None` when fewer than half of the runs ended with a finite value.
    pub median_final_value: Option<f64>,
}

impl SolverSummary {
    fn from_runs<'a>(runs: impl Iterator<Item = &'a RunRecord>) -> Self {
        let runs: Vec<_> = runs.collect();
        let mut finite: Vec<f64> = runs.iter().map(|r| r.final_value).filter(|v| v.is_finite()).collect();
        let success_count = runs.iter().filter(|r| r.success).count();
        let median_final_value = if 2 * finite.len() < runs.len() || finite.is_empty() {
            None
        } else {
            finite.sort_by(f64::total_cmp);
            let m = finite.len() / 2;
            Some(if finite.len() % 2 == 1 {
                finite[m]
            } else {
                0.5 * (finite[m - 1] + finite[m])
            })
        };
        SolverSummary {
            success_count,
            median_final_value,
        }
    }

    /// `"count / median"` with the median in `{:.2e}` form or `NaN`.
    pub fn cell_text(&self) -> String {
        match self.median_final_value {
            Some(m) => format!("{} / {:.2e}", self.success_count, m),
            None => format!("{} / NaN", self.success_count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub n_terms: usize,
    pub ppa: SolverSummary,
    pub ssn: SolverSummary,
    pub records: Vec<InstanceRecord>,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub schema_version: u32,
    pub plan: ExperimentPlan,
    pub cells: Vec<CellReport>,
}

impl BatchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs both solvers from the shared `x0` of every instance of one cell.
/// Instances run in parallel; records come back in instance order.
pub fn run_cell(plan: &ExperimentPlan, n_terms: usize) -> Result<CellReport> {
    plan.validate()?;
    let started = Instant::now();
    let instances = generate_cell(plan, n_terms)?;
    let records: Vec<InstanceRecord> = instances
        .par_iter()
        .map(|inst| run_instance(plan, inst))
        .collect::<Result<_>>()?;
    Ok(CellReport {
        n_terms,
        ppa: SolverSummary::from_runs(records.iter().map(|r| &r.ppa)),
        ssn: SolverSummary::from_runs(records.iter().map(|r| &r.ssn)),
        records,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

fn run_instance(plan: &ExperimentPlan, inst: &Instance) -> Result<InstanceRecord> {
    let f = inst.objective()?;
    let x0 = inst.start();
    let xbar = f.certificate().xbar();
    let ppa = run_ppa_tracked(&f, &x0, &plan.ppa, Some(&xbar));
    let ssn = run_ssn_tracked(&f, &x0, &plan.ssn, Some(&xbar));
    Ok(InstanceRecord {
        index: inst.index,
        seed: inst.params.seed,
        x0: inst.x0.clone(),
        ppa: RunRecord::from_outcome(ppa, plan.success_threshold),
        ssn: RunRecord::from_outcome(ssn, plan.success_threshold),
    })
}

/// Runs every cell of the plan.
pub fn run_plan(plan: &ExperimentPlan) -> Result<BatchReport> {
    let cells = plan
        .n_values
        .iter()
        .map(|&n| run_cell(plan, n))
        .collect::<Result<_>>()?;
    Ok(BatchReport {
        schema_version: SCHEMA_VERSION,
        plan: plan.clone(),
        cells,
    })
}

/// Rendered comparison table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableArtifacts {
    pub text: String,
    pub csv: String,
}

/// One row per solver, one `"count / median"` column per `N`. Wall times are
/// left out so the output is identical across reruns.
pub fn emit_tables(report: &BatchReport) -> TableArtifacts {
    let plan = &report.plan;
    let header = format!(
        "# quasar-ppa table schema={} example={} instances={} threshold={:e} master_seed={}",
        report.schema_version, plan.example, plan.instances_per_cell, plan.success_threshold, plan.master_seed
    );
    let labels: Vec<String> = report.cells.iter().map(|c| format!("N={}", c.n_terms)).collect();

    let mut csv = format!("{header}\nsolver");
    for l in &labels {
        csv.push(',');
        csv.push_str(l);
    }
    csv.push('\n');

    let width = 16;
    let mut text = format!("{header}\n{:<8}", "solver");
    for l in &labels {
        let _ = write!(text, "{l:<width$}");
    }
    text = text.trim_end().to_string();
    text.push('\n');

    if !report.cells.is_empty() {
        for (name, pick) in [("PPA", SolverKind::Ppa), ("SSN", SolverKind::Ssn)] {
            let cells: Vec<String> = report
                .cells
                .iter()
                .map(|c| match pick {
                    SolverKind::Ppa => c.ppa.cell_text(),
                    SolverKind::Ssn => c.ssn.cell_text(),
                })
                .collect();
            csv.push_str(name);
            let mut line = format!("{name:<8}");
            for c in &cells {
                csv.push(',');
                csv.push_str(c);
                let _ = write!(line, "{c:<width$}");
            }
            csv.push('\n');
            text.push_str(line.trim_end());
            text.push('\n');
        }
    }
    TableArtifacts { text, csv }
}

/// Re-runs the chosen solvers on the given instances and returns
/// `(file name, trace CSV)` pairs, for example `example1_n2_i0_ppa.csv`.
pub fn emit_traces(
    plan: &ExperimentPlan,
    instances: &[Instance],
    solvers: &[SolverKind],
) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for inst in instances {
        let f = inst.objective()?;
        let x0 = inst.start();
        let xbar = f.certificate().xbar();
        for &s in solvers {
            let trace = match s {
                SolverKind::Ppa => run_ppa_tracked(&f, &x0, &plan.ppa, Some(&xbar))?,
                SolverKind::Ssn => run_ssn_tracked(&f, &x0, &plan.ssn, Some(&xbar))?,
            };
            let name = format!(
                "{}_n{}_i{}_{}.csv",
                inst.params.example,
                inst.params.n_terms,
                inst.index,
                s.as_str()
            );
            out.push((name, trace.to_csv_string()));
        }
    }
    Ok(out)
}

/// Final value of `f` along a trace, for callers holding only the objective.
pub fn final_value<F: Objective + ?Sized>(f: &F, trace: &SolverTrace) -> f64 {
    if trace.terminated_by == Termination::Diverged {
        f64::NAN
    } else {
        f.value(trace.final_point())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_plan(example: ExampleId) -> ExperimentPlan {
        ExperimentPlan {
            n_values: vec![2, 5],
            instances_per_cell: 4,
            master_seed: 11,
            ..ExperimentPlan::defaults(example)
        }
    }

    #[test]
    fn instances_are_reproducible_and_sized() {
        let plan = small_plan(ExampleId::Example1);
        let a = generate_instances(&plan).unwrap();
        let b = generate_instances(&plan).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        assert!(a[..4].iter().all(|i| i.params.n_terms == 2 && i.params.a.len() == 2));
        assert!(a.iter().all(|i| i.x0.iter().all(|v| v.abs() <= X0_RANGE)));
    }

    #[test]
    fn cells_use_disjoint_seeds() {
        let plan = ExperimentPlan {
            instances_per_cell: 200,
            ..small_plan(ExampleId::Example2)
        };
        let mut seeds: Vec<u64> = generate_instances(&plan).unwrap().iter().map(|i| i.params.seed).collect();
        let n = seeds.len();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), n);
        assert_ne!(
            instance_seed(0, ExampleId::Example1, 2, 0),
            instance_seed(0, ExampleId::Example2, 2, 0)
        );
    }

    #[test]
    fn median_follows_nan_rule() {
        let run = |v: f64| RunRecord {
            final_value: v,
            success: v < 1e-3,
            iterations: 0,
            terminated_by: None,
            error: None,
        };
        let runs = [run(1.0), run(f64::NAN), run(f64::NAN), run(3.0)];
        assert_eq!(SolverSummary::from_runs(runs.iter()).median_final_value, Some(2.0));
        let runs = [run(1.0), run(f64::NAN), run(f64::NAN)];
        let s = SolverSummary::from_runs(runs.iter());
        assert_eq!(s.median_final_value, None);
        assert_eq!(s.cell_text(), "0 / NaN");
    }

    #[test]
    fn empty_report_gives_header_only_tables() {
        let report = BatchReport {
            schema_version: SCHEMA_VERSION,
            plan: small_plan(ExampleId::Example1),
            cells: vec![],
        };
        let t = emit_tables(&report);
        assert_eq!(t.csv.lines().count(), 2);
        assert_eq!(t.text.lines().count(), 2);
    }

    #[test]
    fn instance_json_roundtrip() {
        let inst = make_instance(&small_plan(ExampleId::Example1), 3, 1).unwrap();
        assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
    }
}
