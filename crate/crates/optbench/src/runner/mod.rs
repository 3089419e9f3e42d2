//! Experiment orchestration: expands (problem x start x solver x repeat),
//! enforces the fixed-target / fixed-cost protocol, measures time, and
//! persists per-run records.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::problems::{Problem, StartingPointSet, TestSet};
use crate::seeding;
use crate::solvers::{
    run_solver, EvalCounter, IterateTrace, Oracle, SolverConfig, SolverStatus,
};

mod audit;

pub use audit::{
    audit_shift_invariance, audit_shift_invariance_with, ShiftAudit, SolverFn,
    DEFAULT_AUDIT_TOLERANCE,
};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("plan validation: {0}")]
    InvalidPlan(String),
    #[error("fixed-target mode requires a known f_star for every problem; `{problem}` has none")]
    MissingSolution { problem: String },
    #[error("shift audit requires a deterministic solver; `{solver}` is not")]
    NonDeterministicAudit { solver: String },
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("results csv {path}, row {row}: {message}")]
    Csv {
        path: String,
        row: usize,
        message: String,
    },
    #[error(transparent)]
    Problem(#[from] crate::problems::ProblemError),
    #[error(transparent)]
    Solver(#[from] crate::solvers::SolverError),
}

/// Evaluation protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Stop at the first evaluation with `f_best - f_star <= epsilon_target`,
    /// or at `safety_budget` evaluations (counted unsuccessful).
    FixedTarget {
        epsilon_target: f64,
        safety_budget: u64,
    },
    /// Stop at exactly `budget` fundamental evaluations.
    FixedCost { budget: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimingMode {
    /// Runs execute serially; timing fields are comparable.
    Strict,
    /// Runs execute in parallel; timing fields are marked non-comparable.
    Throughput,
}

/// A fully resolved experiment: everything needed to reproduce the run.
#[derive(Clone)]
pub struct ExperimentPlan {
    pub test_set: TestSet,
    pub solvers: Vec<SolverConfig>,
    pub mode: Mode,
    pub repeats: u32,
    pub starting_points: BTreeMap<String, StartingPointSet>,
    pub master_seed: u64,
    pub timing_mode: TimingMode,
    pub capture_traces: bool,
}

/// Serializable digest of a plan; the fingerprint hashes this.
#[derive(Serialize)]
struct PlanSummary<'a> {
    test_set: &'a str,
    problem_ids: Vec<&'a str>,
    solvers: &'a [SolverConfig],
    mode: Mode,
    repeats: u32,
    starting_points: &'a BTreeMap<String, StartingPointSet>,
    master_seed: u64,
    timing_mode: TimingMode,
    capture_traces: bool,
}

impl ExperimentPlan {
    fn summary(&self) -> PlanSummary<'_> {
        PlanSummary {
            test_set: &self.test_set.id,
            problem_ids: self.test_set.problems.iter().map(|p| p.id.as_str()).collect(),
            solvers: &self.solvers,
            mode: self.mode,
            repeats: self.repeats,
            starting_points: &self.starting_points,
            master_seed: self.master_seed,
            timing_mode: self.timing_mode,
            capture_traces: self.capture_traces,
        }
    }

    /// SHA-256 over the serialized plan.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(&self.summary()).expect("plan serializes");
        let mut hasher = Sha256::new();
        hasher.update(&json);
        format!("{:x}", hasher.finalize())
    }

    pub fn validate(&self) -> Result<Vec<String>, RunnerError> {
        let mut warnings = Vec::new();
        if self.repeats == 0 {
            return Err(RunnerError::InvalidPlan("repeats must be >= 1".into()));
        }
        if self.solvers.is_empty() {
            return Err(RunnerError::InvalidPlan("no solvers configured".into()));
        }
        for p in &self.test_set.problems {
            let sp = self.starting_points.get(&p.id).ok_or_else(|| {
                RunnerError::InvalidPlan(format!("problem `{}` has no starting points", p.id))
            })?;
            if sp.points.is_empty() {
                return Err(RunnerError::InvalidPlan(format!(
                    "problem `{}` has an empty starting-point set",
                    p.id
                )));
            }
            if let Mode::FixedTarget { .. } = self.mode {
                if p.f_star.is_none() {
                    return Err(RunnerError::MissingSolution {
                        problem: p.id.clone(),
                    });
                }
            }
        }
        let has_nondeterministic = self.solvers.iter().any(|s| !s.deterministic);
        if has_nondeterministic && self.repeats == 1 {
            warnings.push(
                "non-deterministic solvers present with repeats = 1; \
                 results may be skewed by a single lucky run"
                    .to_string(),
            );
        }
        if self.test_set.small_set_warning() {
            warnings.push(format!(
                "test set `{}` has fewer than 20 problems; treat results as a case study",
                self.test_set.id
            ));
        }
        Ok(warnings)
    }
}

/// Final status of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    BudgetExhausted,
    SolverFailure,
    EvalError,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::BudgetExhausted => "budget_exhausted",
            RunStatus::SolverFailure => "solver_failure",
            RunStatus::EvalError => "eval_error",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "converged" => Some(RunStatus::Converged),
            "budget_exhausted" => Some(RunStatus::BudgetExhausted),
            "solver_failure" => Some(RunStatus::SolverFailure),
            "eval_error" => Some(RunStatus::EvalError),
            _ => None,
        }
    }
}

/// One solver x problem x start x repeat execution.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub problem_id: String,
    pub solver_id: String,
    pub start_id: String,
    pub repeat_index: u32,
    pub seed: u64,
    pub status: RunStatus,
    pub n: usize,
    pub counters: EvalCounter,
    pub iterations: u64,
    pub cpu_time_s: Option<f64>,
    pub wall_time_s: f64,
    pub f_start: f64,
    pub f_best: f64,
    pub x_best: Vec<f64>,
    pub f_star: Option<f64>,
    pub violation: Vec<f64>,
    pub trace: Option<IterateTrace>,
    pub solver_parameters: BTreeMap<String, f64>,
}

impl RunRecord {
    /// Sum of positive constraint parts at the terminal point.
    pub fn viol_sum(&self) -> f64 {
        self.violation.iter().map(|g| g.max(0.0)).sum()
    }

    /// Stable key naming this run's history files.
    pub fn run_key(&self) -> String {
        sanitize(&format!(
            "{}__{}__{}__r{}",
            self.problem_id, self.start_id, self.solver_id, self.repeat_index
        ))
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Computational-environment capture; best effort, never fatal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvironmentInfo {
    pub os: String,
    pub cpu_model: Option<String>,
    pub core_count: Option<usize>,
    pub timestamp: String,
}

impl EnvironmentInfo {
    pub fn capture() -> Self {
        let cpu_model = std::fs::read_to_string("/proc/cpuinfo")
            .ok()
            .and_then(|s| {
                s.lines()
                    .find(|l| l.starts_with("model name"))
                    .and_then(|l| l.split(':').nth(1))
                    .map(|v| v.trim().to_string())
            });
        Self {
            os: std::env::consts::OS.to_string(),
            cpu_model,
            core_count: std::thread::available_parallelism().ok().map(|n| n.get()),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }
}

/// The complete set of run records for an experiment; the unit of persistence
/// and of all analysis.
#[derive(Debug, Clone)]
pub struct ResultsTable {
    pub fingerprint: String,
    pub timing_mode: TimingMode,
    pub mode: Mode,
    pub records: Vec<RunRecord>,
    pub environment: EnvironmentInfo,
    pub warnings: Vec<String>,
}

/// Thread CPU time in seconds, when the clock is available.
fn thread_cpu_time_s() -> Option<f64> {
    let mut ts = libc::timespec {
        tv_sec: 0,
        tv_nsec: 0,
    };
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    if rc == 0 {
        Some(ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9)
    } else {
        None
    }
}

struct RunSpec<'a> {
    problem: &'a Problem,
    solver: &'a SolverConfig,
    start_id: String,
    x0: Vec<f64>,
    repeat_index: u32,
}

fn execute_run(spec: &RunSpec, plan: &ExperimentPlan) -> RunRecord {
    let problem = spec.problem;
    let seed = seeding::run_seed(
        plan.master_seed,
        &problem.id,
        &spec.solver.id,
        &spec.start_id,
        spec.repeat_index,
    );
    let budget = match plan.mode {
        Mode::FixedTarget { safety_budget, .. } => safety_budget,
        Mode::FixedCost { budget } => budget,
    };
    let mut oracle = Oracle::new(problem).with_budget(budget);
    if let Mode::FixedTarget { epsilon_target, .. } = plan.mode {
        oracle = oracle.with_target(problem.f_star.expect("validated"), epsilon_target);
    }
    if plan.capture_traces {
        oracle = oracle.with_trace();
    }

    let f_start = problem.objective(&spec.x0);

    let cpu0 = thread_cpu_time_s();
    let wall0 = Instant::now();
    let outcome = run_solver(&mut oracle, &spec.x0, spec.solver, seed);
    let wall_time_s = wall0.elapsed().as_secs_f64();
    let cpu_time_s = match (cpu0, thread_cpu_time_s()) {
        (Some(a), Some(b)) => Some(b - a),
        _ => None,
    };

    let status = match (&outcome, plan.mode) {
        (Err(_), _) => RunStatus::SolverFailure,
        (Ok(run), mode) => match run.status {
            SolverStatus::TargetReached => RunStatus::Converged,
            SolverStatus::Failure => RunStatus::SolverFailure,
            SolverStatus::EvalError => RunStatus::EvalError,
            SolverStatus::BudgetExhausted | SolverStatus::StepConverged => {
                // In fixed-cost mode there is no notion of convergence;
                // any completed run is budget_exhausted by protocol.
                let _ = mode;
                RunStatus::BudgetExhausted
            }
        },
    };
    let iterations = outcome.as_ref().map(|r| r.iterations).unwrap_or(0);

    let (x_best, f_best) = match oracle.best() {
        Some((x, f)) => (x.to_vec(), f),
        None => (spec.x0.clone(), f_start),
    };
    let violation = problem.constraint_values(&x_best);
    let trace = oracle.take_trace();

    RunRecord {
        problem_id: problem.id.clone(),
        solver_id: spec.solver.id.clone(),
        start_id: spec.start_id.clone(),
        repeat_index: spec.repeat_index,
        seed,
        status,
        n: problem.n,
        counters: oracle.counter(),
        iterations,
        cpu_time_s,
        wall_time_s,
        f_start,
        f_best,
        x_best,
        f_star: problem.f_star,
        violation,
        trace,
        solver_parameters: spec.solver.parameters.clone(),
    }
}

/// Runs the whole experiment: one record per (problem, start, solver,
/// repeat). Solver failures become records, never crashes. Records are
/// sorted by (problem_id, start_id, solver_id, repeat_index).
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ResultsTable, RunnerError> {
    let warnings = plan.validate()?;

    let mut specs = Vec::new();
    for problem in &plan.test_set.problems {
        let sps = &plan.starting_points[&problem.id];
        for sp in &sps.points {
            for solver in &plan.solvers {
                for repeat_index in 0..plan.repeats {
                    specs.push(RunSpec {
                        problem,
                        solver,
                        start_id: sp.id.clone(),
                        x0: sp.x.clone(),
                        repeat_index,
                    });
                }
            }
        }
    }

    let mut records: Vec<RunRecord> = match plan.timing_mode {
        TimingMode::Strict => specs.iter().map(|s| execute_run(s, plan)).collect(),
        TimingMode::Throughput => specs.par_iter().map(|s| execute_run(s, plan)).collect(),
    };
    records.sort_by(|a, b| {
        (&a.problem_id, &a.start_id, &a.solver_id, a.repeat_index).cmp(&(
            &b.problem_id,
            &b.start_id,
            &b.solver_id,
            b.repeat_index,
        ))
    });

    Ok(ResultsTable {
        fingerprint: plan.fingerprint(),
        timing_mode: plan.timing_mode,
        mode: plan.mode,
        records,
        environment: EnvironmentInfo::capture(),
        warnings,
    })
}

// ---------------------------------------------------------------------------
// Repeat aggregation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepeatAggregation {
    /// Each (problem, start, repeat) becomes a distinct analysis problem.
    Expand,
    /// Mean and sample standard deviation per (problem, solver).
    MeanStd,
}

/// One expanded analysis problem: a run keyed by (problem, start, repeat).
#[derive(Debug, Clone)]
pub struct ExpandedRun<'a> {
    pub analysis_problem: String,
    pub record: &'a RunRecord,
}

/// Per (problem, solver) summary statistics over starts and repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanStdRow {
    pub problem_id: String,
    pub solver_id: String,
    pub count: usize,
    pub f_best_mean: f64,
    pub f_best_std: f64,
    pub n_feval_mean: f64,
    pub n_feval_std: f64,
    pub cpu_time_mean: Option<f64>,
    pub wall_time_mean: f64,
}

#[derive(Debug, Clone)]
pub enum AggregatedView<'a> {
    Expanded(Vec<ExpandedRun<'a>>),
    MeanStd(Vec<MeanStdRow>),
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

pub fn aggregate_repeats(table: &ResultsTable, method: RepeatAggregation) -> AggregatedView<'_> {
    match method {
        RepeatAggregation::Expand => AggregatedView::Expanded(
            table
                .records
                .iter()
                .map(|r| ExpandedRun {
                    analysis_problem: format!("{}__{}__r{}", r.problem_id, r.start_id, r.repeat_index),
                    record: r,
                })
                .collect(),
        ),
        RepeatAggregation::MeanStd => {
            let mut groups: BTreeMap<(String, String), Vec<&RunRecord>> = BTreeMap::new();
            for r in &table.records {
                groups
                    .entry((r.problem_id.clone(), r.solver_id.clone()))
                    .or_default()
                    .push(r);
            }
            let rows = groups
                .into_iter()
                .map(|((problem_id, solver_id), rs)| {
                    let f_best: Vec<f64> = rs.iter().map(|r| r.f_best).collect();
                    let n_feval: Vec<f64> = rs.iter().map(|r| r.counters.n_feval as f64).collect();
                    let cpu: Option<Vec<f64>> = rs.iter().map(|r| r.cpu_time_s).collect();
                    let wall: Vec<f64> = rs.iter().map(|r| r.wall_time_s).collect();
                    let (f_mean, f_std) = mean_std(&f_best);
                    let (e_mean, e_std) = mean_std(&n_feval);
                    MeanStdRow {
                        problem_id,
                        solver_id,
                        count: rs.len(),
                        f_best_mean: f_mean,
                        f_best_std: f_std,
                        n_feval_mean: e_mean,
                        n_feval_std: e_std,
                        cpu_time_mean: cpu.map(|c| mean_std(&c).0),
                        wall_time_mean: mean_std(&wall).0,
                    }
                })
                .collect();
            AggregatedView::MeanStd(rows)
        }
    }
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

pub const RESULTS_HEADER: &str = "problem_id,solver_id,start_id,repeat_index,seed,status,n,\
n_feval,n_geval,n_ceval,cpu_time_s,wall_time_s,f_start,f_best,f_star,viol_sum,x_best";

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{v:.16e}")
    }
}

fn record_to_csv_row(r: &RunRecord) -> String {
    let x_best = r
        .x_best
        .iter()
        .map(|v| fmt_f64(*v))
        .collect::<Vec<_>>()
        .join(";");
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.problem_id,
        r.solver_id,
        r.start_id,
        r.repeat_index,
        r.seed,
        r.status.as_str(),
        r.n,
        r.counters.n_feval,
        r.counters.n_geval,
        r.counters.n_ceval,
        r.cpu_time_s.map(fmt_f64).unwrap_or_default(),
        fmt_f64(r.wall_time_s),
        fmt_f64(r.f_start),
        fmt_f64(r.f_best),
        r.f_star.map(fmt_f64).unwrap_or_default(),
        fmt_f64(r.viol_sum()),
        x_best
    )
}

fn io_err(path: &Path, source: std::io::Error) -> RunnerError {
    RunnerError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `results.csv` with one row per record.
pub fn write_results_csv(table: &ResultsTable, path: &Path) -> Result<(), RunnerError> {
    let mut out = String::with_capacity(table.records.len() * 128);
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for r in &table.records {
        out.push_str(&record_to_csv_row(r));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Writes per-run best-so-far histories (`eval_index,f_best_so_far`) and,
/// for 2-D problems, iterate coordinates (`eval_index,x0,x1`) used by
/// trajectory plots.
pub fn write_histories(table: &ResultsTable, dir: &Path) -> Result<(), RunnerError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for r in &table.records {
        let Some(trace) = &r.trace else { continue };
        let path = dir.join(format!("{}.csv", r.run_key()));
        let mut out = String::from("eval_index,f_best_so_far\n");
        for e in &trace.entries {
            out.push_str(&format!("{},{}\n", e.eval_index, fmt_f64(e.f_best)));
        }
        std::fs::write(&path, out).map_err(|e| io_err(&path, e))?;
        if r.n == 2 {
            let path = dir.join(format!("{}.traj.csv", r.run_key()));
            let mut out = String::from("eval_index,x0,x1\n");
            for e in &trace.entries {
                out.push_str(&format!(
                    "{},{},{}\n",
                    e.eval_index,
                    fmt_f64(e.x[0]),
                    fmt_f64(e.x[1])
                ));
            }
            std::fs::write(&path, out).map_err(|e| io_err(&path, e))?;
        }
    }
    Ok(())
}

/// A results row parsed back from `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub problem_id: String,
    pub solver_id: String,
    pub start_id: String,
    pub repeat_index: u32,
    pub seed: u64,
    pub status: RunStatus,
    pub n: usize,
    pub n_feval: u64,
    pub n_geval: u64,
    pub n_ceval: u64,
    pub cpu_time_s: Option<f64>,
    pub wall_time_s: f64,
    pub f_start: f64,
    pub f_best: f64,
    pub f_star: Option<f64>,
    pub viol_sum: f64,
    pub x_best: Vec<f64>,
}

impl CsvRecord {
    pub fn run_key(&self) -> String {
        sanitize(&format!(
            "{}__{}__{}__r{}",
            self.problem_id, self.start_id, self.solver_id, self.repeat_index
        ))
    }
}

pub fn read_results_csv(path: &Path) -> Result<Vec<CsvRecord>, RunnerError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let path_str = path.display().to_string();
    let mut lines = text.lines().enumerate();
    let csv_err = |row: usize, message: String| RunnerError::Csv {
        path: path_str.clone(),
        row,
        message,
    };
    match lines.next() {
        Some((_, header)) if header == RESULTS_HEADER => {}
        _ => return Err(csv_err(1, "missing or malformed header".into())),
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let row = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 17 {
            return Err(csv_err(row, format!("expected 17 fields, got {}", fields.len())));
        }
        let parse_f = |s: &str, name: &str| -> Result<f64, RunnerError> {
            if s == "inf" {
                return Ok(f64::INFINITY);
            }
            if s == "-inf" {
                return Ok(f64::NEG_INFINITY);
            }
            s.parse::<f64>()
                .map_err(|_| csv_err(row, format!("bad {name}: `{s}`")))
        };
        let opt_f = |s: &str, name: &str| -> Result<Option<f64>, RunnerError> {
            if s.is_empty() {
                Ok(None)
            } else {
                parse_f(s, name).map(Some)
            }
        };
        let x_best = if fields[16].is_empty() {
            Vec::new()
        } else {
            fields[16]
                .split(';')
                .map(|s| parse_f(s, "x_best"))
                .collect::<Result<Vec<f64>, _>>()?
        };
        records.push(CsvRecord {
            problem_id: fields[0].to_string(),
            solver_id: fields[1].to_string(),
            start_id: fields[2].to_string(),
            repeat_index: fields[3]
                .parse()
                .map_err(|_| csv_err(row, format!("bad repeat_index: `{}`", fields[3])))?,
            seed: fields[4]
                .parse()
                .map_err(|_| csv_err(row, format!("bad seed: `{}`", fields[4])))?,
            status: RunStatus::parse(fields[5])
                .ok_or_else(|| csv_err(row, format!("bad status: `{}`", fields[5])))?,
            n: fields[6]
                .parse()
                .map_err(|_| csv_err(row, format!("bad n: `{}`", fields[6])))?,
            n_feval: fields[7]
                .parse()
                .map_err(|_| csv_err(row, format!("bad n_feval: `{}`", fields[7])))?,
            n_geval: fields[8]
                .parse()
                .map_err(|_| csv_err(row, format!("bad n_geval: `{}`", fields[8])))?,
            n_ceval: fields[9]
                .parse()
                .map_err(|_| csv_err(row, format!("bad n_ceval: `{}`", fields[9])))?,
            cpu_time_s: opt_f(fields[10], "cpu_time_s")?,
            wall_time_s: parse_f(fields[11], "wall_time_s")?,
            f_start: parse_f(fields[12], "f_start")?,
            f_best: parse_f(fields[13], "f_best")?,
            f_star: opt_f(fields[14], "f_star")?,
            viol_sum: parse_f(fields[15], "viol_sum")?,
            x_best,
        });
    }
    Ok(records)
}

/// Writes a file atomically (temp file + rename).
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), RunnerError> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(contents).map_err(|e| io_err(&tmp, e))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{builtin_suite, perturb_starting_points};
    use crate::solvers::default_config;

    fn small_plan(mode: Mode, timing_mode: TimingMode, repeats: u32) -> ExperimentPlan {
        let test_set = builtin_suite("beale-rosenbrock").unwrap();
        let mut starting_points = BTreeMap::new();
        for p in &test_set.problems {
            starting_points.insert(
                p.id.clone(),
                perturb_starting_points(p, 0.0, 1, seeding::starting_point_seed(42, &p.id)),
            );
        }
        ExperimentPlan {
            test_set,
            solvers: vec![
                default_config("compass").unwrap(),
                default_config("nelder-mead").unwrap(),
                default_config("random-search").unwrap(),
            ],
            mode,
            repeats,
            starting_points,
            master_seed: 42,
            timing_mode,
            capture_traces: false,
        }
    }

    #[test]
    fn cartesian_record_count() {
        let plan = small_plan(Mode::FixedCost { budget: 50 }, TimingMode::Strict, 2);
        let table = run_experiment(&plan).unwrap();
        // 2 problems x 1 start x 3 solvers x 2 repeats
        assert_eq!(table.records.len(), 12);
    }

    #[test]
    fn fixed_cost_random_search_spends_the_budget() {
        let plan = small_plan(Mode::FixedCost { budget: 100 }, TimingMode::Strict, 1);
        let table = run_experiment(&plan).unwrap();
        for r in table.records.iter().filter(|r| r.solver_id == "random-search") {
            assert_eq!(r.counters.n_feval, 100);
            assert_eq!(r.status, RunStatus::BudgetExhausted);
        }
    }

    #[test]
    fn fixed_target_sphere_compass_converges() {
        let suite = builtin_suite("classic20").unwrap();
        let sphere = suite.get("sphere-2").unwrap().clone();
        let test_set = TestSet::new("one", vec![sphere.clone()]).unwrap();
        let mut starting_points = BTreeMap::new();
        starting_points.insert(
            sphere.id.clone(),
            perturb_starting_points(&sphere, 0.0, 1, 1),
        );
        let plan = ExperimentPlan {
            test_set,
            solvers: vec![default_config("compass").unwrap()],
            mode: Mode::FixedTarget {
                epsilon_target: 1e-6,
                safety_budget: 100_000,
            },
            repeats: 1,
            starting_points,
            master_seed: 42,
            timing_mode: TimingMode::Strict,
            capture_traces: false,
        };
        let table = run_experiment(&plan).unwrap();
        let r = &table.records[0];
        assert_eq!(r.status, RunStatus::Converged);
        assert!(r.f_best <= 1e-6);
        // Crossing evaluation index, verified by hand: f(1,1)=2 at eval 1;
        // the first poll cycle moves to (0,1) at eval 3; the second cycle
        // tries (1,1), (-1,1), (0,2), then hits (0,0) with f = 0 at eval 7.
        assert_eq!(r.counters.n_feval, 7);
    }

    #[test]
    fn fixed_target_requires_known_solutions() {
        let p = Problem::builder("nosol", 2, std::sync::Arc::new(crate::problems::functions::sphere))
            .x_standard(vec![1.0, 1.0])
            .build()
            .unwrap();
        let test_set = TestSet::new("t", vec![p.clone()]).unwrap();
        let mut starting_points = BTreeMap::new();
        starting_points.insert(p.id.clone(), perturb_starting_points(&p, 0.0, 1, 1));
        let plan = ExperimentPlan {
            test_set,
            solvers: vec![default_config("compass").unwrap()],
            mode: Mode::FixedTarget {
                epsilon_target: 1e-6,
                safety_budget: 100,
            },
            repeats: 1,
            starting_points,
            master_seed: 1,
            timing_mode: TimingMode::Strict,
            capture_traces: false,
        };
        assert!(matches!(
            run_experiment(&plan),
            Err(RunnerError::MissingSolution { .. })
        ));
    }

    #[test]
    fn reproducible_non_time_fields() {
        let plan = small_plan(Mode::FixedCost { budget: 200 }, TimingMode::Strict, 2);
        let a = run_experiment(&plan).unwrap();
        let b = run_experiment(&plan).unwrap();
        assert_eq!(a.records.len(), b.records.len());
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.problem_id, rb.problem_id);
            assert_eq!(ra.seed, rb.seed);
            assert_eq!(ra.status, rb.status);
            assert_eq!(ra.counters, rb.counters);
            assert_eq!(ra.f_best.to_bits(), rb.f_best.to_bits());
            assert_eq!(ra.x_best, rb.x_best);
        }
    }

    #[test]
    fn throughput_matches_strict_except_time() {
        let strict = small_plan(Mode::FixedCost { budget: 200 }, TimingMode::Strict, 2);
        let mut throughput = strict.clone();
        throughput.timing_mode = TimingMode::Throughput;
        let a = run_experiment(&strict).unwrap();
        let b = run_experiment(&throughput).unwrap();
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.problem_id, rb.problem_id);
            assert_eq!(ra.solver_id, rb.solver_id);
            assert_eq!(ra.counters, rb.counters);
            assert_eq!(ra.f_best.to_bits(), rb.f_best.to_bits());
        }
    }

    #[test]
    fn fairness_same_x0_for_every_solver() {
        let plan = small_plan(Mode::FixedCost { budget: 10 }, TimingMode::Strict, 1);
        for sp in plan.starting_points.values() {
            // All solvers read the identical stored point; spot-check via records.
            assert_eq!(sp.points.len(), 1);
        }
        let table = run_experiment(&plan).unwrap();
        // f_start is computed from the same x0, so it must be bitwise equal
        // across solvers for each (problem, start).
        let mut by_key: BTreeMap<(String, String), Vec<u64>> = BTreeMap::new();
        for r in &table.records {
            by_key
                .entry((r.problem_id.clone(), r.start_id.clone()))
                .or_default()
                .push(r.f_start.to_bits());
        }
        for bits in by_key.values() {
            assert!(bits.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn lowering_epsilon_never_lowers_cost() {
        let suite = builtin_suite("classic20").unwrap();
        let sphere = suite.get("sphere-2").unwrap().clone();
        let cost_at = |eps: f64| {
            let test_set = TestSet::new("one", vec![sphere.clone()]).unwrap();
            let mut starting_points = BTreeMap::new();
            starting_points.insert(sphere.id.clone(), perturb_starting_points(&sphere, 0.0, 1, 1));
            let plan = ExperimentPlan {
                test_set,
                solvers: vec![default_config("compass").unwrap()],
                mode: Mode::FixedTarget {
                    epsilon_target: eps,
                    safety_budget: 1_000_000,
                },
                repeats: 1,
                starting_points,
                master_seed: 42,
                timing_mode: TimingMode::Strict,
                capture_traces: false,
            };
            run_experiment(&plan).unwrap().records[0].counters.n_feval
        };
        assert!(cost_at(1e-8) >= cost_at(1e-4));
    }

    #[test]
    fn mean_std_arithmetic() {
        let plan = small_plan(Mode::FixedCost { budget: 20 }, TimingMode::Strict, 1);
        let mut table = run_experiment(&plan).unwrap();
        // Overwrite with a hand-made fixture: f_best 1, 2, 3.
        table.records.truncate(3);
        for (i, v) in [1.0, 2.0, 3.0].into_iter().enumerate() {
            table.records[i].problem_id = "p".into();
            table.records[i].solver_id = "s".into();
            table.records[i].f_best = v;
        }
        let AggregatedView::MeanStd(rows) = aggregate_repeats(&table, RepeatAggregation::MeanStd)
        else {
            panic!("expected mean_std view");
        };
        let row = rows.iter().find(|r| r.problem_id == "p").unwrap();
        assert_eq!(row.f_best_mean, 2.0);
        assert_eq!(row.f_best_std, 1.0);
    }

    #[test]
    fn expand_counts() {
        let plan = small_plan(Mode::FixedCost { budget: 20 }, TimingMode::Strict, 3);
        let table = run_experiment(&plan).unwrap();
        let AggregatedView::Expanded(runs) = aggregate_repeats(&table, RepeatAggregation::Expand)
        else {
            panic!("expected expanded view");
        };
        // 2 problems x 1 start x 3 repeats = 6 analysis problems, 3 solvers each.
        let unique: std::collections::BTreeSet<&str> =
            runs.iter().map(|r| r.analysis_problem.as_str()).collect();
        assert_eq!(unique.len(), 6);
        assert_eq!(runs.len(), 18);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let plan = small_plan(Mode::FixedCost { budget: 100 }, TimingMode::Strict, 1);
        let table = run_experiment(&plan).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        write_results_csv(&table, &path).unwrap();
        let parsed = read_results_csv(&path).unwrap();
        assert_eq!(parsed.len(), table.records.len());
        for (p, r) in parsed.iter().zip(&table.records) {
            assert_eq!(p.f_best.to_bits(), r.f_best.to_bits());
            assert_eq!(p.x_best.len(), r.x_best.len());
            for (a, b) in p.x_best.iter().zip(&r.x_best) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
            assert_eq!(p.f_star, r.f_star);
        }
    }

    #[test]
    fn deterministic_solver_identical_repeats() {
        let plan = small_plan(Mode::FixedCost { budget: 150 }, TimingMode::Strict, 3);
        let table = run_experiment(&plan).unwrap();
        for solver in ["compass", "nelder-mead"] {
            let recs: Vec<&RunRecord> = table
                .records
                .iter()
                .filter(|r| r.solver_id == solver && r.problem_id == "beale")
                .collect();
            assert_eq!(recs.len(), 3);
            for w in recs.windows(2) {
                assert_eq!(w[0].f_best.to_bits(), w[1].f_best.to_bits());
                assert_eq!(w[0].counters, w[1].counters);
                assert_eq!(w[0].x_best, w[1].x_best);
            }
        }
    }
}
