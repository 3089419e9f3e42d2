//! Command-line entry point: binds JSON plan files to the runner and the
//! report layer.
//!
//! Exit codes: 0 success / audit pass, 1 audit fail, 2 usage or validation
//! error, 3 I/O error.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::problems::{
    builtin_suite, find_problem, perturb_starting_points, suite_names, TestSet,
};
use crate::report::{generate_report, validate_bundle, ReportError, ReportKind, ReportOptions};
use crate::runner::{
    audit_shift_invariance, read_results_csv, run_experiment, write_histories, write_results_csv,
    ExperimentPlan, Mode, RunnerError, TimingMode,
};
use crate::solvers::default_config;
use crate::{metrics::ConvergenceTest, seeding};

pub const EXIT_OK: i32 = 0;
pub const EXIT_AUDIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "optbench",
    about = "Benchmarking harness for optimization solvers",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Execute an experiment plan and persist results.
    Run {
        /// Path to the JSON plan file.
        plan: PathBuf,
        /// Output directory for results.csv, plan.json, histories/.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Build tables and plots from a results file.
    Report {
        /// Path to results.csv.
        results: PathBuf,
        /// Convergence test: abs_f:EPS, rel_f:EPS, or x_dist:EPS.
        #[arg(long, default_value = "abs_f:1e-6")]
        test: String,
        /// Comma-separated subset of: tables,perf,data,acc,convergence,trajectory,runtime.
        #[arg(long, default_value = "tables,perf,data,acc,convergence,trajectory,runtime")]
        kinds: String,
        /// Substitute best-found values for missing solutions.
        #[arg(long)]
        best_known: bool,
        /// Comma-separated solver ids; profiles are recomputed over the subset.
        #[arg(long)]
        subset: Option<String>,
        /// Output directory for the report bundle.
        #[arg(long, default_value = "report")]
        out: PathBuf,
        /// Validate an existing bundle instead of writing a new one.
        #[arg(long)]
        validate: bool,
    },
    /// Print the problem, solver, or suite registry.
    List {
        /// One of: problems, solvers, suites.
        what: String,
        /// Emit a JSON manifest instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Run the shift-invariance audit for one problem/solver pair.
    Audit {
        /// Problem id (see `list problems`).
        problem: String,
        /// Solver id (see `list solvers`).
        solver: String,
        /// Comma-separated shift vector, or one value broadcast to all coordinates.
        #[arg(long, default_value = "1.0")]
        shift: String,
        /// Evaluation budget for each of the two runs.
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
    },
}

/// The on-disk experiment description. Unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    /// Built-in suite name; mutually exclusive with `problems`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    /// Explicit problem ids; mutually exclusive with `suite`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problems: Option<Vec<String>>,
    pub solvers: Vec<SolverSpec>,
    pub mode: Mode,
    #[serde(default = "default_repeats")]
    pub repeats: u32,
    pub starting_points: StartRule,
    /// Defaults to the OPTBENCH_SEED environment variable, then 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default = "default_timing")]
    pub timing_mode: TimingMode,
    #[serde(default = "default_true")]
    pub capture_traces: bool,
}

fn default_repeats() -> u32 {
    1
}

fn default_timing() -> TimingMode {
    TimingMode::Strict
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub id: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartRule {
    pub radius: f64,
    pub count: usize,
}

/// The plan echo written next to results.csv; reports read `timing_mode`
/// from it to refuse time plots on throughput tables.
#[derive(Debug, Serialize, Deserialize)]
struct PlanEcho {
    #[serde(flatten)]
    plan: PlanFile,
    resolved_master_seed: u64,
    fingerprint: String,
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl From<RunnerError> for CliError {
    fn from(e: RunnerError) -> Self {
        let code = match &e {
            RunnerError::Io { .. } => EXIT_IO,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        let code = match &e {
            ReportError::Io { .. } => EXIT_IO,
            ReportError::Runner(RunnerError::Io { .. }) => EXIT_IO,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Runs one parsed command; returns the process exit code.
pub fn dispatch(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Run { plan, out } => cmd_run(&plan, &out),
        Command::Report {
            results,
            test,
            kinds,
            best_known,
            subset,
            out,
            validate,
        } => cmd_report(&results, &test, &kinds, best_known, subset.as_deref(), &out, validate),
        Command::List { what, json } => cmd_list(&what, json),
        Command::Audit {
            problem,
            solver,
            shift,
            budget,
        } => cmd_audit(&problem, &solver, &shift, budget),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn resolve_master_seed(plan: &PlanFile) -> Result<u64, CliError> {
    if let Some(seed) = plan.master_seed {
        return Ok(seed);
    }
    match std::env::var("OPTBENCH_SEED") {
        Ok(v) => v
            .parse::<u64>()
            .map_err(|_| CliError::usage(format!("OPTBENCH_SEED is not a u64: `{v}`"))),
        Err(_) => Ok(0),
    }
}

fn build_test_set(plan: &PlanFile) -> Result<TestSet, CliError> {
    match (&plan.suite, &plan.problems) {
        (Some(_), Some(_)) => Err(CliError::usage(
            "plan sets both `suite` and `problems`; choose one",
        )),
        (None, None) => Err(CliError::usage("plan needs `suite` or `problems`")),
        (Some(name), None) => Ok(builtin_suite(name).map_err(|e| CliError::usage(e.to_string()))?),
        (None, Some(ids)) => {
            let problems = ids
                .iter()
                .map(|id| find_problem(id))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::usage(e.to_string()))?;
            TestSet::new("custom", problems).map_err(|e| CliError::usage(e.to_string()))
        }
    }
}

fn build_experiment(plan: &PlanFile, master_seed: u64) -> Result<ExperimentPlan, CliError> {
    let test_set = build_test_set(plan)?;
    let mut solvers = Vec::new();
    for spec in &plan.solvers {
        let mut cfg = default_config(&spec.id).map_err(|e| CliError::usage(e.to_string()))?;
        if !spec.parameters.is_empty() {
            cfg.provenance = "custom".to_string();
            for (k, v) in &spec.parameters {
                cfg.parameters.insert(k.clone(), *v);
            }
        }
        solvers.push(cfg);
    }
    let mut starting_points = BTreeMap::new();
    for p in &test_set.problems {
        let seed = seeding::starting_point_seed(master_seed, &p.id);
        starting_points.insert(
            p.id.clone(),
            perturb_starting_points(p, plan.starting_points.radius, plan.starting_points.count, seed),
        );
    }
    Ok(ExperimentPlan {
        test_set,
        solvers,
        mode: plan.mode,
        repeats: plan.repeats,
        starting_points,
        master_seed,
        timing_mode: plan.timing_mode,
        capture_traces: plan.capture_traces,
    })
}

fn parse_plan_file(path: &Path) -> Result<PlanFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read plan {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::usage(format!(
            "invalid plan {} (line {}, column {}): {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn cmd_run(plan_path: &Path, out_dir: &Path) -> Result<i32, CliError> {
    let plan_file = parse_plan_file(plan_path)?;
    let master_seed = resolve_master_seed(&plan_file)?;
    let plan = build_experiment(&plan_file, master_seed)?;
    let warnings = plan.validate()?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let table = run_experiment(&plan)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", out_dir.display())))?;
    write_results_csv(&table, &out_dir.join("results.csv"))?;
    let echo = PlanEcho {
        plan: plan_file,
        resolved_master_seed: master_seed,
        fingerprint: plan.fingerprint(),
    };
    let json = serde_json::to_vec_pretty(&echo)
        .map_err(|e| CliError::usage(format!("plan echo serialization: {e}")))?;
    crate::runner::write_atomic(&out_dir.join("plan.json"), &json)?;
    if plan.capture_traces {
        write_histories(&table, &out_dir.join("histories"))?;
    }
    let failures = table
        .records
        .iter()
        .filter(|r| r.status == crate::runner::RunStatus::SolverFailure)
        .count();
    println!(
        "wrote {} records to {} ({} solver failures recorded as data)",
        table.records.len(),
        out_dir.join("results.csv").display(),
        failures
    );
    Ok(EXIT_OK)
}

fn parse_test_spec(spec: &str) -> Result<ConvergenceTest, CliError> {
    let (name, eps) = spec
        .split_once(':')
        .ok_or_else(|| CliError::usage(format!("test spec `{spec}` is not NAME:EPS")))?;
    let eps: f64 = eps
        .parse()
        .map_err(|_| CliError::usage(format!("bad tolerance in test spec `{spec}`")))?;
    if eps.is_nan() || eps <= 0.0 {
        return Err(CliError::usage("test tolerance must be positive"));
    }
    match name {
        "abs_f" => Ok(ConvergenceTest::AbsF { eps }),
        "rel_f" => Ok(ConvergenceTest::RelF { eps }),
        "x_dist" => Ok(ConvergenceTest::XDist { eps }),
        _ => Err(CliError::usage(format!(
            "unknown convergence test `{name}` (expected abs_f, rel_f, or x_dist)"
        ))),
    }
}

fn sibling_timing_mode(results_path: &Path) -> TimingMode {
    let plan_path = results_path
        .parent()
        .map(|d| d.join("plan.json"))
        .unwrap_or_else(|| PathBuf::from("plan.json"));
    std::fs::read_to_string(&plan_path)
        .ok()
        .and_then(|text| serde_json::from_str::<serde_json::Value>(&text).ok())
        .and_then(|v| {
            serde_json::from_value::<TimingMode>(v.get("timing_mode")?.clone()).ok()
        })
        .unwrap_or(TimingMode::Strict)
}

#[allow(clippy::too_many_arguments)]
fn cmd_report(
    results_path: &Path,
    test_spec: &str,
    kinds_spec: &str,
    best_known: bool,
    subset: Option<&str>,
    out_dir: &Path,
    validate: bool,
) -> Result<i32, CliError> {
    if validate {
        let manifest = validate_bundle(out_dir)?;
        println!(
            "bundle {} valid: {} files, timing source {}",
            out_dir.display(),
            manifest.files.len(),
            manifest.timing_source
        );
        return Ok(EXIT_OK);
    }
    let records = read_results_csv(results_path)?;
    let test = parse_test_spec(test_spec)?;
    let mut kinds = BTreeSet::new();
    for k in kinds_spec.split(',').filter(|k| !k.is_empty()) {
        kinds.insert(
            ReportKind::parse(k)
                .ok_or_else(|| CliError::usage(format!("unknown report kind `{k}`")))?,
        );
    }
    if kinds.is_empty() {
        return Err(CliError::usage("no report kinds requested"));
    }
    let mut opts = ReportOptions::new(test);
    opts.kinds = kinds;
    opts.best_known = best_known;
    opts.subset = subset.map(|s| s.split(',').map(|x| x.trim().to_string()).collect());
    let timing_mode = sibling_timing_mode(results_path);
    let histories = results_path.parent().map(|d| d.join("histories"));
    let histories = histories.as_deref().filter(|d| d.is_dir());
    let manifest = generate_report(&records, timing_mode, histories, out_dir, &opts)?;
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "wrote {} report files to {} (timing source: {})",
        manifest.files.len(),
        out_dir.display(),
        manifest.timing_source
    );
    Ok(EXIT_OK)
}

fn cmd_list(what: &str, json: bool) -> Result<i32, CliError> {
    match what {
        "problems" => {
            let mut infos = Vec::new();
            let mut seen = BTreeSet::new();
            for suite in suite_names() {
                let ts = builtin_suite(&suite).map_err(|e| CliError::usage(e.to_string()))?;
                for p in &ts.problems {
                    if seen.insert(p.id.clone()) {
                        infos.push(p.manifest());
                    }
                }
            }
            infos.sort_by(|a, b| a.id.cmp(&b.id));
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&infos)
                        .map_err(|e| CliError::usage(e.to_string()))?
                );
            } else {
                for i in infos {
                    println!(
                        "{:24} n={:<3} m={} gradient={} f_star={}",
                        i.id,
                        i.n,
                        i.m,
                        if i.has_gradient { "yes" } else { "no" },
                        i.f_star.map(|f| f.to_string()).unwrap_or_else(|| "?".into())
                    );
                }
            }
        }
        "solvers" => {
            let regs = crate::solvers::registry();
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&regs)
                        .map_err(|e| CliError::usage(e.to_string()))?
                );
            } else {
                for s in regs {
                    let params = s
                        .parameters
                        .iter()
                        .map(|(k, v)| format!("{k}={v}"))
                        .collect::<Vec<_>>()
                        .join(" ");
                    println!(
                        "{:18} deterministic={} defaults: {}",
                        s.id, s.deterministic, params
                    );
                }
            }
        }
        "suites" => {
            let names = suite_names();
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&names)
                        .map_err(|e| CliError::usage(e.to_string()))?
                );
            } else {
                for n in names {
                    let ts = builtin_suite(&n).map_err(|e| CliError::usage(e.to_string()))?;
                    println!("{:18} {} problems", n, ts.problems.len());
                }
            }
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown category `{other}` (expected problems, solvers, or suites)"
            )))
        }
    }
    Ok(EXIT_OK)
}

fn cmd_audit(problem_id: &str, solver_id: &str, shift_spec: &str, budget: u64) -> Result<i32, CliError> {
    let problem = find_problem(problem_id).map_err(|e| CliError::usage(e.to_string()))?;
    let cfg = default_config(solver_id).map_err(|e| CliError::usage(e.to_string()))?;
    let parts = shift_spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|_| CliError::usage(format!("bad shift vector `{shift_spec}`")))?;
    let shift = if parts.len() == 1 {
        vec![parts[0]; problem.n]
    } else if parts.len() == problem.n {
        parts
    } else {
        return Err(CliError::usage(format!(
            "shift has {} components but `{}` has n = {}",
            parts.len(),
            problem.id,
            problem.n
        )));
    };
    let audit = match audit_shift_invariance(&problem, &cfg, &shift, budget) {
        Ok(a) => a,
        Err(RunnerError::NonDeterministicAudit { solver }) => {
            return Err(CliError::usage(format!(
                "solver `{solver}` is not deterministic; the shift audit is undefined for it"
            )))
        }
        Err(e) => return Err(e.into()),
    };
    println!(
        "shift audit: problem={} solver={} shift=[{}]",
        audit.problem_id,
        audit.solver_id,
        audit
            .shift
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    println!(
        "  iterations: base={} shifted={}",
        audit.base_iterations, audit.shifted_iterations
    );
    println!(
        "  max iterate deviation: {:e} (tolerance {:e})",
        audit.max_deviation, audit.tolerance
    );
    println!("  final objective gap:   {:e}", audit.final_f_gap);
    if audit.pass {
        println!("PASS");
        Ok(EXIT_OK)
    } else {
        println!("FAIL");
        Ok(EXIT_AUDIT_FAIL)
    }
}
