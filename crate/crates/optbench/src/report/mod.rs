//! Report generation: full and summary tables (CSV/LaTeX), profile and
//! diagnostic plots (SVG), bundled under an output directory with a
//! hash-validated manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::metrics::{
    self, accuracy_measures, passes, ConvergenceTest, CostMatrix, MetricsError,
    DEFAULT_MAX_IMPROVEMENT,
};
use crate::problems::find_problem;
use crate::runner::{fmt_f64, CsvRecord, RunnerError, TimingMode, RESULTS_HEADER};

mod svg;

pub use svg::{
    mean_over_family, render_convergence_plot, render_profile, render_runtime_plot,
    render_trajectory_plot, stroke_style, ProfileStyle,
};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("validation: {0}")]
    Validation(String),
    #[error("data integrity: {0}")]
    Integrity(String),
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Runner(#[from] RunnerError),
}

fn io_err(path: &Path, source: std::io::Error) -> ReportError {
    ReportError::Io {
        path: path.display().to_string(),
        source,
    }
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

fn record_row(r: &CsvRecord) -> Vec<String> {
    vec![
        r.problem_id.clone(),
        r.solver_id.clone(),
        r.start_id.clone(),
        r.repeat_index.to_string(),
        r.seed.to_string(),
        r.status.as_str().to_string(),
        r.n.to_string(),
        r.n_feval.to_string(),
        r.n_geval.to_string(),
        r.n_ceval.to_string(),
        r.cpu_time_s.map(fmt_f64).unwrap_or_default(),
        fmt_f64(r.wall_time_s),
        fmt_f64(r.f_start),
        fmt_f64(r.f_best),
        r.f_star.map(fmt_f64).unwrap_or_default(),
        fmt_f64(r.viol_sum),
        r.x_best.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(";"),
    ]
}

/// The complete per-run table in the persistence schema.
pub fn full_table_csv(records: &[CsvRecord]) -> Result<String, ReportError> {
    if records.is_empty() {
        return Err(ReportError::Validation("empty results table".into()));
    }
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&record_row(r).join(","));
        out.push('\n');
    }
    Ok(out)
}

fn tex_escape(s: &str) -> String {
    s.replace('\\', "\\textbackslash{}")
        .replace('_', "\\_")
        .replace('%', "\\%")
        .replace('&', "\\&")
        .replace('#', "\\#")
}

/// The same rows as `full_table_csv`, as a standalone LaTeX longtable body.
pub fn full_table_tex(records: &[CsvRecord]) -> Result<String, ReportError> {
    if records.is_empty() {
        return Err(ReportError::Validation("empty results table".into()));
    }
    let headers: Vec<&str> = RESULTS_HEADER.split(',').collect();
    let mut out = String::new();
    out.push_str(&format!(
        "\\begin{{longtable}}{{{}}}\n",
        "l".repeat(headers.len())
    ));
    out.push_str(
        &headers
            .iter()
            .map(|h| format!("\\texttt{{{}}}", tex_escape(h)))
            .collect::<Vec<_>>()
            .join(" & "),
    );
    out.push_str(" \\\\\n\\hline\n\\endhead\n");
    for r in records {
        out.push_str(
            &record_row(r)
                .iter()
                .map(|c| tex_escape(c))
                .collect::<Vec<_>>()
                .join(" & "),
        );
        out.push_str(" \\\\\n");
    }
    out.push_str("\\end{longtable}\n");
    Ok(out)
}

/// One summary-table line for a solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub solver_id: String,
    pub success_rate: f64,
    /// Mean/median fundamental-evaluation cost among converged runs; `None`
    /// when no run converged.
    pub mean_cost: Option<f64>,
    pub median_cost: Option<f64>,
    /// Fraction of run groups where the solver converged within 2x (resp.
    /// 4/3x) of the best converged cost in the group.
    pub competitive: f64,
    pub very_competitive: f64,
}

fn total_cost(r: &CsvRecord) -> f64 {
    (r.n_feval + r.n_geval + r.n_ceval) as f64
}

fn record_passes(test: &ConvergenceTest, r: &CsvRecord) -> Result<bool, ReportError> {
    let x_star = match test {
        ConvergenceTest::XDist { .. } => find_problem(&r.problem_id).ok().and_then(|p| p.x_star),
        _ => None,
    };
    Ok(passes(
        test,
        &r.problem_id,
        r.f_start,
        r.f_best,
        &r.x_best,
        r.f_star,
        x_star.as_deref(),
    )?)
}

/// Per-solver success, cost, and competitiveness summary.
pub fn summary_rows(
    records: &[CsvRecord],
    test: &ConvergenceTest,
) -> Result<Vec<SummaryRow>, ReportError> {
    if records.is_empty() {
        return Err(ReportError::Validation("empty results table".into()));
    }
    let solvers: BTreeSet<&str> = records.iter().map(|r| r.solver_id.as_str()).collect();

    // Group runs by (problem, start, repeat); competitiveness compares
    // solvers inside a group.
    let mut groups: BTreeMap<(String, String, u32), Vec<&CsvRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.problem_id.clone(), r.start_id.clone(), r.repeat_index))
            .or_default()
            .push(r);
    }
    type GroupKey = (String, String, u32);
    let mut group_best: BTreeMap<&GroupKey, f64> = BTreeMap::new();
    let mut pass_flags: BTreeMap<(&str, &GroupKey), (bool, f64)> = BTreeMap::new();
    for (key, rs) in &groups {
        let mut best = f64::INFINITY;
        for r in rs {
            let ok = record_passes(test, r)?;
            let cost = total_cost(r);
            if ok {
                best = best.min(cost);
            }
            pass_flags.insert((r.solver_id.as_str(), key), (ok, cost));
        }
        group_best.insert(key, best);
    }

    let mut rows = Vec::new();
    for s in solvers {
        let mine: Vec<&CsvRecord> = records.iter().filter(|r| r.solver_id == s).collect();
        let outcomes: Vec<bool> = mine
            .iter()
            .map(|r| record_passes(test, r))
            .collect::<Result<_, _>>()?;
        let success_rate = metrics::success_rate(&outcomes)?;
        let mut costs: Vec<f64> = mine
            .iter()
            .zip(&outcomes)
            .filter(|(_, ok)| **ok)
            .map(|(r, _)| total_cost(r))
            .collect();
        costs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (mean_cost, median_cost) = if costs.is_empty() {
            (None, None)
        } else {
            let mean = costs.iter().sum::<f64>() / costs.len() as f64;
            let median = if costs.len() % 2 == 1 {
                costs[costs.len() / 2]
            } else {
                (costs[costs.len() / 2 - 1] + costs[costs.len() / 2]) / 2.0
            };
            (Some(mean), Some(median))
        };
        let frac_within = |factor: f64| {
            let hits = groups
                .keys()
                .filter(|key| {
                    let best = group_best[key];
                    match pass_flags.get(&(s, key)) {
                        Some((true, cost)) => best.is_finite() && *cost <= factor * best,
                        _ => false,
                    }
                })
                .count();
            hits as f64 / groups.len() as f64
        };
        rows.push(SummaryRow {
            solver_id: s.to_string(),
            success_rate,
            mean_cost,
            median_cost,
            competitive: frac_within(2.0),
            very_competitive: frac_within(4.0 / 3.0),
        });
    }
    Ok(rows)
}

/// Summary table as CSV; empty cost cells render as an em dash.
pub fn summary_table_csv(
    records: &[CsvRecord],
    test: &ConvergenceTest,
) -> Result<String, ReportError> {
    let rows = summary_rows(records, test)?;
    let mut out = String::from(
        "solver_id,success_rate,mean_cost_converged,median_cost_converged,\
         competitive,very_competitive\n",
    );
    let dash = |v: Option<f64>| v.map(fmt_f64).unwrap_or_else(|| "—".to_string());
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.solver_id,
            fmt_f64(r.success_rate),
            dash(r.mean_cost),
            dash(r.median_cost),
            fmt_f64(r.competitive),
            fmt_f64(r.very_competitive)
        ));
    }
    Ok(out)
}

/// Profile-curve exchange format: one `threshold,value` file per solver.
pub fn profile_curve_csv(curve: &metrics::ProfileCurve) -> String {
    let mut out = String::from("threshold,value\n");
    for (t, v) in &curve.breakpoints {
        out.push_str(&format!("{},{}\n", fmt_f64(*t), fmt_f64(*v)));
    }
    out
}

// ---------------------------------------------------------------------------
// Bundle and manifest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ManifestFile {
    pub path: String,
    pub sha256: String,
}

/// Self-describing index of an emitted report bundle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportManifest {
    pub inputs: serde_json::Value,
    pub grids: serde_json::Value,
    /// "CPU time" or "wall time": the clock behind every time-based figure.
    pub timing_source: String,
    /// Which of the two performance-profile scales is the headline figure.
    pub featured_profile: String,
    pub files: Vec<ManifestFile>,
    pub warnings: Vec<String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

/// Accumulates atomically written files and their content hashes.
pub struct BundleWriter {
    root: PathBuf,
    files: Vec<ManifestFile>,
    warnings: Vec<String>,
}

impl BundleWriter {
    pub fn new(root: &Path) -> Result<Self, ReportError> {
        for sub in ["tables", "plots"] {
            let dir = root.join(sub);
            std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        }
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
            warnings: Vec::new(),
        })
    }

    pub fn write(&mut self, rel: &str, contents: &[u8]) -> Result<(), ReportError> {
        let path = self.root.join(rel);
        crate::runner::write_atomic(&path, contents)?;
        self.files.push(ManifestFile {
            path: rel.to_string(),
            sha256: sha256_hex(contents),
        });
        Ok(())
    }

    pub fn warn(&mut self, message: String) {
        self.warnings.push(message);
    }

    /// Writes `manifest.json` and returns the manifest.
    pub fn finish(
        mut self,
        inputs: serde_json::Value,
        grids: serde_json::Value,
        timing_source: &str,
    ) -> Result<ReportManifest, ReportError> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = ReportManifest {
            inputs,
            grids,
            timing_source: timing_source.to_string(),
            featured_profile: "perf_log".to_string(),
            files: self.files,
            warnings: self.warnings,
        };
        let json = serde_json::to_vec_pretty(&manifest)
            .map_err(|e| ReportError::Validation(format!("manifest serialization: {e}")))?;
        let path = self.root.join("manifest.json");
        crate::runner::write_atomic(&path, &json)?;
        Ok(manifest)
    }
}

/// Re-hashes every file listed in a bundle's manifest.
pub fn validate_bundle(root: &Path) -> Result<ReportManifest, ReportError> {
    let path = root.join("manifest.json");
    let text = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let manifest: ReportManifest = serde_json::from_str(&text)
        .map_err(|e| ReportError::Validation(format!("manifest parse: {e}")))?;
    for f in &manifest.files {
        let fp = root.join(&f.path);
        let bytes = std::fs::read(&fp).map_err(|e| io_err(&fp, e))?;
        let actual = sha256_hex(&bytes);
        if actual != f.sha256 {
            return Err(ReportError::Integrity(format!(
                "hash mismatch for {}: manifest {} actual {}",
                f.path, f.sha256, actual
            )));
        }
    }
    Ok(manifest)
}

// ---------------------------------------------------------------------------
// Full report generation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReportKind {
    Tables,
    Perf,
    Data,
    Acc,
    Convergence,
    Trajectory,
    Runtime,
}

impl ReportKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tables" => Some(ReportKind::Tables),
            "perf" => Some(ReportKind::Perf),
            "data" => Some(ReportKind::Data),
            "acc" => Some(ReportKind::Acc),
            "convergence" => Some(ReportKind::Convergence),
            "trajectory" => Some(ReportKind::Trajectory),
            "runtime" => Some(ReportKind::Runtime),
            _ => None,
        }
    }

    pub fn all() -> BTreeSet<ReportKind> {
        [
            ReportKind::Tables,
            ReportKind::Perf,
            ReportKind::Data,
            ReportKind::Acc,
            ReportKind::Convergence,
            ReportKind::Trajectory,
            ReportKind::Runtime,
        ]
        .into_iter()
        .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub test: ConvergenceTest,
    pub kinds: BTreeSet<ReportKind>,
    /// Substitute the best value found by any solver for missing `f_star`.
    pub best_known: bool,
    /// Restrict profiles to these solvers (ratios recomputed over the subset).
    pub subset: Option<Vec<String>>,
    /// Shade the objective behind trajectory plots.
    pub background: bool,
}

impl ReportOptions {
    pub fn new(test: ConvergenceTest) -> Self {
        Self {
            test,
            kinds: ReportKind::all(),
            best_known: false,
            subset: None,
            background: true,
        }
    }
}

/// Fills missing `f_star` with the best value any solver found on the
/// problem; returns the ids of the problems that needed it.
fn best_known_pre_pass(records: &mut [CsvRecord]) -> Vec<String> {
    let mut missing: BTreeSet<String> = records
        .iter()
        .filter(|r| r.f_star.is_none())
        .map(|r| r.problem_id.clone())
        .collect();
    let mut flagged = Vec::new();
    for pid in std::mem::take(&mut missing) {
        let bests: Vec<f64> = records
            .iter()
            .filter(|r| r.problem_id == pid)
            .map(|r| r.f_best)
            .collect();
        if let Some(best) = metrics::best_known_value(&bests) {
            for r in records.iter_mut().filter(|r| r.problem_id == pid) {
                r.f_star = Some(best);
            }
            flagged.push(pid);
        }
    }
    flagged.sort();
    flagged
}

/// One profile "problem" is a (problem, start, repeat) run group.
struct InstanceGrid<'a> {
    instances: Vec<(String, String, u32)>,
    solvers: Vec<String>,
    dims: Vec<usize>,
    by_cell: BTreeMap<(usize, usize), &'a CsvRecord>,
}

fn build_instances<'a>(
    records: &'a [CsvRecord],
    subset: Option<&[String]>,
) -> Result<InstanceGrid<'a>, ReportError> {
    let mut solvers: Vec<String> = records
        .iter()
        .map(|r| r.solver_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if let Some(sub) = subset {
        for s in sub {
            if !solvers.contains(s) {
                return Err(ReportError::Validation(format!(
                    "subset solver `{s}` not present in the results"
                )));
            }
        }
        solvers = sub.to_vec();
    }
    let instances: Vec<(String, String, u32)> = records
        .iter()
        .map(|r| (r.problem_id.clone(), r.start_id.clone(), r.repeat_index))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index_of_instance: BTreeMap<_, usize> = instances
        .iter()
        .enumerate()
        .map(|(i, k)| (k.clone(), i))
        .collect();
    let index_of_solver: BTreeMap<_, usize> =
        solvers.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    let mut by_cell = BTreeMap::new();
    let mut dims = vec![0usize; instances.len()];
    for r in records {
        let key = (r.problem_id.clone(), r.start_id.clone(), r.repeat_index);
        let pi = index_of_instance[&key];
        dims[pi] = r.n;
        if let Some(&si) = index_of_solver.get(&r.solver_id) {
            by_cell.insert((pi, si), r);
        }
    }
    Ok(InstanceGrid {
        instances,
        solvers,
        dims,
        by_cell,
    })
}

fn strip_size_suffix(problem_id: &str) -> &str {
    match problem_id.rsplit_once('-') {
        Some((family, tail)) if !tail.is_empty() && tail.bytes().all(|b| b.is_ascii_digit()) => {
            family
        }
        _ => problem_id,
    }
}

/// Generates the requested report artifacts under `out_dir` and writes a
/// hash manifest. Profiles use fundamental-evaluation counts as the cost, so
/// they are valid for both timing modes; time-based plots are refused for
/// throughput-mode tables.
pub fn generate_report(
    records: &[CsvRecord],
    timing_mode: TimingMode,
    histories_dir: Option<&Path>,
    out_dir: &Path,
    opts: &ReportOptions,
) -> Result<ReportManifest, ReportError> {
    if records.is_empty() {
        return Err(ReportError::Validation("empty results table".into()));
    }
    if opts.kinds.contains(&ReportKind::Runtime) && timing_mode == TimingMode::Throughput {
        return Err(ReportError::Validation(
            "time-based plots are not comparable for throughput-mode results; \
             rerun with timing_mode = strict or drop the `runtime` kind"
                .into(),
        ));
    }

    let mut records = records.to_vec();
    let best_known_problems = if opts.best_known {
        best_known_pre_pass(&mut records)
    } else {
        Vec::new()
    };
    let needs_f_star = matches!(
        opts.test,
        ConvergenceTest::AbsF { .. } | ConvergenceTest::RelF { .. }
    ) || opts.kinds.contains(&ReportKind::Acc);
    if needs_f_star && records.iter().any(|r| r.f_star.is_none()) {
        return Err(ReportError::Validation(
            "some problems have no known solution value; accuracy analysis needs \
             solutions or the best-known substitution (--best-known)"
                .into(),
        ));
    }

    let mut bundle = BundleWriter::new(out_dir)?;
    let grid = build_instances(&records, opts.subset.as_deref())?;

    // Cost matrix over run groups.
    let mut cost = Vec::with_capacity(grid.instances.len());
    let mut converged = Vec::with_capacity(grid.instances.len());
    for pi in 0..grid.instances.len() {
        let mut crow = Vec::with_capacity(grid.solvers.len());
        let mut brow = Vec::with_capacity(grid.solvers.len());
        for si in 0..grid.solvers.len() {
            match grid.by_cell.get(&(pi, si)) {
                Some(r) => {
                    crow.push(total_cost(r));
                    brow.push(record_passes(&opts.test, r)?);
                }
                None => {
                    crow.push(f64::INFINITY);
                    brow.push(false);
                }
            }
        }
        cost.push(crow);
        converged.push(brow);
    }
    let matrix = CostMatrix {
        problems: grid
            .instances
            .iter()
            .map(|(p, s, r)| format!("{p}/{s}/r{r}"))
            .collect(),
        solvers: grid.solvers.clone(),
        cost,
        converged,
    };

    let mut grids_meta = serde_json::Map::new();

    if opts.kinds.contains(&ReportKind::Tables) {
        bundle.write("tables/full.csv", full_table_csv(&records)?.as_bytes())?;
        bundle.write("tables/full.tex", full_table_tex(&records)?.as_bytes())?;
        bundle.write(
            "tables/summary.csv",
            summary_table_csv(&records, &opts.test)?.as_bytes(),
        )?;
    }

    if opts.kinds.contains(&ReportKind::Perf) {
        let ratios = metrics::performance_ratios(&matrix)?;
        let log_grid = metrics::default_log_tau_grid(&ratios);
        let lin_grid = metrics::default_linear_tau_grid(&ratios, 50);
        let log_curves = metrics::performance_profile(&ratios, &matrix.solvers, &log_grid)?;
        let lin_curves = metrics::performance_profile(&ratios, &matrix.solvers, &lin_grid)?;
        bundle.write(
            "plots/perf_profile_log.svg",
            render_profile(&log_curves, ProfileStyle::PerfLog)?.as_bytes(),
        )?;
        bundle.write(
            "plots/perf_profile_linear.svg",
            render_profile(&lin_curves, ProfileStyle::PerfLinear)?.as_bytes(),
        )?;
        for c in &log_curves {
            bundle.write(
                &format!("plots/perf_log_{}.csv", c.solver_id),
                profile_curve_csv(c).as_bytes(),
            )?;
        }
        for c in &lin_curves {
            bundle.write(
                &format!("plots/perf_linear_{}.csv", c.solver_id),
                profile_curve_csv(c).as_bytes(),
            )?;
        }
        grids_meta.insert("perf_log_tau".into(), serde_json::json!(log_grid));
        grids_meta.insert("perf_linear_tau".into(), serde_json::json!(lin_grid));
    }

    if opts.kinds.contains(&ReportKind::Data) {
        // Data-profile cost: evaluations when solved, infinite otherwise.
        let t_evals: Vec<Vec<f64>> = matrix
            .cost
            .iter()
            .zip(&matrix.converged)
            .map(|(crow, brow)| {
                crow.iter()
                    .zip(brow)
                    .map(|(&c, &ok)| if ok { c } else { f64::INFINITY })
                    .collect()
            })
            .collect();
        let kmax = t_evals
            .iter()
            .zip(&grid.dims)
            .flat_map(|(row, &n)| row.iter().map(move |t| t / (n as f64 + 1.0)))
            .filter(|q| q.is_finite())
            .fold(1.0f64, f64::max);
        let k_grid: Vec<f64> = (0..=50).map(|i| kmax * i as f64 / 50.0).collect();
        let curves = metrics::data_profile(&t_evals, &grid.dims, &matrix.solvers, &k_grid)?;
        bundle.write(
            "plots/data_profile.svg",
            render_profile(&curves, ProfileStyle::Data)?.as_bytes(),
        )?;
        for c in &curves {
            bundle.write(
                &format!("plots/data_{}.csv", c.solver_id),
                profile_curve_csv(c).as_bytes(),
            )?;
        }
        grids_meta.insert("data_k".into(), serde_json::json!(k_grid));
    }

    if opts.kinds.contains(&ReportKind::Acc) {
        let mut gammas = Vec::with_capacity(grid.instances.len());
        for pi in 0..grid.instances.len() {
            let mut row = Vec::with_capacity(grid.solvers.len());
            for si in 0..grid.solvers.len() {
                match grid.by_cell.get(&(pi, si)) {
                    Some(r) => {
                        let f_star = r.f_star.expect("checked above");
                        let acc = accuracy_measures(
                            r.f_start,
                            r.f_best,
                            f_star,
                            None,
                            None,
                            None,
                            DEFAULT_MAX_IMPROVEMENT,
                        )?;
                        row.push(acc.gamma);
                    }
                    None => row.push(0.0),
                }
            }
            gammas.push(row);
        }
        let tau_grid: Vec<f64> = (0..=32).map(|i| i as f64 * 0.5).collect();
        let curves = metrics::accuracy_profile(&gammas, &grid.solvers, &tau_grid)?;
        bundle.write(
            "plots/accuracy_profile.svg",
            render_profile(&curves, ProfileStyle::Accuracy)?.as_bytes(),
        )?;
        for c in &curves {
            bundle.write(
                &format!("plots/acc_{}.csv", c.solver_id),
                profile_curve_csv(c).as_bytes(),
            )?;
        }
        grids_meta.insert("accuracy_tau".into(), serde_json::json!(tau_grid));
    }

    if opts.kinds.contains(&ReportKind::Convergence) || opts.kinds.contains(&ReportKind::Trajectory)
    {
        let problems: BTreeSet<&str> = records.iter().map(|r| r.problem_id.as_str()).collect();
        match histories_dir {
            None => bundle.warn(
                "convergence/trajectory plots skipped: no histories directory".to_string(),
            ),
            Some(dir) => {
                for pid in problems {
                    // One representative run per solver: first start, repeat 0.
                    let mut conv_series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
                    let mut traj_series: Vec<(String, Vec<[f64; 2]>)> = Vec::new();
                    for s in &grid.solvers {
                        let rec = records
                            .iter()
                            .filter(|r| {
                                r.problem_id == pid && &r.solver_id == s && r.repeat_index == 0
                            })
                            .min_by_key(|r| r.start_id.clone());
                        let Some(rec) = rec else { continue };
                        let key = rec.run_key();
                        match read_history(&dir.join(format!("{key}.csv"))) {
                            Ok(pts) if !pts.is_empty() => conv_series.push((s.clone(), pts)),
                            _ => bundle.warn(format!(
                                "no best-so-far history for {pid}/{s}; omitted from plot"
                            )),
                        }
                        if rec.n == 2 {
                            if let Ok(pts) = read_trajectory(&dir.join(format!("{key}.traj.csv"))) {
                                if !pts.is_empty() {
                                    traj_series.push((s.clone(), pts));
                                }
                            }
                        }
                    }
                    if opts.kinds.contains(&ReportKind::Convergence) && !conv_series.is_empty() {
                        let svg = render_convergence_plot(pid, &conv_series)?;
                        bundle.write(
                            &format!("plots/convergence_{pid}.svg"),
                            svg.as_bytes(),
                        )?;
                    }
                    if opts.kinds.contains(&ReportKind::Trajectory) && !traj_series.is_empty() {
                        if let Ok(problem) = find_problem(pid) {
                            let svg =
                                render_trajectory_plot(&problem, &traj_series, opts.background)?;
                            bundle.write(
                                &format!("plots/trajectory_{pid}.svg"),
                                svg.as_bytes(),
                            )?;
                        }
                    }
                }
            }
        }
    }

    let timing_source = if records.iter().all(|r| r.cpu_time_s.is_some()) {
        "CPU time"
    } else {
        "wall time"
    };

    if opts.kinds.contains(&ReportKind::Runtime) {
        // Families: problems differing only in a numeric size suffix.
        let mut families: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
        for r in &records {
            families
                .entry(strip_size_suffix(&r.problem_id))
                .or_default()
                .insert(r.n);
        }
        let mut plotted = false;
        for (family, sizes) in &families {
            if sizes.len() < 2 {
                continue;
            }
            let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
            for s in &grid.solvers {
                let pts: Vec<(f64, f64)> = sizes
                    .iter()
                    .filter_map(|&n| {
                        let times: Vec<f64> = records
                            .iter()
                            .filter(|r| {
                                strip_size_suffix(&r.problem_id) == *family
                                    && r.n == n
                                    && &r.solver_id == s
                            })
                            .map(|r| r.cpu_time_s.unwrap_or(r.wall_time_s))
                            .collect();
                        if times.is_empty() {
                            None
                        } else {
                            Some((n as f64, times.iter().sum::<f64>() / times.len() as f64))
                        }
                    })
                    .collect();
                if pts.len() >= 2 {
                    series.push((s.clone(), pts));
                }
            }
            if !series.is_empty() {
                let label = format!("{timing_source} (s)");
                let svg = render_runtime_plot(family, &series, &label)?;
                bundle.write(&format!("plots/runtime_{family}.svg"), svg.as_bytes())?;
                plotted = true;
            }
        }
        if !plotted {
            bundle.warn(
                "runtime plots skipped: no problem family spans two or more sizes".to_string(),
            );
        }
    }

    let inputs = serde_json::json!({
        "record_count": records.len(),
        "solvers": grid.solvers,
        "instance_count": grid.instances.len(),
        "convergence_test": format!("{:?}", opts.test),
        "best_known_problems": best_known_problems,
        "subset": opts.subset,
        "timing_mode": timing_mode,
    });
    bundle.finish(inputs, serde_json::Value::Object(grids_meta), timing_source)
}

fn read_history(path: &Path) -> Result<Vec<(f64, f64)>, ReportError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut pts = Vec::new();
    for line in text.lines().skip(1) {
        let mut parts = line.split(',');
        let (Some(e), Some(f)) = (parts.next(), parts.next()) else {
            continue;
        };
        if let (Ok(e), Ok(f)) = (e.parse::<f64>(), f.parse::<f64>()) {
            pts.push((e, f));
        }
    }
    Ok(pts)
}

fn read_trajectory(path: &Path) -> Result<Vec<[f64; 2]>, ReportError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut pts = Vec::new();
    for line in text.lines().skip(1) {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() == 3 {
            if let (Ok(a), Ok(b)) = (parts[1].parse::<f64>(), parts[2].parse::<f64>()) {
                pts.push([a, b]);
            }
        }
    }
    Ok(pts)
}
