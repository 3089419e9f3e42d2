//! Quantitative measures: accuracy families, constraint-violation
//! aggregates, success rates, performance/data/accuracy profiles,
//! competitive tables, and subset recomputation.
//!
//! Everything here is a pure function of immutable inputs.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("data integrity: {0}")]
    DataIntegrity(String),
    #[error("validation: {0}")]
    Validation(String),
}

/// Default cap on digits of accuracy ("maximal improvement value").
pub const DEFAULT_MAX_IMPROVEMENT: f64 = 16.0;

// ---------------------------------------------------------------------------
// Convergence tests
// ---------------------------------------------------------------------------

/// The predicate deciding "solved" for one run; parameterizes every profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvergenceTest {
    /// `f_best - f_star <= eps`.
    AbsF { eps: f64 },
    /// `(f_best - f_star) / (f_start - f_star) <= eps`.
    RelF { eps: f64 },
    /// `|x_best - x_star|_2 <= eps`.
    XDist { eps: f64 },
}

impl ConvergenceTest {
    pub fn eps(&self) -> f64 {
        match self {
            ConvergenceTest::AbsF { eps }
            | ConvergenceTest::RelF { eps }
            | ConvergenceTest::XDist { eps } => *eps,
        }
    }
}

/// Applies a convergence test to the final state of one run.
pub fn passes(
    test: &ConvergenceTest,
    problem_id: &str,
    f_start: f64,
    f_best: f64,
    x_best: &[f64],
    f_star: Option<f64>,
    x_star: Option<&[f64]>,
) -> Result<bool, MetricsError> {
    match test {
        ConvergenceTest::AbsF { eps } => {
            let f_star = f_star.ok_or_else(|| {
                MetricsError::Validation(format!("abs_f test requires f_star for `{problem_id}`"))
            })?;
            Ok(f_best - f_star <= *eps)
        }
        ConvergenceTest::RelF { eps } => {
            let f_star = f_star.ok_or_else(|| {
                MetricsError::Validation(format!("rel_f test requires f_star for `{problem_id}`"))
            })?;
            let denom = f_start - f_star;
            if denom <= 0.0 {
                return Err(MetricsError::Validation(format!(
                    "rel_f normalization undefined for `{problem_id}`: f_start <= f_star"
                )));
            }
            Ok((f_best - f_star) / denom <= *eps)
        }
        ConvergenceTest::XDist { eps } => {
            let x_star = x_star.ok_or_else(|| {
                MetricsError::Validation(format!("x_dist test requires x_star for `{problem_id}`"))
            })?;
            let d = x_best
                .iter()
                .zip(x_star)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            Ok(d <= *eps)
        }
    }
}

/// Fraction of outcomes that pass the convergence test.
pub fn success_rate(outcomes: &[bool]) -> Result<f64, MetricsError> {
    if outcomes.is_empty() {
        return Err(MetricsError::Validation("success_rate of no records".into()));
    }
    Ok(outcomes.iter().filter(|b| **b).count() as f64 / outcomes.len() as f64)
}

// ---------------------------------------------------------------------------
// Accuracy measures
// ---------------------------------------------------------------------------

/// Value- and point-based accuracy of one run, plus the capped digit count.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRecord {
    pub f_acc: f64,
    pub f_acc_n: Option<f64>,
    pub f_acc_l: Option<f64>,
    pub x_acc: Option<f64>,
    pub x_acc_n: Option<f64>,
    pub x_acc_l: Option<f64>,
    /// Digits of accuracy gained, capped at M; the accuracy-profile measure.
    pub gamma: f64,
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Computes the accuracy family for one run.
///
/// `gamma` is `-f_acc_l` capped at `max_improvement`, and equals the cap when
/// the final gap is exactly zero or the log form is undefined.
#[allow(clippy::too_many_arguments)]
pub fn accuracy_measures(
    f_start: f64,
    f_best: f64,
    f_star: f64,
    x0: Option<&[f64]>,
    x_best: Option<&[f64]>,
    x_star: Option<&[f64]>,
    max_improvement: f64,
) -> Result<AccuracyRecord, MetricsError> {
    assert!(max_improvement > 0.0, "max_improvement must be positive");
    let gap = f_best - f_star;
    if gap < -1e-10 {
        return Err(MetricsError::DataIntegrity(format!(
            "f_best = {f_best} is below f_star = {f_star} beyond tolerance"
        )));
    }
    let gap = gap.max(0.0);
    let start_gap = f_start - f_star;

    let (f_acc_n, f_acc_l) = if start_gap > 0.0 {
        let l = if gap > 0.0 {
            Some(gap.log10() - start_gap.log10())
        } else {
            None
        };
        (Some(gap / start_gap), l)
    } else {
        (None, None)
    };
    let gamma = match f_acc_l {
        Some(l) if -l <= max_improvement => -l,
        _ => max_improvement,
    };

    let (x_acc, x_acc_n, x_acc_l) = match (x_best, x_star) {
        (Some(xb), Some(xs)) => {
            let d: Vec<f64> = xb.iter().zip(xs).map(|(a, b)| a - b).collect();
            let x_acc = norm2(&d);
            match x0 {
                Some(x0) => {
                    let d0: Vec<f64> = x0.iter().zip(xs).map(|(a, b)| a - b).collect();
                    let start = norm2(&d0);
                    if start > 0.0 {
                        let l = if x_acc > 0.0 {
                            Some(x_acc.log10() - start.log10())
                        } else {
                            None
                        };
                        (Some(x_acc), Some(x_acc / start), l)
                    } else {
                        (Some(x_acc), None, None)
                    }
                }
                None => (Some(x_acc), None, None),
            }
        }
        _ => (None, None, None),
    };

    Ok(AccuracyRecord {
        f_acc: gap,
        f_acc_n,
        f_acc_l,
        x_acc,
        x_acc_n,
        x_acc_l,
        gamma,
    })
}

/// Aggregates of the positive constraint parts at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationSummary {
    pub sum: f64,
    pub sq_sum: f64,
    pub mean: f64,
    /// Product over the violated constraints; 1 when none are violated.
    pub product_violated: f64,
}

pub fn constraint_violation_summary(g: &[f64]) -> Result<ViolationSummary, MetricsError> {
    if g.is_empty() {
        return Err(MetricsError::Validation(
            "constraint summary of an unconstrained point".into(),
        ));
    }
    let sum: f64 = g.iter().map(|gi| gi.max(0.0)).sum();
    let sq_sum: f64 = g.iter().map(|gi| gi.max(0.0).powi(2)).sum();
    let mean = sum / g.len() as f64;
    let product_violated: f64 = g.iter().filter(|gi| **gi > 0.0).product();
    Ok(ViolationSummary {
        sum,
        sq_sum,
        mean,
        product_violated,
    })
}

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

/// A right-continuous step function sampled on a grid, with range [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub solver_id: String,
    pub breakpoints: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Nondecreasing,
    Nonincreasing,
}

impl ProfileCurve {
    pub fn new(
        solver_id: String,
        breakpoints: Vec<(f64, f64)>,
        direction: Monotonicity,
    ) -> Result<Self, MetricsError> {
        for (t, v) in &breakpoints {
            if !(0.0..=1.0).contains(v) {
                return Err(MetricsError::DataIntegrity(format!(
                    "profile value {v} at {t} outside [0, 1] for `{solver_id}`"
                )));
            }
        }
        let ok = breakpoints.windows(2).all(|w| match direction {
            Monotonicity::Nondecreasing => w[1].1 >= w[0].1,
            Monotonicity::Nonincreasing => w[1].1 <= w[0].1,
        });
        if !ok {
            return Err(MetricsError::DataIntegrity(format!(
                "profile for `{solver_id}` violates monotonicity"
            )));
        }
        Ok(Self {
            solver_id,
            breakpoints,
        })
    }
}

/// Per-(problem, solver) costs with convergence flags.
///
/// Rows are problems, columns solvers; `cost[p][s]` must be positive for
/// converged entries.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    pub problems: Vec<String>,
    pub solvers: Vec<String>,
    pub cost: Vec<Vec<f64>>,
    pub converged: Vec<Vec<bool>>,
}

impl CostMatrix {
    fn check(&self) -> Result<(), MetricsError> {
        if self.problems.is_empty() {
            return Err(MetricsError::Validation("empty problem set".into()));
        }
        if self.solvers.is_empty() {
            return Err(MetricsError::Validation("empty solver set".into()));
        }
        for (p, row) in self.cost.iter().enumerate() {
            for (s, &t) in row.iter().enumerate() {
                if self.converged[p][s] && (t.is_nan() || t <= 0.0) {
                    return Err(MetricsError::DataIntegrity(format!(
                        "nonpositive cost {t} for converged ({}, {})",
                        self.problems[p], self.solvers[s]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Performance ratios `r[p][s]`: cost relative to the best converged solver
/// on the problem; infinite when the solver failed the convergence test, or
/// when no solver converged on the problem.
pub fn performance_ratios(m: &CostMatrix) -> Result<Vec<Vec<f64>>, MetricsError> {
    m.check()?;
    let mut ratios = Vec::with_capacity(m.problems.len());
    for p in 0..m.problems.len() {
        let best = (0..m.solvers.len())
            .filter(|&s| m.converged[p][s])
            .map(|s| m.cost[p][s])
            .fold(f64::INFINITY, f64::min);
        let row = (0..m.solvers.len())
            .map(|s| {
                if m.converged[p][s] && best.is_finite() {
                    m.cost[p][s] / best
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        ratios.push(row);
    }
    Ok(ratios)
}

/// Performance profile: for each solver, the fraction of problems with
/// performance ratio within each grid threshold.
pub fn performance_profile(
    ratios: &[Vec<f64>],
    solvers: &[String],
    tau_grid: &[f64],
) -> Result<Vec<ProfileCurve>, MetricsError> {
    if ratios.is_empty() {
        return Err(MetricsError::Validation("empty problem set".into()));
    }
    check_grid(tau_grid, 1.0)?;
    let n_problems = ratios.len() as f64;
    solvers
        .iter()
        .enumerate()
        .map(|(s, id)| {
            let breakpoints = tau_grid
                .iter()
                .map(|&tau| {
                    let count = ratios.iter().filter(|row| row[s] <= tau).count();
                    (tau, count as f64 / n_problems)
                })
                .collect();
            ProfileCurve::new(id.clone(), breakpoints, Monotonicity::Nondecreasing)
        })
        .collect()
}

/// Data profile: fraction of problems solved within `k` simplex-gradient
/// budgets, i.e. `t[p][s] / (n_p + 1) <= k`. Failed runs carry an infinite
/// cost and never count; each solver's curve is independent of the others.
pub fn data_profile(
    t_evals: &[Vec<f64>],
    dims: &[usize],
    solvers: &[String],
    k_grid: &[f64],
) -> Result<Vec<ProfileCurve>, MetricsError> {
    if t_evals.is_empty() {
        return Err(MetricsError::Validation("empty problem set".into()));
    }
    if dims.len() != t_evals.len() {
        return Err(MetricsError::Validation(format!(
            "dimension list has {} entries for {} problems",
            dims.len(),
            t_evals.len()
        )));
    }
    check_grid(k_grid, 0.0)?;
    let n_problems = t_evals.len() as f64;
    solvers
        .iter()
        .enumerate()
        .map(|(s, id)| {
            let breakpoints = k_grid
                .iter()
                .map(|&k| {
                    let count = t_evals
                        .iter()
                        .zip(dims)
                        .filter(|(row, &n_p)| row[s] / (n_p as f64 + 1.0) <= k)
                        .count();
                    (k, count as f64 / n_problems)
                })
                .collect();
            ProfileCurve::new(id.clone(), breakpoints, Monotonicity::Nondecreasing)
        })
        .collect()
}

/// Accuracy profile: fraction of problems on which the solver attains at
/// least `tau` digits of accuracy.
pub fn accuracy_profile(
    gammas: &[Vec<f64>],
    solvers: &[String],
    tau_grid: &[f64],
) -> Result<Vec<ProfileCurve>, MetricsError> {
    if gammas.is_empty() {
        return Err(MetricsError::Validation("empty problem set".into()));
    }
    if tau_grid.is_empty() {
        return Err(MetricsError::Validation("empty tau grid".into()));
    }
    if tau_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(MetricsError::Validation("tau grid must be ascending".into()));
    }
    let n_problems = gammas.len() as f64;
    solvers
        .iter()
        .enumerate()
        .map(|(s, id)| {
            let breakpoints = tau_grid
                .iter()
                .map(|&tau| {
                    let count = gammas.iter().filter(|row| row[s] >= tau).count();
                    (tau, count as f64 / n_problems)
                })
                .collect();
            ProfileCurve::new(id.clone(), breakpoints, Monotonicity::Nonincreasing)
        })
        .collect()
}

/// Recomputes performance profiles over a solver subset: ratios are rebuilt
/// from raw costs with best-in-subset denominators, never sliced from the
/// full-set ratios.
pub fn profile_subset(
    m: &CostMatrix,
    subset: &[String],
    tau_grid: &[f64],
) -> Result<Vec<ProfileCurve>, MetricsError> {
    if subset.is_empty() {
        return Err(MetricsError::Validation("empty solver subset".into()));
    }
    let indices: Vec<usize> = subset
        .iter()
        .map(|id| {
            m.solvers.iter().position(|s| s == id).ok_or_else(|| {
                MetricsError::Validation(format!("solver `{id}` not in the cost matrix"))
            })
        })
        .collect::<Result<_, _>>()?;
    let sub = CostMatrix {
        problems: m.problems.clone(),
        solvers: subset.to_vec(),
        cost: m
            .cost
            .iter()
            .map(|row| indices.iter().map(|&s| row[s]).collect())
            .collect(),
        converged: m
            .converged
            .iter()
            .map(|row| indices.iter().map(|&s| row[s]).collect())
            .collect(),
    };
    let ratios = performance_ratios(&sub)?;
    performance_profile(&ratios, &sub.solvers, tau_grid)
}

fn check_grid(grid: &[f64], min: f64) -> Result<(), MetricsError> {
    if grid.is_empty() {
        return Err(MetricsError::Validation("empty grid".into()));
    }
    if grid.iter().any(|&g| g < min) {
        return Err(MetricsError::Validation(format!(
            "grid values must be >= {min}"
        )));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(MetricsError::Validation("grid must be ascending".into()));
    }
    Ok(())
}

/// Default log2-spaced tau grid covering all finite ratios.
pub fn default_log_tau_grid(ratios: &[Vec<f64>]) -> Vec<f64> {
    let max_finite = ratios
        .iter()
        .flatten()
        .filter(|r| r.is_finite())
        .fold(1.0f64, |m, &r| m.max(r));
    let top = max_finite.log2().ceil().max(1.0) as i32;
    (0..=top).map(|j| 2.0f64.powi(j)).collect()
}

/// Default linear tau grid covering all finite ratios.
pub fn default_linear_tau_grid(ratios: &[Vec<f64>], points: usize) -> Vec<f64> {
    let max_finite = ratios
        .iter()
        .flatten()
        .filter(|r| r.is_finite())
        .fold(1.0f64, |m, &r| m.max(r));
    let points = points.max(2);
    (0..points)
        .map(|i| 1.0 + (max_finite - 1.0) * i as f64 / (points - 1) as f64)
        .collect()
}

// ---------------------------------------------------------------------------
// Competitive tables and customized measures
// ---------------------------------------------------------------------------

/// Per solver and factor: fraction of problems with `T_s <= c * T_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompetitiveTable {
    pub solvers: Vec<String>,
    pub factors: Vec<(String, f64)>,
    /// `fractions[s][f]` in [0, 1].
    pub fractions: Vec<Vec<f64>>,
}

pub fn default_competitive_factors() -> Vec<(String, f64)> {
    vec![
        ("competitive".to_string(), 2.0),
        ("very competitive".to_string(), 4.0 / 3.0),
    ]
}

pub fn competitive_summary(
    times: &[Vec<f64>],
    solvers: &[String],
    factors: &[(String, f64)],
) -> Result<CompetitiveTable, MetricsError> {
    if times.is_empty() {
        return Err(MetricsError::Validation("empty problem set".into()));
    }
    for row in times {
        for &t in row {
            if t.is_nan() || t <= 0.0 {
                return Err(MetricsError::DataIntegrity(format!(
                    "nonpositive time {t} in competitive summary"
                )));
            }
        }
    }
    let mins: Vec<f64> = times
        .iter()
        .map(|row| row.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let fractions = (0..solvers.len())
        .map(|s| {
            factors
                .iter()
                .map(|(_, c)| {
                    let count = times
                        .iter()
                        .zip(&mins)
                        .filter(|(row, &tmin)| row[s] <= c * tmin)
                        .count();
                    count as f64 / times.len() as f64
                })
                .collect()
        })
        .collect();
    Ok(CompetitiveTable {
        solvers: solvers.to_vec(),
        factors: factors.to_vec(),
        fractions,
    })
}

/// Relative objective measure in [0, 1]: gap to the optimum normalized by
/// the worst value observed among all solvers.
pub fn relative_objective_measure(f_hat: f64, f_star: f64, f_w: f64) -> Result<f64, MetricsError> {
    if f_w <= f_star {
        return Err(MetricsError::Validation(
            "degenerate denominator: f_w <= f_star (all solvers identical); skip problem".into(),
        ));
    }
    if f_hat < f_star || f_hat > f_w {
        return Err(MetricsError::DataIntegrity(format!(
            "f_hat = {f_hat} outside [f_star = {f_star}, f_w = {f_w}]"
        )));
    }
    Ok((f_hat - f_star) / (f_w - f_star))
}

/// Best-known substitution for problems without a known solution: for each
/// problem, `f_star` is taken as the minimum `f_best` over all runs.
/// Returns `None` for problems with no finite value.
pub fn best_known_value(f_bests: &[f64]) -> Option<f64> {
    f_bests
        .iter()
        .copied()
        .filter(|f| f.is_finite())
        .fold(None, |acc: Option<f64>, f| {
            Some(acc.map_or(f, |a| a.min(f)))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_exact_solution_hits_cap() {
        let r = accuracy_measures(1.0, 0.0, 0.0, None, None, None, 16.0).unwrap();
        assert_eq!(r.gamma, 16.0);
    }

    #[test]
    fn gamma_log_arithmetic() {
        let r = accuracy_measures(1.0, 1e-3, 0.0, None, None, None, 16.0).unwrap();
        assert_eq!(r.f_acc_l, Some(-3.0));
        assert_eq!(r.gamma, 3.0);
    }

    #[test]
    fn gamma_cap_applies() {
        let r = accuracy_measures(1.0, 1e-20, 0.0, None, None, None, 16.0).unwrap();
        assert_eq!(r.gamma, 16.0);
    }

    #[test]
    fn better_than_optimal_is_rejected() {
        assert!(matches!(
            accuracy_measures(1.0, -1e-6, 0.0, None, None, None, 16.0),
            Err(MetricsError::DataIntegrity(_))
        ));
    }

    #[test]
    fn normalized_accuracy_identity() {
        let r = accuracy_measures(5.0, 1.0, 0.0, None, None, None, 16.0).unwrap();
        assert_eq!(r.f_acc_n, Some(r.f_acc / 5.0));
    }

    #[test]
    fn violation_summary_mixed() {
        let v = constraint_violation_summary(&[-1.0, 0.5, 2.0]).unwrap();
        assert_eq!(v.sum, 2.5);
        assert_eq!(v.sq_sum, 4.25);
        assert_eq!(v.mean, 2.5 / 3.0);
        assert_eq!(v.product_violated, 1.0);
    }

    #[test]
    fn violation_summary_feasible() {
        let v = constraint_violation_summary(&[-1.0, -0.5]).unwrap();
        assert_eq!(v, ViolationSummary { sum: 0.0, sq_sum: 0.0, mean: 0.0, product_violated: 1.0 });
    }

    #[test]
    fn violation_summary_single() {
        let v = constraint_violation_summary(&[3.0]).unwrap();
        assert_eq!((v.sum, v.sq_sum, v.mean, v.product_violated), (3.0, 9.0, 3.0, 3.0));
    }

    #[test]
    fn passes_abs_f() {
        let ok = passes(
            &ConvergenceTest::AbsF { eps: 1e-2 },
            "p",
            1.0,
            5e-3,
            &[],
            Some(0.0),
            None,
        )
        .unwrap();
        assert!(ok);
    }

    #[test]
    fn passes_x_dist() {
        let ok = passes(
            &ConvergenceTest::XDist { eps: 1e-2 },
            "beale",
            10.0,
            1e-5,
            &[3.004, 0.498],
            Some(0.0),
            Some(&[3.0, 0.5]),
        )
        .unwrap();
        assert!(ok);
    }

    #[test]
    fn rel_f_degenerate_start_errors() {
        assert!(passes(
            &ConvergenceTest::RelF { eps: 1e-2 },
            "p",
            0.0,
            0.0,
            &[],
            Some(0.0),
            None
        )
        .is_err());
    }

    #[test]
    fn success_rate_counts() {
        assert_eq!(success_rate(&[true, true, true, false]).unwrap(), 0.75);
        assert_eq!(success_rate(&[false, false]).unwrap(), 0.0);
        assert_eq!(success_rate(&[true]).unwrap(), 1.0);
    }

    fn matrix(
        problems: usize,
        solvers: &[&str],
        cost: Vec<Vec<f64>>,
        converged: Vec<Vec<bool>>,
    ) -> CostMatrix {
        CostMatrix {
            problems: (0..problems).map(|i| format!("p{i}")).collect(),
            solvers: solvers.iter().map(|s| s.to_string()).collect(),
            cost,
            converged,
        }
    }

    #[test]
    fn ratios_basic() {
        let m = matrix(
            1,
            &["A", "B"],
            vec![vec![2.0, 4.0]],
            vec![vec![true, true]],
        );
        assert_eq!(performance_ratios(&m).unwrap(), vec![vec![1.0, 2.0]]);
    }

    #[test]
    fn failed_solver_gets_infinite_ratio() {
        let m = matrix(
            1,
            &["A", "B"],
            vec![vec![2.0, 0.5]],
            vec![vec![true, false]],
        );
        let r = performance_ratios(&m).unwrap();
        assert_eq!(r[0][0], 1.0);
        assert!(r[0][1].is_infinite());
    }

    #[test]
    fn perf_profile_counting() {
        // Ratios for one solver on 4 problems: {1, 1, 2, inf}.
        let ratios = vec![
            vec![1.0],
            vec![1.0],
            vec![2.0],
            vec![f64::INFINITY],
        ];
        let curves =
            performance_profile(&ratios, &["A".to_string()], &[1.0, 2.0, 1e6]).unwrap();
        assert_eq!(curves[0].breakpoints, vec![(1.0, 0.5), (2.0, 0.75), (1e6, 0.75)]);
    }

    #[test]
    fn single_converged_solver_profile_is_one() {
        let ratios = vec![vec![1.0], vec![1.0]];
        let curves = performance_profile(&ratios, &["A".to_string()], &[1.0, 4.0]).unwrap();
        assert!(curves[0].breakpoints.iter().all(|(_, v)| *v == 1.0));
    }

    #[test]
    fn data_profile_quotients() {
        // dims (1,2,3), t = (10,12,100): quotients 5, 4, 25.
        let t = vec![vec![10.0], vec![12.0], vec![100.0]];
        let curves = data_profile(&t, &[1, 2, 3], &["A".to_string()], &[5.0]).unwrap();
        assert_eq!(curves[0].breakpoints, vec![(5.0, 2.0 / 3.0)]);
    }

    #[test]
    fn data_profile_independent_of_other_solvers() {
        let t2 = vec![vec![10.0, 3.0], vec![12.0, 90.0], vec![100.0, 7.0]];
        let t1 = vec![vec![10.0], vec![12.0], vec![100.0]];
        let grid = [0.0, 2.0, 5.0, 30.0];
        let both = data_profile(&t2, &[1, 2, 3], &["A".to_string(), "B".to_string()], &grid).unwrap();
        let alone = data_profile(&t1, &[1, 2, 3], &["A".to_string()], &grid).unwrap();
        assert_eq!(both[0].breakpoints, alone[0].breakpoints);
    }

    #[test]
    fn accuracy_profile_counting() {
        let gammas = vec![vec![5.0], vec![6.2], vec![3.0], vec![16.0]];
        let curves = accuracy_profile(&gammas, &["A".to_string()], &[4.0, 6.0, 16.0]).unwrap();
        assert_eq!(curves[0].breakpoints, vec![(4.0, 0.75), (6.0, 0.5), (16.0, 0.25)]);
    }

    #[test]
    fn accuracy_profile_cap_case() {
        let gammas = vec![vec![16.0]; 3];
        let grid: Vec<f64> = (0..=16).map(|i| i as f64).collect();
        let curves = accuracy_profile(&gammas, &["A".to_string()], &grid).unwrap();
        assert!(curves[0].breakpoints.iter().all(|(_, v)| *v == 1.0));
    }

    #[test]
    fn subset_identity_matches_full_profile() {
        let m = matrix(
            2,
            &["A", "B"],
            vec![vec![1.0, 2.0], vec![3.0, 1.5]],
            vec![vec![true, true], vec![true, true]],
        );
        let grid = [1.0, 2.0, 4.0];
        let full =
            performance_profile(&performance_ratios(&m).unwrap(), &m.solvers, &grid).unwrap();
        let sub = profile_subset(&m, &m.solvers.clone(), &grid).unwrap();
        assert_eq!(full, sub);
    }

    #[test]
    fn subset_recomputes_denominators() {
        let m = matrix(
            1,
            &["A", "B", "C"],
            vec![vec![1.0, 2.0, 3.0]],
            vec![vec![true, true, true]],
        );
        let curves = profile_subset(&m, &["B".to_string(), "C".to_string()], &[1.0, 1.5]).unwrap();
        // r_B = 1, r_C = 1.5 after removing A.
        assert_eq!(curves[0].breakpoints, vec![(1.0, 1.0), (1.5, 1.0)]);
        assert_eq!(curves[1].breakpoints, vec![(1.0, 0.0), (1.5, 1.0)]);
    }

    #[test]
    fn competitive_thresholds() {
        let times = vec![vec![10.0, 13.0, 21.0]];
        let solvers: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let t = competitive_summary(&times, &solvers, &default_competitive_factors()).unwrap();
        // A: both; B: very competitive (13 <= 13.33) and competitive; C: neither.
        assert_eq!(t.fractions[0], vec![1.0, 1.0]);
        assert_eq!(t.fractions[1], vec![1.0, 1.0]);
        assert_eq!(t.fractions[2], vec![0.0, 0.0]);
    }

    #[test]
    fn competitive_five_fourths_sensitivity() {
        let times = vec![vec![10.0, 13.0, 21.0]];
        let solvers: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let factors = vec![("5/4".to_string(), 1.25)];
        let t = competitive_summary(&times, &solvers, &factors).unwrap();
        // B at 13 > 12.5 drops out.
        assert_eq!(t.fractions[1], vec![0.0]);
    }

    #[test]
    fn relative_measure_examples() {
        assert_eq!(relative_objective_measure(2.0, 0.0, 10.0).unwrap(), 0.2);
        assert_eq!(relative_objective_measure(0.0, 0.0, 10.0).unwrap(), 0.0);
        assert_eq!(relative_objective_measure(10.0, 0.0, 10.0).unwrap(), 1.0);
        assert!(relative_objective_measure(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn gamma_digit_property() {
        // One decade of gap reduction gains exactly one digit.
        let a = accuracy_measures(1.0, 1e-4, 0.0, None, None, None, 16.0).unwrap();
        let b = accuracy_measures(1.0, 1e-5, 0.0, None, None, None, 16.0).unwrap();
        assert!((b.gamma - a.gamma - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scale_invariance_of_ratios() {
        let m = matrix(
            2,
            &["A", "B"],
            vec![vec![3.0, 7.0], vec![2.0, 5.0]],
            vec![vec![true, true], vec![true, true]],
        );
        let mut scaled = m.clone();
        for row in &mut scaled.cost {
            for t in row.iter_mut() {
                *t *= 16.0; // power of two: exactly representable scaling
            }
        }
        assert_eq!(
            performance_ratios(&m).unwrap(),
            performance_ratios(&scaled).unwrap()
        );
    }

    #[test]
    fn best_known_ignores_non_finite() {
        assert_eq!(best_known_value(&[f64::INFINITY, 2.0, 1.5]), Some(1.5));
        assert_eq!(best_known_value(&[f64::NAN]), None);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// Random cost matrices with ~20% failures.
        fn matrices() -> impl Strategy<Value = CostMatrix> {
            (1usize..12, 1usize..5)
                .prop_flat_map(|(np, ns)| {
                    let cell = (1.0e-3..1.0e3f64, proptest::bool::weighted(0.8));
                    proptest::collection::vec(proptest::collection::vec(cell, ns), np)
                })
                .prop_map(|cells| CostMatrix {
                    problems: (0..cells.len()).map(|p| format!("p{p}")).collect(),
                    solvers: (0..cells[0].len()).map(|s| format!("s{s}")).collect(),
                    cost: cells
                        .iter()
                        .map(|row| row.iter().map(|(c, _)| *c).collect())
                        .collect(),
                    converged: cells
                        .iter()
                        .map(|row| row.iter().map(|(_, b)| *b).collect())
                        .collect(),
                })
        }

        proptest! {
            #[test]
            fn performance_profiles_are_monotone_in_unit_range(m in matrices()) {
                let ratios = performance_ratios(&m).unwrap();
                let grid = default_log_tau_grid(&ratios);
                // ProfileCurve construction asserts range and monotonicity.
                let curves = performance_profile(&ratios, &m.solvers, &grid).unwrap();
                for c in curves {
                    prop_assert!(c.breakpoints.iter().all(|(_, v)| (0.0..=1.0).contains(v)));
                }
            }

            #[test]
            fn ratios_are_bitwise_invariant_under_power_of_two_scaling(
                m in matrices(),
                exp in -20i32..20,
            ) {
                let lambda = 2.0f64.powi(exp);
                let mut scaled = m.clone();
                for row in &mut scaled.cost {
                    for t in row.iter_mut() {
                        *t *= lambda;
                    }
                }
                // Power-of-two scalings are exact, so the ratios match bitwise.
                prop_assert_eq!(
                    performance_ratios(&m).unwrap(),
                    performance_ratios(&scaled).unwrap()
                );
            }

            #[test]
            fn ratios_are_scale_invariant_within_rounding(
                m in matrices(),
                lambda in 1.0e-6..1.0e6f64,
            ) {
                let mut scaled = m.clone();
                for row in &mut scaled.cost {
                    for t in row.iter_mut() {
                        *t *= lambda;
                    }
                }
                let a = performance_ratios(&m).unwrap();
                let b = performance_ratios(&scaled).unwrap();
                for (ra, rb) in a.iter().flatten().zip(b.iter().flatten()) {
                    if ra.is_finite() {
                        // Two rounded multiplies and one divide: a few ulps.
                        let ulps = (ra.to_bits() as i64).abs_diff(rb.to_bits() as i64);
                        prop_assert!(ulps <= 4, "{ra} vs {rb}: {ulps} ulps");
                    } else {
                        prop_assert!(rb.is_infinite());
                    }
                }
            }

            #[test]
            fn gamma_is_capped_and_monotone_in_the_gap(
                start_gap in 1.0e-6..1.0e6f64,
                d1 in 0.0..14.0f64,
                d2 in 0.0..14.0f64,
            ) {
                let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
                let big_gap = start_gap * 10.0f64.powf(-lo);
                let small_gap = start_gap * 10.0f64.powf(-hi);
                let a = accuracy_measures(start_gap, big_gap, 0.0, None, None, None, 16.0).unwrap();
                let b = accuracy_measures(start_gap, small_gap, 0.0, None, None, None, 16.0).unwrap();
                prop_assert!((0.0..=16.0).contains(&a.gamma));
                prop_assert!((0.0..=16.0).contains(&b.gamma));
                prop_assert!(b.gamma >= a.gamma - 1e-12, "smaller gap cannot lose digits");
            }

            #[test]
            fn violation_aggregates_are_nonnegative_and_consistent(
                g in proptest::collection::vec(-10.0..10.0f64, 1..10),
            ) {
                let v = constraint_violation_summary(&g).unwrap();
                prop_assert!(v.sum >= 0.0 && v.sq_sum >= 0.0 && v.mean >= 0.0);
                prop_assert!((v.mean - v.sum / g.len() as f64).abs() == 0.0);
                let feasible = g.iter().all(|gi| *gi <= 0.0);
                prop_assert_eq!(v.sum == 0.0, feasible);
                if feasible {
                    prop_assert_eq!(v.product_violated, 1.0);
                }
            }
        }
    }
}
