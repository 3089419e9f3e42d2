//! Reference solvers behind a uniform instrumentation layer.
//!
//! Solvers never see the raw [`Problem`]: every objective, gradient, and
//! constraint call goes through an [`Oracle`], which counts fundamental
//! evaluations, tracks the incumbent, records the iterate trace, enforces the
//! evaluation budget, and detects fixed-target crossings. Counts are taken at
//! the wrapper, never self-reported by solvers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problems::Problem;

mod compass;
mod gradient;
mod nelder_mead;
mod random;

pub use compass::compass_search;
pub use gradient::gradient_descent;
pub use nelder_mead::nelder_mead;
pub use random::random_search;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("unknown solver `{id}`; registered solvers: {known:?}")]
    UnknownSolver { id: String, known: Vec<String> },
    #[error("solver `{solver}` requires a gradient but problem `{problem}` has none")]
    GradientRequired { solver: String, problem: String },
}

/// Configuration of one solver within an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub id: String,
    pub deterministic: bool,
    /// Named numeric parameters; serialized into every run record.
    pub parameters: BTreeMap<String, f64>,
    /// "default" or "hand-tuned: <description>".
    pub provenance: String,
}

impl SolverConfig {
    pub fn new(id: &str, deterministic: bool) -> Self {
        Self {
            id: id.to_string(),
            deterministic,
            parameters: BTreeMap::new(),
            provenance: "default".to_string(),
        }
    }

    pub fn with_parameter(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }

    pub fn parameter(&self, key: &str, default: f64) -> f64 {
        self.parameters.get(key).copied().unwrap_or(default)
    }
}

/// Fundamental-evaluation counts, split by oracle call type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounter {
    pub n_feval: u64,
    pub n_geval: u64,
    pub n_ceval: u64,
}

impl EvalCounter {
    pub fn total(&self) -> u64 {
        self.n_feval + self.n_geval + self.n_ceval
    }
}

/// One entry of the best-so-far history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Objective-evaluation index at which the improvement happened (1-based).
    pub eval_index: u64,
    pub x: Vec<f64>,
    pub f_best: f64,
}

/// Best-so-far history of a run: appended whenever the objective improves.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterateTrace {
    pub entries: Vec<TraceEntry>,
}

/// Control events signalled to a solver through oracle call results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    /// The evaluation budget is exhausted; the triggering call was not made.
    BudgetExhausted,
    /// The fixed-target accuracy was reached by the last objective call.
    TargetReached,
    /// The objective returned a non-finite value.
    EvalError,
}

/// Instrumented view of a problem handed to solvers.
pub struct Oracle<'a> {
    problem: &'a Problem,
    budget: Option<u64>,
    /// Fixed-target crossing: stop once f_best - f_star <= epsilon.
    target: Option<(f64, f64)>,
    counter: EvalCounter,
    trace: Option<IterateTrace>,
    best: Option<(Vec<f64>, f64)>,
    stop: Option<Stop>,
    /// n_feval at the fixed-target crossing, when it happened.
    crossing_feval: Option<u64>,
}

impl<'a> Oracle<'a> {
    pub fn new(problem: &'a Problem) -> Self {
        Self {
            problem,
            budget: None,
            target: None,
            counter: EvalCounter::default(),
            trace: None,
            best: None,
            stop: None,
            crossing_feval: None,
        }
    }

    /// Limits the total number of fundamental evaluations (objective,
    /// gradient, and constraint calls all count).
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    /// Stops the run at the first objective call with `f - f_star <= epsilon`.
    pub fn with_target(mut self, f_star: f64, epsilon: f64) -> Self {
        self.target = Some((f_star, epsilon));
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(IterateTrace::default());
        self
    }

    pub fn problem(&self) -> &Problem {
        self.problem
    }

    pub fn dimension(&self) -> usize {
        self.problem.n
    }

    pub fn counter(&self) -> EvalCounter {
        self.counter
    }

    pub fn best(&self) -> Option<(&[f64], f64)> {
        self.best.as_ref().map(|(x, f)| (x.as_slice(), *f))
    }

    pub fn trace(&self) -> Option<&IterateTrace> {
        self.trace.as_ref()
    }

    pub fn take_trace(&mut self) -> Option<IterateTrace> {
        self.trace.take()
    }

    pub fn stop_reason(&self) -> Option<Stop> {
        self.stop
    }

    /// n_feval at the fixed-target crossing (the cost `t_{p,s}`).
    pub fn crossing_feval(&self) -> Option<u64> {
        self.crossing_feval
    }

    fn charge(&mut self, units: u64) -> Result<(), Stop> {
        if let Some(stop) = self.stop {
            return Err(stop);
        }
        if let Some(b) = self.budget {
            if self.counter.total() + units > b {
                self.stop = Some(Stop::BudgetExhausted);
                return Err(Stop::BudgetExhausted);
            }
        }
        Ok(())
    }

    /// Objective call. Updates the incumbent and trace, and checks the
    /// fixed-target crossing after the evaluation.
    pub fn objective(&mut self, x: &[f64]) -> Result<f64, Stop> {
        self.charge(1)?;
        let f = self.problem.objective(x);
        self.counter.n_feval += 1;
        if !f.is_finite() {
            self.stop = Some(Stop::EvalError);
            return Err(Stop::EvalError);
        }
        let improved = match &self.best {
            Some((_, fb)) => f < *fb,
            None => true,
        };
        if improved {
            self.best = Some((x.to_vec(), f));
            let eval_index = self.counter.n_feval;
            if let Some(trace) = &mut self.trace {
                trace.entries.push(TraceEntry {
                    eval_index,
                    x: x.to_vec(),
                    f_best: f,
                });
            }
        }
        if let Some((f_star, eps)) = self.target {
            let f_best = self.best.as_ref().map(|(_, fb)| *fb).unwrap_or(f);
            if f_best - f_star <= eps {
                self.stop = Some(Stop::TargetReached);
                self.crossing_feval = Some(self.counter.n_feval);
                return Err(Stop::TargetReached);
            }
        }
        Ok(f)
    }

    pub fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>, Stop> {
        self.charge(1)?;
        let g = self
            .problem
            .gradient(x)
            .expect("gradient-using solver constructed for gradient-free problem");
        self.counter.n_geval += 1;
        if g.iter().any(|gi| !gi.is_finite()) {
            self.stop = Some(Stop::EvalError);
            return Err(Stop::EvalError);
        }
        Ok(g)
    }

    /// Evaluates all constraints; each `g_i` counts as one fundamental
    /// evaluation.
    pub fn constraints(&mut self, x: &[f64]) -> Result<Vec<f64>, Stop> {
        let m = self.problem.constraint_count() as u64;
        if m == 0 {
            return Ok(Vec::new());
        }
        self.charge(m)?;
        let g = self.problem.constraint_values(x);
        self.counter.n_ceval += m;
        Ok(g)
    }
}

/// Why a solver stopped, before the runner maps it onto a run status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    /// Fixed-target accuracy reached.
    TargetReached,
    /// Evaluation budget exhausted.
    BudgetExhausted,
    /// The solver's own step/size tolerance was reached.
    StepConverged,
    /// Internal failure (degenerate simplex, non-finite gradient, ...).
    Failure,
    /// The objective produced a non-finite value.
    EvalError,
}

impl SolverStatus {
    pub fn from_stop(stop: Stop) -> Self {
        match stop {
            Stop::BudgetExhausted => SolverStatus::BudgetExhausted,
            Stop::TargetReached => SolverStatus::TargetReached,
            Stop::EvalError => SolverStatus::EvalError,
        }
    }
}

/// Outcome of one solver run. The incumbent and counters live on the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverRun {
    pub status: SolverStatus,
    /// Number of iterations performed (solver-specific unit: poll cycles for
    /// compass search, simplex steps for Nelder-Mead, ...).
    pub iterations: u64,
    /// Incumbent after each iteration, starting with the initial point.
    pub iterates: Vec<Vec<f64>>,
}

/// Registered solver ids with their default configurations.
pub fn registry() -> Vec<SolverConfig> {
    vec![
        SolverConfig::new("compass", true)
            .with_parameter("initial_step", 1.0)
            .with_parameter("min_step", 1e-12),
        SolverConfig::new("nelder-mead", true)
            .with_parameter("reflection", 1.0)
            .with_parameter("expansion", 2.0)
            .with_parameter("contraction", 0.5)
            .with_parameter("shrink", 0.5)
            .with_parameter("simplex_scale", 0.05),
        SolverConfig::new("gradient-descent", true)
            .with_parameter("step0", 1.0)
            .with_parameter("armijo_c", 1e-4)
            .with_parameter("grad_tol", 1e-12),
        SolverConfig::new("random-search", false).with_parameter("box_radius", 1.0),
    ]
}

/// Default configuration for a registered solver id.
pub fn default_config(id: &str) -> Result<SolverConfig, SolverError> {
    registry()
        .into_iter()
        .find(|c| c.id == id)
        .ok_or_else(|| SolverError::UnknownSolver {
            id: id.to_string(),
            known: registry().into_iter().map(|c| c.id).collect(),
        })
}

/// Runs the solver named by `cfg.id` on the oracle.
pub fn run_solver(
    oracle: &mut Oracle,
    x0: &[f64],
    cfg: &SolverConfig,
    seed: u64,
) -> Result<SolverRun, SolverError> {
    match cfg.id.as_str() {
        "compass" => Ok(compass_search(oracle, x0, cfg)),
        "nelder-mead" => Ok(nelder_mead(oracle, x0, cfg)),
        "gradient-descent" => gradient_descent(oracle, x0, cfg),
        "random-search" => Ok(random_search(oracle, x0, cfg, seed)),
        _ => Err(SolverError::UnknownSolver {
            id: cfg.id.clone(),
            known: registry().into_iter().map(|c| c.id).collect(),
        }),
    }
}
