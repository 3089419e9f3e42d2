//! Test problems, built-in suites, starting points, and the shift transform.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub mod functions;
mod suites;

pub use suites::{builtin_suite, find_problem, suite_names};

/// Objective or constraint function.
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Gradient function.
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("problem `{id}`: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        got: usize,
    },
    #[error("problem `{id}`: objective(x_star) = {f_at_star} disagrees with f_star = {f_star}")]
    InconsistentSolution {
        id: String,
        f_at_star: f64,
        f_star: f64,
    },
    #[error("unknown suite `{name}`; registered suites: {known:?}")]
    UnknownSuite { name: String, known: Vec<String> },
    #[error("unknown problem `{name}`; not found in any registered suite")]
    UnknownProblem { name: String },
    #[error("test set `{id}`: duplicate problem id `{dup}`")]
    DuplicateProblem { id: String, dup: String },
    #[error("test set `{id}` is empty")]
    EmptyTestSet { id: String },
}

/// A test problem: an objective over `R^n`, optional gradient, inequality
/// constraints `g_i(x) <= 0`, a standard starting point, and an optional
/// known solution.
#[derive(Clone)]
pub struct Problem {
    pub id: String,
    pub n: usize,
    objective: ScalarFn,
    gradient: Option<VectorFn>,
    constraints: Vec<ScalarFn>,
    pub x_standard: Vec<f64>,
    pub x_star: Option<Vec<f64>>,
    pub f_star: Option<f64>,
    pub tags: BTreeSet<String>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("id", &self.id)
            .field("n", &self.n)
            .field("m", &self.constraints.len())
            .field("x_standard", &self.x_standard)
            .field("x_star", &self.x_star)
            .field("f_star", &self.f_star)
            .finish()
    }
}

/// Objective and constraint values at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub f: f64,
    pub g: Vec<f64>,
}

pub struct ProblemBuilder {
    problem: Problem,
}

impl ProblemBuilder {
    pub fn new(id: impl Into<String>, n: usize, objective: ScalarFn) -> Self {
        let id = id.into();
        Self {
            problem: Problem {
                id,
                n,
                objective,
                gradient: None,
                constraints: Vec::new(),
                x_standard: vec![0.0; n],
                x_star: None,
                f_star: None,
                tags: BTreeSet::new(),
            },
        }
    }

    pub fn gradient(mut self, g: VectorFn) -> Self {
        self.problem.gradient = Some(g);
        self
    }

    pub fn constraint(mut self, g: ScalarFn) -> Self {
        self.problem.constraints.push(g);
        self
    }

    pub fn x_standard(mut self, x: Vec<f64>) -> Self {
        self.problem.x_standard = x;
        self
    }

    pub fn solution(mut self, x_star: Vec<f64>, f_star: f64) -> Self {
        self.problem.x_star = Some(x_star);
        self.problem.f_star = Some(f_star);
        self
    }

    pub fn f_star(mut self, f_star: f64) -> Self {
        self.problem.f_star = Some(f_star);
        self
    }

    pub fn tag(mut self, t: &str) -> Self {
        self.problem.tags.insert(t.to_string());
        self
    }

    /// Validates dimensions and, when both `x_star` and `f_star` are present,
    /// that the objective actually attains `f_star` at `x_star`.
    pub fn build(self) -> Result<Problem, ProblemError> {
        let p = self.problem;
        if p.x_standard.len() != p.n {
            return Err(ProblemError::DimensionMismatch {
                id: p.id,
                expected: p.n,
                got: p.x_standard.len(),
            });
        }
        if let Some(xs) = &p.x_star {
            if xs.len() != p.n {
                return Err(ProblemError::DimensionMismatch {
                    id: p.id,
                    expected: p.n,
                    got: xs.len(),
                });
            }
            if let Some(fs) = p.f_star {
                let f_at_star = (p.objective)(xs);
                if (f_at_star - fs).abs() > 1e-10 * fs.abs().max(1.0) {
                    return Err(ProblemError::InconsistentSolution {
                        id: p.id,
                        f_at_star,
                        f_star: fs,
                    });
                }
            }
        }
        Ok(p)
    }
}

impl Problem {
    pub fn builder(id: impl Into<String>, n: usize, objective: ScalarFn) -> ProblemBuilder {
        ProblemBuilder::new(id, n, objective)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        (self.objective)(x)
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(x))
    }

    /// Number of inequality constraints `m`; 0 means unconstrained.
    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraint_values(&self, x: &[f64]) -> Vec<f64> {
        self.constraints.iter().map(|g| g(x)).collect()
    }

    /// Uniform evaluation entry point: objective plus all constraint values.
    /// Non-finite results are returned as data, not errors; the runner
    /// records them as evaluation failures.
    pub fn evaluate(&self, x: &[f64]) -> Result<Evaluation, ProblemError> {
        if x.len() != self.n {
            return Err(ProblemError::DimensionMismatch {
                id: self.id.clone(),
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(Evaluation {
            f: (self.objective)(x),
            g: self.constraint_values(x),
        })
    }

    /// Translates the whole problem by `shift`: the returned problem has
    /// objective `x -> f(x - shift)`, shifted constraints, and starting point
    /// and solution moved by `+shift`. `f_star` is unchanged.
    pub fn shifted(&self, shift: &[f64]) -> Result<Problem, ProblemError> {
        if shift.len() != self.n {
            return Err(ProblemError::DimensionMismatch {
                id: self.id.clone(),
                expected: self.n,
                got: shift.len(),
            });
        }
        let sub = |x: &[f64], s: &[f64]| -> Vec<f64> {
            x.iter().zip(s).map(|(xi, si)| xi - si).collect()
        };
        let add = |x: &[f64], s: &[f64]| -> Vec<f64> {
            x.iter().zip(s).map(|(xi, si)| xi + si).collect()
        };
        let shift_owned = shift.to_vec();
        let f = Arc::clone(&self.objective);
        let objective: ScalarFn = {
            let s = shift_owned.clone();
            Arc::new(move |x: &[f64]| f(&sub(x, &s)))
        };
        let gradient: Option<VectorFn> = self.gradient.as_ref().map(|g| {
            let g = Arc::clone(g);
            let s = shift_owned.clone();
            let vf: VectorFn = Arc::new(move |x: &[f64]| g(&sub(x, &s)));
            vf
        });
        let constraints: Vec<ScalarFn> = self
            .constraints
            .iter()
            .map(|c| {
                let c = Arc::clone(c);
                let s = shift_owned.clone();
                let sf: ScalarFn = Arc::new(move |x: &[f64]| c(&sub(x, &s)));
                sf
            })
            .collect();
        Ok(Problem {
            id: format!("{}+shift", self.id),
            n: self.n,
            objective,
            gradient,
            constraints,
            x_standard: add(&self.x_standard, shift),
            x_star: self.x_star.as_ref().map(|xs| add(xs, shift)),
            f_star: self.f_star,
            tags: self.tags.clone(),
        })
    }

    /// Manifest entry used by `optbench list --json`.
    pub fn manifest(&self) -> ProblemInfo {
        ProblemInfo {
            id: self.id.clone(),
            n: self.n,
            m: self.constraint_count(),
            has_gradient: self.has_gradient(),
            x_standard: self.x_standard.clone(),
            x_star: self.x_star.clone(),
            f_star: self.f_star,
            tags: self.tags.iter().cloned().collect(),
        }
    }
}

/// JSON-facing description of one problem.
#[derive(Debug, Clone, Serialize)]
pub struct ProblemInfo {
    pub id: String,
    pub n: usize,
    pub m: usize,
    pub has_gradient: bool,
    pub x_standard: Vec<f64>,
    pub x_star: Option<Vec<f64>>,
    pub f_star: Option<f64>,
    pub tags: Vec<String>,
}

/// An ordered collection of test problems with unique ids.
#[derive(Debug, Clone)]
pub struct TestSet {
    pub id: String,
    pub problems: Vec<Problem>,
}

impl TestSet {
    pub fn new(id: impl Into<String>, problems: Vec<Problem>) -> Result<Self, ProblemError> {
        let id = id.into();
        if problems.is_empty() {
            return Err(ProblemError::EmptyTestSet { id });
        }
        let mut seen = BTreeSet::new();
        for p in &problems {
            if !seen.insert(p.id.clone()) {
                return Err(ProblemError::DuplicateProblem {
                    id,
                    dup: p.id.clone(),
                });
            }
        }
        Ok(Self { id, problems })
    }

    /// Set when the collection is smaller than the recommended minimum of 20
    /// problems; results should then be treated as a case study.
    pub fn small_set_warning(&self) -> bool {
        self.problems.len() < 20
    }

    pub fn get(&self, problem_id: &str) -> Option<&Problem> {
        self.problems.iter().find(|p| p.id == problem_id)
    }
}

/// How a [`StartingPointSet`] was generated; regeneration from this record
/// is bit-identical.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartProvenance {
    pub seed: u64,
    pub radius: f64,
    pub rule: String,
}

/// One named starting point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartPoint {
    pub id: String,
    pub x: Vec<f64>,
}

/// Starting points for one problem, generated and stored ahead of any run so
/// that every solver sees identical points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartingPointSet {
    pub problem_id: String,
    pub points: Vec<StartPoint>,
    pub provenance: StartProvenance,
}

const PERTURB_RULE: &str = "uniform-box-v1";

/// Draws `count` starting points from the axis-aligned box
/// `x_standard ± radius`. The first point is always `x_standard` itself;
/// the rest are uniform in the box, deterministically from `seed`.
pub fn perturb_starting_points(
    p: &Problem,
    radius: f64,
    count: usize,
    seed: u64,
) -> StartingPointSet {
    assert!(count >= 1, "count must be at least 1");
    assert!(radius >= 0.0, "radius must be nonnegative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    points.push(StartPoint {
        id: "s0".to_string(),
        x: p.x_standard.clone(),
    });
    for k in 1..count {
        let x: Vec<f64> = p
            .x_standard
            .iter()
            .map(|c| {
                let u: f64 = rng.random();
                c - radius + 2.0 * radius * u
            })
            .collect();
        points.push(StartPoint {
            id: format!("s{k}"),
            x,
        });
    }
    StartingPointSet {
        problem_id: p.id.clone(),
        points,
        provenance: StartProvenance {
            seed,
            radius,
            rule: PERTURB_RULE.to_string(),
        },
    }
}
