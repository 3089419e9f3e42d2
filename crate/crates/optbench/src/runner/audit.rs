//! Shift-invariance audit: runs a deterministic solver on a problem and on
//! its shifted translate, then compares the unshifted iterate sequences.
//! A large deviation suggests the solver exploits hidden structure of the
//! test set (integer-valued solutions, special placement of the origin).

use crate::problems::Problem;
use crate::solvers::{Oracle, SolverConfig, SolverRun};

use super::RunnerError;

/// Any procedure that drives an oracle from a starting point.
pub type SolverFn<'f> = dyn Fn(&mut Oracle, &[f64]) -> SolverRun + 'f;

pub const DEFAULT_AUDIT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct ShiftAudit {
    pub problem_id: String,
    pub solver_id: String,
    pub shift: Vec<f64>,
    /// Max componentwise deviation between base iterates and unshifted
    /// shifted-run iterates; infinite when iterate counts differ.
    pub max_deviation: f64,
    /// |f_best(base) - f_best(shifted)|.
    pub final_f_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub base_iterations: u64,
    pub shifted_iterations: u64,
}

/// Audits an arbitrary solver procedure.
pub fn audit_shift_invariance_with(
    problem: &Problem,
    solver_id: &str,
    solver: &SolverFn,
    shift: &[f64],
    budget: u64,
    tolerance: f64,
) -> Result<ShiftAudit, RunnerError> {
    let shifted_problem = problem.shifted(shift)?;
    let x0 = problem.x_standard.clone();
    let x0_shifted: Vec<f64> = x0.iter().zip(shift).map(|(a, b)| a + b).collect();

    let mut base_oracle = Oracle::new(problem).with_budget(budget);
    let base = solver(&mut base_oracle, &x0);
    let base_best = base_oracle.best().map(|(_, f)| f);

    let mut shifted_oracle = Oracle::new(&shifted_problem).with_budget(budget);
    let shifted = solver(&mut shifted_oracle, &x0_shifted);
    let shifted_best = shifted_oracle.best().map(|(_, f)| f);

    let max_deviation = if base.iterates.len() == shifted.iterates.len() {
        base.iterates
            .iter()
            .zip(&shifted.iterates)
            .flat_map(|(a, b)| {
                a.iter()
                    .zip(b.iter().zip(shift))
                    .map(|(ai, (bi, si))| (ai - (bi - si)).abs())
            })
            .fold(0.0f64, f64::max)
    } else {
        f64::INFINITY
    };
    let final_f_gap = match (base_best, shifted_best) {
        (Some(a), Some(b)) => (a - b).abs(),
        _ => f64::INFINITY,
    };
    let pass = max_deviation <= tolerance && final_f_gap <= tolerance;

    Ok(ShiftAudit {
        problem_id: problem.id.clone(),
        solver_id: solver_id.to_string(),
        shift: shift.to_vec(),
        max_deviation,
        final_f_gap,
        tolerance,
        pass,
        base_iterations: base.iterations,
        shifted_iterations: shifted.iterations,
    })
}

/// Audits a registered solver; rejects non-deterministic solvers, for which
/// the comparison is undefined.
pub fn audit_shift_invariance(
    problem: &Problem,
    cfg: &SolverConfig,
    shift: &[f64],
    budget: u64,
) -> Result<ShiftAudit, RunnerError> {
    if !cfg.deterministic {
        return Err(RunnerError::NonDeterministicAudit {
            solver: cfg.id.clone(),
        });
    }
    let cfg = cfg.clone();
    let id = cfg.id.clone();
    audit_shift_invariance_with(
        problem,
        &id,
        &move |oracle: &mut Oracle, x0: &[f64]| {
            crate::solvers::run_solver(oracle, x0, &cfg, 0).expect("registered solver")
        },
        shift,
        budget,
        DEFAULT_AUDIT_TOLERANCE,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{builtin_suite, find_problem};
    use crate::solvers::default_config;

    #[test]
    fn compass_on_sphere_passes() {
        let p = find_problem("sphere-2").unwrap();
        let cfg = default_config("compass").unwrap();
        let audit = audit_shift_invariance(&p, &cfg, &[1.0, 1.0], 10_000).unwrap();
        assert!(audit.pass, "{audit:?}");
        assert!(audit.max_deviation <= 1e-12);
    }

    #[test]
    fn zero_shift_deviation_is_exactly_zero() {
        let p = find_problem("beale").unwrap();
        let cfg = default_config("compass").unwrap();
        let audit = audit_shift_invariance(&p, &cfg, &[0.0, 0.0], 10_000).unwrap();
        assert_eq!(audit.max_deviation, 0.0);
        assert_eq!(audit.final_f_gap, 0.0);
    }

    #[test]
    fn non_deterministic_solver_rejected() {
        let p = find_problem("sphere-2").unwrap();
        let cfg = default_config("random-search").unwrap();
        assert!(matches!(
            audit_shift_invariance(&p, &cfg, &[1.0, 1.0], 100),
            Err(RunnerError::NonDeterministicAudit { .. })
        ));
    }

    /// A test double that snaps every candidate to the integer lattice. On
    /// problems whose minimizer has integer coordinates it looks fine
    /// unshifted, but a fractional shift exposes it.
    fn snapping_solver(oracle: &mut Oracle, x0: &[f64]) -> SolverRun {
        let snap = |x: &[f64]| -> Vec<f64> { x.iter().map(|v| v.round()).collect() };
        let mut x = snap(x0);
        let mut iterates = vec![x.clone()];
        let mut f = match oracle.objective(&x) {
            Ok(f) => f,
            Err(stop) => {
                return SolverRun {
                    status: crate::solvers::SolverStatus::from_stop(stop),
                    iterations: 0,
                    iterates,
                }
            }
        };
        let n = x.len();
        let mut iterations = 0;
        for _ in 0..50 {
            let mut improved = false;
            'poll: for i in 0..n {
                for sign in [1.0, -1.0] {
                    let mut cand = x.clone();
                    cand[i] += sign;
                    let fc = match oracle.objective(&cand) {
                        Ok(fc) => fc,
                        Err(stop) => {
                            return SolverRun {
                                status: crate::solvers::SolverStatus::from_stop(stop),
                                iterations,
                                iterates,
                            }
                        }
                    };
                    if fc < f {
                        x = cand;
                        f = fc;
                        improved = true;
                        break 'poll;
                    }
                }
            }
            iterations += 1;
            iterates.push(x.clone());
            if !improved {
                break;
            }
        }
        SolverRun {
            status: crate::solvers::SolverStatus::StepConverged,
            iterations,
            iterates,
        }
    }

    #[test]
    fn integer_snapping_double_fails_audit() {
        // Minimizer of sphere-2 sits at the integer point (0, 0).
        let suite = builtin_suite("classic20").unwrap();
        let p = suite.get("sphere-2").unwrap();
        let audit = audit_shift_invariance_with(
            p,
            "snapper",
            &snapping_solver,
            &[0.5, 0.5],
            10_000,
            DEFAULT_AUDIT_TOLERANCE,
        )
        .unwrap();
        assert!(!audit.pass, "{audit:?}");
    }
}
