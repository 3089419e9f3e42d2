//! Built-in problem suites.

use std::sync::Arc;

use super::functions as f;
use super::{Problem, ProblemBuilder, ProblemError, ScalarFn, TestSet, VectorFn};

fn unconstrained(
    id: &str,
    n: usize,
    obj: fn(&[f64]) -> f64,
    grad: fn(&[f64]) -> Vec<f64>,
    x0: Vec<f64>,
    x_star: Vec<f64>,
) -> Problem {
    let objective: ScalarFn = Arc::new(obj);
    let gradient: VectorFn = Arc::new(grad);
    ProblemBuilder::new(id, n, objective)
        .gradient(gradient)
        .x_standard(x0)
        .solution(x_star, 0.0)
        .tag("unconstrained")
        .build()
        .expect("built-in problem must validate")
}

fn classic20() -> Vec<Problem> {
    let mut ps = Vec::new();
    for n in [2usize, 5, 10] {
        ps.push(unconstrained(
            &format!("sphere-{n}"),
            n,
            f::sphere,
            f::sphere_grad,
            vec![1.0; n],
            vec![0.0; n],
        ));
    }
    ps.push(unconstrained(
        "rosenbrock-2",
        2,
        f::rosenbrock,
        f::rosenbrock_grad,
        vec![-1.2, 1.0],
        vec![1.0, 1.0],
    ));
    ps.push(unconstrained(
        "rosenbrock-5",
        5,
        f::rosenbrock,
        f::rosenbrock_grad,
        vec![-1.2, 1.0, -1.2, 1.0, 1.0],
        vec![1.0; 5],
    ));
    ps.push(unconstrained(
        "beale",
        2,
        f::beale,
        f::beale_grad,
        vec![1.0, 1.0],
        vec![3.0, 0.5],
    ));
    ps.push(unconstrained(
        "booth",
        2,
        f::booth,
        f::booth_grad,
        vec![0.0, 0.0],
        vec![1.0, 3.0],
    ));
    ps.push(unconstrained(
        "matyas",
        2,
        f::matyas,
        f::matyas_grad,
        vec![1.0, 1.0],
        vec![0.0, 0.0],
    ));
    ps.push(unconstrained(
        "himmelblau",
        2,
        f::himmelblau,
        f::himmelblau_grad,
        vec![0.0, 0.0],
        vec![3.0, 2.0],
    ));
    for n in [2usize, 5] {
        ps.push(unconstrained(
            &format!("zakharov-{n}"),
            n,
            f::zakharov,
            f::zakharov_grad,
            vec![1.0; n],
            vec![0.0; n],
        ));
    }
    for n in [2usize, 5] {
        let mut p = unconstrained(
            &format!("rastrigin-{n}"),
            n,
            f::rastrigin,
            f::rastrigin_grad,
            vec![2.0; n],
            vec![0.0; n],
        );
        p.tags.insert("hard".to_string());
        ps.push(p);
    }
    for n in [2usize, 5] {
        let mut p = unconstrained(
            &format!("ackley-{n}"),
            n,
            f::ackley,
            f::ackley_grad,
            vec![1.5; n],
            vec![0.0; n],
        );
        p.tags.insert("hard".to_string());
        ps.push(p);
    }
    for n in [2usize, 5] {
        let mut p = unconstrained(
            &format!("griewank-{n}"),
            n,
            f::griewank,
            f::griewank_grad,
            vec![10.0; n],
            vec![0.0; n],
        );
        p.tags.insert("hard".to_string());
        ps.push(p);
    }
    for n in [2usize, 5] {
        let mut p = unconstrained(
            &format!("levy-{n}"),
            n,
            f::levy,
            f::levy_grad,
            vec![3.0; n],
            vec![1.0; n],
        );
        p.tags.insert("hard".to_string());
        ps.push(p);
    }
    ps.push(unconstrained(
        "three-hump-camel",
        2,
        f::three_hump_camel,
        f::three_hump_camel_grad,
        vec![1.0, 1.0],
        vec![0.0, 0.0],
    ));
    ps.push(unconstrained(
        "sum-squares-5",
        5,
        f::sum_squares,
        f::sum_squares_grad,
        vec![1.0; 5],
        vec![0.0; 5],
    ));
    ps
}

fn beale_rosenbrock() -> Vec<Problem> {
    vec![
        unconstrained(
            "beale",
            2,
            f::beale,
            f::beale_grad,
            vec![1.0, 1.0],
            vec![3.0, 0.5],
        ),
        unconstrained(
            "rosenbrock-2",
            2,
            f::rosenbrock,
            f::rosenbrock_grad,
            vec![-1.2, 1.0],
            vec![1.0, 1.0],
        ),
    ]
}

fn constrained_toy() -> Vec<Problem> {
    // min ||x||^2  s.t.  x1 + x2 >= 1; minimizer (0.5, 0.5), f* = 0.5.
    let half_plane = ProblemBuilder::new("constrained-sphere", 2, Arc::new(f::sphere))
        .gradient(Arc::new(f::sphere_grad))
        .constraint(Arc::new(|x: &[f64]| 1.0 - x[0] - x[1]))
        .x_standard(vec![1.0, 1.0])
        .solution(vec![0.5, 0.5], 0.5)
        .tag("constrained")
        .build()
        .expect("built-in problem must validate");
    // min (x1-2)^2 + (x2-1)^2  s.t.  x1 <= 1, x2 <= 1; minimizer (1, 1), f* = 1.
    let corner = ProblemBuilder::new(
        "constrained-corner",
        2,
        Arc::new(|x: &[f64]| (x[0] - 2.0).powi(2) + (x[1] - 1.0).powi(2)),
    )
    .gradient(Arc::new(|x: &[f64]| {
        vec![2.0 * (x[0] - 2.0), 2.0 * (x[1] - 1.0)]
    }))
    .constraint(Arc::new(|x: &[f64]| x[0] - 1.0))
    .constraint(Arc::new(|x: &[f64]| x[1] - 1.0))
    .x_standard(vec![0.0, 0.0])
    .solution(vec![1.0, 1.0], 1.0)
    .tag("constrained")
    .build()
    .expect("built-in problem must validate");
    vec![half_plane, corner]
}

/// Names of the registered built-in suites.
pub fn suite_names() -> Vec<String> {
    vec![
        "classic20".to_string(),
        "beale-rosenbrock".to_string(),
        "constrained-toy".to_string(),
    ]
}

/// Looks up a built-in suite by name.
pub fn builtin_suite(name: &str) -> Result<TestSet, ProblemError> {
    let problems = match name {
        "classic20" => classic20(),
        "beale-rosenbrock" => beale_rosenbrock(),
        "constrained-toy" => constrained_toy(),
        _ => {
            return Err(ProblemError::UnknownSuite {
                name: name.to_string(),
                known: suite_names(),
            })
        }
    };
    TestSet::new(name, problems)
}

/// Finds a problem by id across all built-in suites.
pub fn find_problem(id: &str) -> Result<Problem, ProblemError> {
    for suite in suite_names() {
        let ts = builtin_suite(&suite)?;
        if let Some(p) = ts.get(id) {
            return Ok(p.clone());
        }
    }
    Err(ProblemError::UnknownProblem {
        name: id.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic20_has_at_least_20_known_solutions() {
        let ts = builtin_suite("classic20").unwrap();
        assert!(ts.problems.len() >= 20);
        assert!(!ts.small_set_warning());
        for p in &ts.problems {
            assert!(p.x_star.is_some(), "{} lacks x_star", p.id);
            assert!(p.f_star.is_some(), "{} lacks f_star", p.id);
            assert!(p.has_gradient(), "{} lacks gradient", p.id);
        }
    }

    #[test]
    fn beale_rosenbrock_contents() {
        let ts = builtin_suite("beale-rosenbrock").unwrap();
        let beale = ts.get("beale").unwrap();
        assert_eq!(beale.x_star.as_deref(), Some(&[3.0, 0.5][..]));
        assert_eq!(beale.f_star, Some(0.0));
        assert_eq!(beale.objective(&[3.0, 0.5]), 0.0);
        let rosen = ts.get("rosenbrock-2").unwrap();
        assert_eq!(rosen.x_star.as_deref(), Some(&[1.0, 1.0][..]));
        assert_eq!(rosen.objective(&[1.0, 1.0]), 0.0);
    }

    #[test]
    fn constrained_toy_has_constraints() {
        let ts = builtin_suite("constrained-toy").unwrap();
        for p in &ts.problems {
            assert!(p.constraint_count() >= 1);
        }
        // Sign convention: g > 0 means violated by that amount.
        let p = ts.get("constrained-sphere").unwrap();
        let e = p.evaluate(&[-0.5, -0.5]).unwrap();
        assert_eq!(e.g, vec![2.0]);
    }

    #[test]
    fn unknown_suite_lists_names() {
        let err = builtin_suite("nope").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("classic20"));
        assert!(msg.contains("beale-rosenbrock"));
    }
}
