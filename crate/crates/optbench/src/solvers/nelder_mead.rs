//! Nelder-Mead simplex search with the standard reflection/expansion/
//! contraction/shrink coefficients (1, 2, 0.5, 0.5).

use super::{Oracle, SolverConfig, SolverRun, SolverStatus, Stop};

struct Vertex {
    x: Vec<f64>,
    f: f64,
}

pub fn nelder_mead(oracle: &mut Oracle, x0: &[f64], cfg: &SolverConfig) -> SolverRun {
    let alpha = cfg.parameter("reflection", 1.0);
    let gamma = cfg.parameter("expansion", 2.0);
    let rho = cfg.parameter("contraction", 0.5);
    let sigma = cfg.parameter("shrink", 0.5);
    let scale = cfg.parameter("simplex_scale", 0.05);

    let n = x0.len();
    let mut iterations = 0u64;
    let mut iterates = vec![x0.to_vec()];

    macro_rules! eval {
        ($x:expr) => {
            match oracle.objective($x) {
                Ok(f) => f,
                Err(stop) => return finish(stop, iterations, iterates),
            }
        };
    }

    // Initial simplex: x0 plus n axis steps of h = scale * max(1, |x0|_inf).
    let h = scale * x0.iter().fold(1.0f64, |m, xi| m.max(xi.abs()));
    let mut simplex = Vec::with_capacity(n + 1);
    let f0 = eval!(x0);
    simplex.push(Vertex {
        x: x0.to_vec(),
        f: f0,
    });
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += h;
        let f = eval!(&x);
        simplex.push(Vertex { x, f });
    }

    loop {
        // Stable sort keeps lower vertex indices first on ties.
        simplex.sort_by(|a, b| a.f.partial_cmp(&b.f).expect("finite objective values"));

        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.x.iter().zip(&simplex[0].x).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        let spread = simplex[n].f - simplex[0].f;
        if diameter < 1e-12 && spread.abs() < 1e-12 {
            return SolverRun {
                status: SolverStatus::StepConverged,
                iterations,
                iterates,
            };
        }
        if simplex_volume(&simplex) < 1e-300 && diameter > 1e-8 {
            return SolverRun {
                status: SolverStatus::Failure,
                iterations,
                iterates,
            };
        }

        // Centroid of all vertices but the worst.
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v.x[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].x.clone();
        let f_worst = simplex[n].f;
        let f_best = simplex[0].f;
        let f_second_worst = simplex[n - 1].f;

        let reflected: Vec<f64> = (0..n)
            .map(|j| centroid[j] + alpha * (centroid[j] - worst[j]))
            .collect();
        let f_reflected = eval!(&reflected);

        if f_reflected < f_best {
            let expanded: Vec<f64> = (0..n)
                .map(|j| centroid[j] + gamma * (reflected[j] - centroid[j]))
                .collect();
            let f_expanded = eval!(&expanded);
            simplex[n] = if f_expanded < f_reflected {
                Vertex {
                    x: expanded,
                    f: f_expanded,
                }
            } else {
                Vertex {
                    x: reflected,
                    f: f_reflected,
                }
            };
        } else if f_reflected < f_second_worst {
            simplex[n] = Vertex {
                x: reflected,
                f: f_reflected,
            };
        } else {
            // Contract toward the better of the worst vertex and its reflection.
            let (anchor, f_anchor) = if f_reflected < f_worst {
                (&reflected, f_reflected)
            } else {
                (&worst, f_worst)
            };
            let contracted: Vec<f64> = (0..n)
                .map(|j| centroid[j] + rho * (anchor[j] - centroid[j]))
                .collect();
            let f_contracted = eval!(&contracted);
            if f_contracted < f_anchor {
                simplex[n] = Vertex {
                    x: contracted,
                    f: f_contracted,
                };
            } else {
                // Shrink all vertices toward the best.
                let best_x = simplex[0].x.clone();
                for v in simplex.iter_mut().skip(1) {
                    for (vj, bj) in v.x.iter_mut().zip(&best_x) {
                        *vj = bj + sigma * (*vj - bj);
                    }
                    v.f = eval!(&v.x);
                }
            }
        }

        iterations += 1;
        let incumbent = simplex
            .iter()
            .min_by(|a, b| a.f.partial_cmp(&b.f).expect("finite objective values"))
            .expect("nonempty simplex");
        iterates.push(incumbent.x.clone());
    }
}

/// Volume of the simplex spanned by the vertices: |det(edges)| / n!.
fn simplex_volume(simplex: &[Vertex]) -> f64 {
    let n = simplex.len() - 1;
    let mut m: Vec<Vec<f64>> = simplex[1..]
        .iter()
        .map(|v| v.x.iter().zip(&simplex[0].x).map(|(a, b)| a - b).collect())
        .collect();
    // Gaussian elimination with partial pivoting.
    let mut det = 1.0f64;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
        }
        det *= m[col][col];
        let (upper, lower) = m.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower.iter_mut() {
            let factor = row[col] / pivot_row[col];
            for (rj, pj) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *rj -= factor * pj;
            }
        }
    }
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    det.abs() / factorial
}

fn finish(stop: Stop, iterations: u64, iterates: Vec<Vec<f64>>) -> SolverRun {
    SolverRun {
        status: SolverStatus::from_stop(stop),
        iterations,
        iterates,
    }
}
