//! Seeded random search: uniform sampling in a box around the incumbent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Oracle, SolverConfig, SolverRun, SolverStatus};

/// One iteration samples one uniform point in the box `incumbent ± radius`
/// and moves only on strict improvement. Fully determined by `seed`.
pub fn random_search(oracle: &mut Oracle, x0: &[f64], cfg: &SolverConfig, seed: u64) -> SolverRun {
    let radius = cfg.parameter("box_radius", 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut x = x0.to_vec();
    let mut iterations = 0u64;
    let mut iterates = vec![x.clone()];

    let mut f = match oracle.objective(&x) {
        Ok(f) => f,
        Err(stop) => {
            return SolverRun {
                status: SolverStatus::from_stop(stop),
                iterations,
                iterates,
            }
        }
    };

    loop {
        let cand: Vec<f64> = x
            .iter()
            .map(|xi| {
                let u: f64 = rng.random();
                xi - radius + 2.0 * radius * u
            })
            .collect();
        let fc = match oracle.objective(&cand) {
            Ok(fc) => fc,
            Err(stop) => {
                return SolverRun {
                    status: SolverStatus::from_stop(stop),
                    iterations,
                    iterates,
                }
            }
        };
        if fc < f {
            x = cand;
            f = fc;
        }
        iterations += 1;
        iterates.push(x.clone());
    }
}
