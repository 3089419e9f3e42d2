//! Stable seed derivation.
//!
//! Per-run seeds are derived by hashing the master seed together with the
//! identifiers of the run (problem, solver, starting point, repeat index)
//! using 64-bit FNV-1a. Adding a solver or problem to an experiment never
//! perturbs the random streams of the others, and the derivation is
//! platform-independent.

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

/// 64-bit FNV-1a over a byte stream.
fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    let mut h = state;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Incremental FNV-1a hasher over labelled components.
///
/// Each component is fed as its byte representation followed by a `0xff`
/// separator so that `("ab", "c")` and `("a", "bc")` hash differently.
#[derive(Debug, Clone, Copy)]
pub struct StableHasher {
    state: u64,
}

impl StableHasher {
    pub fn new() -> Self {
        Self { state: FNV_OFFSET }
    }

    pub fn write_u64(mut self, v: u64) -> Self {
        self.state = fnv1a(self.state, &v.to_le_bytes());
        self.state = fnv1a(self.state, &[0xff]);
        self
    }

    pub fn write_str(mut self, s: &str) -> Self {
        self.state = fnv1a(self.state, s.as_bytes());
        self.state = fnv1a(self.state, &[0xff]);
        self
    }

    pub fn finish(self) -> u64 {
        self.state
    }
}

impl Default for StableHasher {
    fn default() -> Self {
        Self::new()
    }
}

/// Seed for one solver run within an experiment.
pub fn run_seed(
    master_seed: u64,
    problem_id: &str,
    solver_id: &str,
    start_id: &str,
    repeat_index: u32,
) -> u64 {
    StableHasher::new()
        .write_u64(master_seed)
        .write_str(problem_id)
        .write_str(solver_id)
        .write_str(start_id)
        .write_u64(u64::from(repeat_index))
        .finish()
}

/// Seed for the starting-point generator of one problem.
pub fn starting_point_seed(master_seed: u64, problem_id: &str) -> u64 {
    StableHasher::new()
        .write_u64(master_seed)
        .write_str(problem_id)
        .write_str("starting-points")
        .finish()
}
