//! A benchmarking harness for optimization solvers.
//!
//! The crate is organized around the lifecycle of a benchmarking study:
//!
//! - [`problems`]: test problems, built-in suites, starting-point generation,
//!   and the shift transformation used to detect hidden structure.
//! - [`solvers`]: reference algorithms behind a uniform instrumentation layer
//!   that counts fundamental evaluations and records iterate histories.
//! - [`runner`]: experiment orchestration (fixed-target / fixed-cost
//!   protocols, repeats, timing) and per-run record persistence.
//! - [`metrics`]: accuracy measures, constraint-violation aggregates,
//!   success rates, performance/data/accuracy profiles, competitive tables.
//! - [`report`]: CSV/LaTeX tables and deterministic SVG plots.
//! - [`cli`]: the `optbench` command-line front end.

pub mod cli;
pub mod metrics;
pub mod problems;
pub mod report;
pub mod runner;
pub mod seeding;
pub mod solvers;
