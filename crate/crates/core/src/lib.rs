//! Solvers for the max-mean dispersion problem: pick a subset `M` of at
//! least two elements maximising `Σ_{i<j ∈ M} d_ij / |M|`.
//!
//! The main solver is a memetic algorithm ([`memetic::solve`]) combining
//! uniform or greedy crossover with a one-flip tabu search
//! ([`tabu::tabu_search`]). A multi-start tabu baseline, an exhaustive
//! oracle for small instances and a benchmark harness are included.

pub mod bench;
pub mod budget;
pub mod crossover;
pub mod error;
pub mod eval;
pub mod instance;
pub mod memetic;
pub mod oracle;
pub mod tabu;
pub mod verify;

pub use budget::Budget;
pub use crossover::CrossoverKind;
pub use error::{Error, Result};
pub use eval::{evaluate_full, Evaluation, Solution};
pub use instance::{
    generate, read_instance, write_instance, GeneratorConfig, Instance, InstanceKind,
};
pub use memetic::{multi_start_tabu, single_tabu, solve, MemeticParams, RunResult};
pub use oracle::brute_force;
pub use tabu::{tabu_search, TabuParams, TenureSchedule};
