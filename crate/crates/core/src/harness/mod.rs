//! Experiment runner behind the `ihosvd` command-line tool.

pub mod config;
pub mod experiments;
pub mod selftest;
pub mod svg;
pub mod table;

pub use config::{ExperimentConfig, ExperimentKind, SolverChoice};
pub use experiments::{
    build_instance, exit_code, run_completion, run_convergence, run_method, run_phase_transition,
    run_recoverability, trial_seed, CellResult, Instance, Method,
};
pub use selftest::run_selftest;
pub use table::Table;
