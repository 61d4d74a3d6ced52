//! Benchmark sweeps over (problem, α, method) cells and Dolan-Moré
//! performance profiles of the results.

mod profile;
mod suite;

pub use profile::{performance_profile, write_profile_csv, PerformanceProfile, ProfileCurve, ProfileMetric};
pub use suite::{
    load_suite_dir, read_rows, run_suite, synthetic_suite, write_rows, BenchRow, BenchmarkSuite, SuiteProblem,
    DEFAULT_ALPHAS,
};
