//! Benchmark harness for the `secant-fw` solvers: grid runs with CSV output,
//! the secant versus Newton root-finding comparison and the acceptance
//! self-test.

pub mod config;
pub mod harness;
pub mod output;
pub mod rootbench;
pub mod selftest;

pub use config::{desk_size, BenchConfig};
pub use harness::{geomean, run_benchmark, summarize, BenchResult, RunRecord, SummaryRow};
pub use output::{emit_plot_data, write_results};
pub use rootbench::{rootbench, RootBenchRow};
