//! Accuracy metrics, a brute-force erf fitting reference and the benchmark
//! harness.

mod bench;
mod metrics;
mod oracle;

pub use bench::{run_benchmark, BenchReport, BenchRow, CellSpec, Suite};
pub use metrics::{circle_radius_error, line_residuals, line_rmse, rms, slant_residuals, slant_rmse};
pub use oracle::{erf_fit, erf_fit_oracle, ErfFit};
