//! Experiment harness: configuration, convergence studies, slope fits and
//! CSV reports.

pub mod config;
pub mod presets;
pub mod report;
pub mod studies;

pub use config::{Direction, ExperimentConfig, LadderPoint};
pub use report::{fit_slope, ConvergenceReport, ReportRow, SlopeFit};
pub use studies::{
    deterministic_convergence, strong_convergence_mc, weak_convergence, weak_convergence_exact, weak_convergence_mc,
    Functional,
};

use crate::error::Result;
use crate::reference::mittag_leffler;

/// `(x, E_rho(-x))` on `points` equispaced arguments in `[0, x_max]`.
pub fn ml_table(rho: f64, x_max: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    let n = points.max(2) - 1;
    (0..=n)
        .map(|i| {
            let x = x_max * i as f64 / n as f64;
            Ok((x, mittag_leffler(rho, x)?))
        })
        .collect()
}
