//! Convergence tables, slope fits and their serialization.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::Direction;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "h,dt,N,error,stderr,log_factor";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub h: f64,
    /// Zero when time is integrated exactly.
    pub dt: f64,
    pub n_steps: usize,
    pub error: f64,
    /// Monte Carlo standard error, zero for exact estimators.
    pub stderr: f64,
    pub log_factor: f64,
}

impl ReportRow {
    pub fn new(h: f64, dt: f64, n_steps: usize, error: f64, stderr: f64, horizon: f64, rho: f64) -> Self {
        Self { h, dt, n_steps, error, stderr, log_factor: log_factor(horizon, h, dt, rho) }
    }

    /// The standard error exceeds half the measured error.
    pub fn sampling_dominated(&self) -> bool {
        self.stderr > 0.5 * self.error
    }
}

/// `ln(T / (h^{2/rho} + dt))`.
pub fn log_factor(horizon: f64, h: f64, dt: f64, rho: f64) -> f64 {
    (horizon / (h.powf(2.0 / rho) + dt)).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the fit residuals in log space.
    pub residual: f64,
    pub rows_used: usize,
}

/// Least-squares slope of `log(error)` (divided by the log factor when
/// `log_correct`) against `log dt` or `log h`, skipping the first
/// `drop_coarse` rows.
pub fn fit_slope(rows: &[ReportRow], direction: Direction, log_correct: bool, drop_coarse: usize) -> Result<SlopeFit> {
    let rows = rows.get(drop_coarse..).unwrap_or(&[]);
    if rows.len() < 3 {
        return Err(Error::Config(format!("slope fit needs at least 3 rows, {} left", rows.len())));
    }
    let mut xs = Vec::with_capacity(rows.len());
    let mut ys = Vec::with_capacity(rows.len());
    for r in rows {
        if !(r.error > 0.0) {
            return Err(Error::InvalidParameter(format!("slope fit needs positive errors, got {}", r.error)));
        }
        if log_correct && !(r.log_factor > 0.0) {
            return Err(Error::InvalidParameter(format!("log factor must be positive, got {}", r.log_factor)));
        }
        let x = match direction {
            Direction::Time => r.dt,
            Direction::Space => r.h,
        };
        xs.push(x.ln());
        ys.push(if log_correct { (r.error / r.log_factor).ln() } else { r.error.ln() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("slope fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(SlopeFit { slope, intercept, residual: (ss / n).sqrt(), rows_used: rows.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMeta {
    pub study: String,
    pub direction: Direction,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    /// How the reference value was obtained.
    pub reference: String,
    pub drop_coarse: usize,
    pub sampling_dominated_rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ReportRow>,
    pub slope_raw: Option<SlopeFit>,
    pub slope_log_corrected: Option<SlopeFit>,
    pub meta: ReportMeta,
}

impl ConvergenceReport {
    pub(crate) fn assemble(rows: Vec<ReportRow>, mut meta: ReportMeta) -> Self {
        meta.sampling_dominated_rows =
            rows.iter().enumerate().filter(|(_, r)| r.sampling_dominated()).map(|(i, _)| i).collect();
        let slope_raw = fit_slope(&rows, meta.direction, false, meta.drop_coarse).ok();
        let slope_log_corrected = fit_slope(&rows, meta.direction, true, meta.drop_coarse).ok();
        Self { rows, slope_raw, slope_log_corrected, meta }
    }

    /// `h,dt,N,error,stderr,log_factor` with 17 significant digits and LF
    /// line endings.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.rows.len() + 1));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{},{},{}",
                sci17(r.h),
                sci17(r.dt),
                r.n_steps,
                sci17(r.error),
                sci17(r.stderr),
                sci17(r.log_factor)
            )
            .expect("writing to a string");
        }
        s
    }

    /// Sidecar with the slopes and provenance of the table.
    pub fn meta_toml(&self) -> String {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            meta: &'a ReportMeta,
            #[serde(skip_serializing_if = "Option::is_none")]
            slope_raw: Option<SlopeFit>,
            #[serde(skip_serializing_if = "Option::is_none")]
            slope_log_corrected: Option<SlopeFit>,
        }
        toml::to_string(&Sidecar { meta: &self.meta, slope_raw: self.slope_raw, slope_log_corrected: self.slope_log_corrected })
            .expect("metadata serializes")
    }

    /// Writes the CSV to `path` and the metadata to `<path>.meta.toml`.
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        std::fs::write(meta_path(path), self.meta_toml())?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let fmt = |f: &Option<SlopeFit>| f.map_or("n/a".to_string(), |f| format!("{:.4} (residual {:.2e})", f.slope, f.residual));
        format!(
            "{} ({:?} ladder, {} rows): slope {}, log-corrected {}",
            self.meta.study,
            self.meta.direction,
            self.rows.len(),
            fmt(&self.slope_raw),
            fmt(&self.slope_log_corrected)
        )
    }
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.toml");
    PathBuf::from(s)
}

/// Scientific notation with 17 significant digits.
pub fn sci17(v: f64) -> String {
    format!("{v:.16e}")
}
