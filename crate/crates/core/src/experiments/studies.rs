//! Convergence studies. All discrete quantities are evaluated in the
//! closed-form `M`-orthonormal eigenbasis of the uniform mesh, where the
//! scheme decouples into scalar recursions.

use rayon::prelude::*;

use super::config::{
    Direction, EstimatorKind, ExperimentConfig, FunctionalName, KernelVariantName, LadderPoint, TimeIntegration,
};
use super::report::{ConvergenceReport, ReportMeta, ReportRow};
use crate::error::{Error, Result};
use crate::fem1d::{assemble, load_vector_sine, FemOperators, Mesh1D, ModalBasis};
use crate::kernel_cq::cq_weights;
use crate::noise::{CovarianceSpec, ModalNoiseMap, SeedPolicy};
use crate::reference::{
    exact_second_moment, exact_solution_action, resolvent_mode, SpectralVector, SquaredResolventIntegral,
};
use crate::scalar::{dot, CompensatedSum};
use crate::scheme::modal::{scalar_response, ModalPropagator};

/// Test functionals for weak errors.
///
/// * `NormSq`: `phi(x) = ||x||^2`. Unbounded first derivative, bounded
///   second derivative.
/// * `ExpNegNormSq`: `phi(x) = exp(-||x||^2)`. First and second derivatives
///   bounded.
/// * `LinearSq`: `phi(x) = (x, e_k)^2`. Second derivative `2 e_k (x) e_k`
///   bounded; first derivative bounded on bounded sets only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    NormSq,
    ExpNegNormSq,
    LinearSq { mode: usize },
}

impl Functional {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        match cfg.estimator.functional {
            FunctionalName::NormSq => Self::NormSq,
            FunctionalName::ExpNegNormSq => Self::ExpNegNormSq,
            FunctionalName::LinearSq => Self::LinearSq { mode: cfg.estimator.g_mode },
        }
    }
}

/// Mesh, operators and eigenbasis of one refinement level.
#[derive(Debug, Clone)]
pub struct Grid {
    pub mesh: Mesh1D<f64>,
    pub ops: FemOperators<f64>,
    pub basis: ModalBasis<f64>,
}

impl Grid {
    pub fn new(length: f64, n_elem: usize) -> Result<Self> {
        let mesh = Mesh1D::new(length, n_elem)?;
        let ops = assemble(&mesh);
        let basis = ModalBasis::uniform(&mesh);
        Ok(Self { mesh, ops, basis })
    }

    /// Load vector `(x, phi_i)` of a spectral function.
    pub fn load_of(&self, x: &SpectralVector<f64>) -> Vec<f64> {
        let mut load = vec![0.0; self.mesh.n_dof()];
        for (k, &c) in x.coeffs().iter().enumerate() {
            if c != 0.0 {
                for (l, b) in load.iter_mut().zip(load_vector_sine(&self.mesh, k + 1)) {
                    *l += c * b;
                }
            }
        }
        load
    }

    /// Modal coordinates of `P_h x`.
    pub fn projected_coords(&self, x: &SpectralVector<f64>) -> Vec<f64> {
        self.basis.coords_of_load(&self.load_of(x))
    }

    /// Nodal values of a spectral function.
    pub fn sample(&self, x: &SpectralVector<f64>) -> Vec<f64> {
        self.mesh.nodes().map(|p| x.eval(p)).collect()
    }
}

fn riesz_only(cfg: &ExperimentConfig, what: &str) -> Result<()> {
    if cfg.kernel.variant != KernelVariantName::Riesz {
        return Err(Error::Config(format!("{what} needs the closed-form reference of the riesz kernel")));
    }
    Ok(())
}

fn dt_of(cfg: &ExperimentConfig, p: LadderPoint) -> f64 {
    if p.n_steps == 0 {
        0.0
    } else {
        cfg.domain.horizon / p.n_steps as f64
    }
}

fn row(cfg: &ExperimentConfig, p: LadderPoint, error: f64, stderr: f64) -> ReportRow {
    let h = cfg.domain.length / p.n_elem as f64;
    ReportRow::new(h, dt_of(cfg, p), p.n_steps, error, stderr, cfg.domain.horizon, cfg.kernel.rho)
}

fn meta(cfg: &ExperimentConfig, study: &str, reference: String) -> ReportMeta {
    ReportMeta {
        study: study.into(),
        direction: cfg.ladder.direction,
        config_hash: cfg.hash(),
        seed: cfg.estimator.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        reference,
        drop_coarse: cfg.estimator.drop_coarse,
        sampling_dominated_rows: Vec::new(),
    }
}

/// Runs `f` on a pool of `threads` workers (0: the global pool).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} threads: {e}")))?;
    Ok(pool.install(f))
}

/// Final modal coordinates of the noise-free discrete solution. With
/// `n_steps = 0` time is integrated exactly.
fn propagate_deterministic(cfg: &ExperimentConfig, grid: &Grid, coords: &[f64], n_steps: usize) -> Result<Vec<f64>> {
    let rho = cfg.kernel.rho;
    let t = cfg.domain.horizon;
    let eig = grid.basis.eigenvalues();
    if n_steps == 0 {
        return coords
            .iter()
            .zip(eig)
            .map(|(&c, &lam)| if c == 0.0 { Ok(0.0) } else { Ok(c * resolvent_mode(rho, lam, t)?) })
            .collect();
    }
    let weights = cq_weights(&cfg.kernel_spec()?, t / n_steps as f64, n_steps)?;
    coords
        .par_iter()
        .zip(eig.par_iter())
        .map(|(&c, &lam)| if c == 0.0 { Ok(0.0) } else { Ok(c * scalar_response(lam, &weights, n_steps)?[n_steps]) })
        .collect()
}

/// Deterministic error `||X_h^N - S(T) X_0||` in the discrete `M`-norm, with
/// the exact solution sampled at the nodes.
pub fn deterministic_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    riesz_only(cfg, "det-conv")?;
    if cfg.covariance()?.is_some() {
        return Err(Error::Config("det-conv needs noise.model = \"none\"".into()));
    }
    with_threads(cfg.estimator.threads, || {
        let rho = cfg.kernel.rho;
        let x0 = cfg.initial_data()?;
        let exact = exact_solution_action(rho, &x0, cfg.domain.horizon)?;
        let mut rows = Vec::new();
        for p in cfg.ladder_points() {
            let grid = Grid::new(cfg.domain.length, p.n_elem)?;
            let coords = grid.projected_coords(&x0);
            let fin = propagate_deterministic(cfg, &grid, &coords, p.n_steps)?;
            let nodal = grid.basis.synthesize(&fin);
            let diff: Vec<f64> = nodal.iter().zip(grid.sample(&exact)).map(|(a, b)| a - b).collect();
            rows.push(row(cfg, p, grid.ops.h_norm(&diff), 0.0));
        }
        let reference = "exact resolvent modes S(T)X_0 sampled at the nodes".to_string();
        Ok(ConvergenceReport::assemble(rows, meta(cfg, "deterministic", reference)))
    })?
}

/// Noise modes of the configured covariance projected onto a grid.
fn noise_map(grid: &Grid, cov: Option<&CovarianceSpec<f64>>) -> ModalNoiseMap<f64> {
    let zero = CovarianceSpec::zero(grid.mesh.length());
    ModalNoiseMap::new(&grid.basis, &grid.mesh, cov.unwrap_or(&zero))
}

/// `E ||X_h^N||^2` of the scheme at one ladder point; with `n_steps = 0`
/// the spatial semi-discretization integrated exactly in time.
pub fn discrete_second_moment(
    cfg: &ExperimentConfig,
    p: LadderPoint,
    table: Option<&SquaredResolventIntegral>,
) -> Result<f64> {
    let grid = Grid::new(cfg.domain.length, p.n_elem)?;
    let cov = cfg.covariance()?;
    let coords = grid.projected_coords(&cfg.initial_data()?);
    let variances = noise_map(&grid, cov.as_ref()).modal_variances();
    if p.n_steps == 0 {
        let t = cfg.domain.horizon;
        let fin = propagate_deterministic(cfg, &grid, &coords, 0)?;
        let det: CompensatedSum<f64> = fin.iter().map(|v| v * v).collect();
        let owned;
        let table = match table {
            Some(t) => t,
            None => {
                owned = SquaredResolventIntegral::new(cfg.kernel.rho, cfg.estimator.tolerance)?;
                &owned
            }
        };
        let sto = variances
            .par_iter()
            .zip(grid.basis.eigenvalues().par_iter())
            .map(|(&w, &lam)| if w == 0.0 { Ok(0.0) } else { Ok(w * table.integral(lam, t)?) })
            .collect::<Result<Vec<f64>>>()?;
        return Ok(det.value() + sto.into_iter().collect::<CompensatedSum<f64>>().value());
    }
    let weights = cq_weights(&cfg.kernel_spec()?, cfg.domain.horizon / p.n_steps as f64, p.n_steps)?;
    let prop = ModalPropagator::new(grid.basis.eigenvalues(), &weights, p.n_steps)?;
    Ok(prop.second_moment(&coords, &variances))
}

/// Weak error for `phi = ||.||^2` with exact covariances on both sides.
pub fn weak_convergence_exact(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    riesz_only(cfg, "weak-conv with the exact estimator")?;
    if cfg.estimator.functional != FunctionalName::NormSq {
        return Err(Error::Config("the exact_cov estimator supports functional = \"norm_sq\" only".into()));
    }
    cfg.check_admissibility()?;
    with_threads(cfg.estimator.threads, || {
        let rho = cfg.kernel.rho;
        let cov = cfg.covariance()?;
        let x0 = cfg.initial_data()?;
        let zero = CovarianceSpec::zero(cfg.domain.length);
        let exact = exact_second_moment(rho, &x0, cov.as_ref().unwrap_or(&zero), cfg.domain.horizon, cfg.estimator.tolerance)?;
        let table = SquaredResolventIntegral::new(rho, cfg.estimator.tolerance)?;
        let mut rows = Vec::new();
        for p in cfg.ladder_points() {
            let d = discrete_second_moment(cfg, p, Some(&table))?;
            rows.push(row(cfg, p, (d - exact.total()).abs(), 0.0));
        }
        let reference = format!(
            "exact second moment {:.17e} (deterministic {:.6e}, modes j <= J {:.6e}, analytic tail {:.6e})",
            exact.total(),
            exact.deterministic,
            exact.explicit,
            exact.tail
        );
        Ok(ConvergenceReport::assemble(rows, meta(cfg, "weak_exact", reference)))
    })?
}

/// One grid prepared for path sampling.
struct McGrid {
    grid: Grid,
    prop: ModalPropagator<f64>,
    map: ModalNoiseMap<f64>,
    x0: Vec<f64>,
    g: Option<Vec<f64>>,
    n_steps: usize,
}

impl McGrid {
    fn new(cfg: &ExperimentConfig, p: LadderPoint, functional: Functional) -> Result<Self> {
        let grid = Grid::new(cfg.domain.length, p.n_elem)?;
        let weights = cq_weights(&cfg.kernel_spec()?, cfg.domain.horizon / p.n_steps as f64, p.n_steps)?;
        let prop = ModalPropagator::new(grid.basis.eigenvalues(), &weights, p.n_steps)?;
        let cov = cfg.covariance()?;
        let map = noise_map(&grid, cov.as_ref());
        let x0 = grid.projected_coords(&cfg.initial_data()?);
        let g = match functional {
            Functional::LinearSq { mode } => Some(grid.basis.coords_of_load(&load_vector_sine(&grid.mesh, mode))),
            _ => None,
        };
        Ok(Self { grid, prop, map, x0, g, n_steps: p.n_steps })
    }

    /// Final modal coordinates driven by the fine draws `xi[f * J + j]`
    /// over `n_fine` steps, aggregated into this grid's steps.
    fn sample(&self, xi: &[f64], n_fine: usize, j: usize) -> Vec<f64> {
        let ratio = n_fine / self.n_steps;
        let scale = 1.0 / (ratio as f64).sqrt();
        self.prop.sample_final(&self.x0, &self.map, |step, out| {
            out.iter_mut().for_each(|o| *o = 0.0);
            for f in step * ratio..(step + 1) * ratio {
                for (o, &x) in out.iter_mut().zip(&xi[f * j..(f + 1) * j]) {
                    *o += x;
                }
            }
            out.iter_mut().for_each(|o| *o *= scale);
        })
    }

    fn eval(&self, functional: Functional, x: &[f64]) -> f64 {
        match functional {
            Functional::NormSq => x.iter().map(|v| v * v).sum(),
            Functional::ExpNegNormSq => (-x.iter().map(|v| v * v).sum::<f64>()).exp(),
            Functional::LinearSq { .. } => dot(x, self.g.as_deref().expect("linear functional")).powi(2),
        }
    }

    /// Nodal values prolongated to a nested finer mesh.
    fn prolongate(&self, x: &[f64], fine: &Mesh1D<f64>) -> Vec<f64> {
        let nodal = self.grid.basis.synthesize(x);
        let r = fine.n_elem() / self.grid.mesh.n_elem();
        let at = |i: usize| if i == 0 || i == self.grid.mesh.n_elem() { 0.0 } else { nodal[i - 1] };
        (1..fine.n_elem())
            .map(|k| {
                let (i, off) = (k / r, k % r);
                let w = off as f64 / r as f64;
                if off == 0 {
                    at(i)
                } else {
                    (1.0 - w) * at(i) + w * at(i + 1)
                }
            })
            .collect()
    }
}

/// Mean and standard error of the mean in fixed summation order.
fn mean_stderr(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().collect::<CompensatedSum<f64>>().value() / n;
    let var = values.map(|v| (v - mean).powi(2)).collect::<CompensatedSum<f64>>().value() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn fine_draws(seed: &SeedPolicy, path: u64, n_fine: usize, j: usize) -> Vec<f64> {
    let mut xi = vec![0.0; n_fine * j];
    if j > 0 {
        for (f, chunk) in xi.chunks_mut(j).enumerate() {
            seed.fill_normals(path, f as u64, chunk);
        }
    }
    xi
}

fn mc_ladder(cfg: &ExperimentConfig) -> Vec<LadderPoint> {
    cfg.ladder_points_for(TimeIntegration::Scheme)
}

/// Reference grid for coupled Monte Carlo: refined by `reference_factor` in
/// the laddered parameter.
pub fn reference_point(cfg: &ExperimentConfig) -> LadderPoint {
    let l = &cfg.ladder;
    let ne = l.n_elem.iter().copied().max().unwrap_or(2);
    let n = l.n_steps.iter().copied().max().unwrap_or(1);
    match l.direction {
        Direction::Time => LadderPoint { n_elem: ne, n_steps: n * l.reference_factor },
        Direction::Space => LadderPoint { n_elem: ne * l.reference_factor, n_steps: n },
    }
}

/// Per path and grid, evaluates `f(grid index, final coordinates)`.
/// Results are indexed `[path][grid]`.
fn simulate<F>(cfg: &ExperimentConfig, grids: &[McGrid], f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(usize, &[f64], &[Vec<f64>]) -> f64 + Sync,
{
    let n_fine = grids.iter().map(|g| g.n_steps).max().unwrap_or(1);
    if let Some(g) = grids.iter().find(|g| n_fine % g.n_steps != 0) {
        return Err(Error::Config(format!("step count {} does not divide the finest {n_fine}", g.n_steps)));
    }
    let j = grids.first().map_or(0, |g| g.map.n_noise_modes());
    let seed = SeedPolicy::new(cfg.estimator.seed);
    let paths = cfg.estimator.paths as u64;
    Ok((0..paths)
        .into_par_iter()
        .map(|p| {
            let xi = fine_draws(&seed, p, n_fine, j);
            let finals: Vec<Vec<f64>> = grids.iter().map(|g| g.sample(&xi, n_fine, j)).collect();
            (0..grids.len()).map(|i| f(i, &finals[i], &finals)).collect()
        })
        .collect())
}

/// Monte Carlo estimate of `E phi(X_h^N)` with its standard error.
pub fn monte_carlo_estimate(cfg: &ExperimentConfig, p: LadderPoint, functional: Functional) -> Result<(f64, f64)> {
    with_threads(cfg.estimator.threads, || {
        let grid = McGrid::new(cfg, p, functional)?;
        let grids = [grid];
        let vals = simulate(cfg, &grids, |i, x, _| grids[i].eval(functional, x))?;
        Ok(mean_stderr(vals.iter().map(|v| v[0])))
    })?
}

/// Exact `E (X_h^N, e_k)^2` of the scheme from the modal responses.
pub fn discrete_linear_sq_moment(cfg: &ExperimentConfig, p: LadderPoint, mode: usize) -> Result<f64> {
    let g = McGrid::new(cfg, p, Functional::LinearSq { mode })?;
    let gc = g.g.as_deref().expect("linear functional");
    let n = g.n_steps;
    let mean: f64 = g.x0.iter().zip(gc).enumerate().map(|(i, (&c, &w))| c * w * g.prop.response(i)[n]).sum();
    let mut acc = CompensatedSum::new();
    for j in 1..=g.map.n_noise_modes() {
        for m in 1..=n {
            let s: f64 = g.map.column(j).iter().map(|&(i, b)| g.prop.response(i)[m] * b * gc[i]).sum();
            acc.add(s * s);
        }
    }
    Ok(mean * mean + g.prop.dt() * acc.value())
}

/// Weak error by Monte Carlo. The reference is the exact second moment for
/// `norm_sq`, otherwise the scheme on a finer grid driven by the same
/// Brownian paths, and the error is the mean of the paired differences.
pub fn weak_convergence_mc(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.check_admissibility()?;
    let functional = Functional::from_config(cfg);
    if functional == Functional::NormSq {
        riesz_only(cfg, "weak-conv with norm_sq")?;
    }
    with_threads(cfg.estimator.threads, || {
        let points = mc_ladder(cfg);
        let mut grids = points.iter().map(|&p| McGrid::new(cfg, p, functional)).collect::<Result<Vec<_>>>()?;
        let (rows, reference) = if functional == Functional::NormSq {
            let zero = CovarianceSpec::zero(cfg.domain.length);
            let cov = cfg.covariance()?;
            let exact = exact_second_moment(
                cfg.kernel.rho,
                &cfg.initial_data()?,
                cov.as_ref().unwrap_or(&zero),
                cfg.domain.horizon,
                cfg.estimator.tolerance,
            )?
            .total();
            let vals = simulate(cfg, &grids, |i, x, _| grids[i].eval(functional, x))?;
            let rows = points
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    let (m, se) = mean_stderr(vals.iter().map(|v| v[i]));
                    row(cfg, p, (m - exact).abs(), se)
                })
                .collect::<Vec<_>>();
            (rows, format!("exact second moment {exact:.17e}"))
        } else {
            let rp = reference_point(cfg);
            check_nested(cfg, &points, rp)?;
            grids.push(McGrid::new(cfg, rp, functional)?);
            let last = grids.len() - 1;
            let vals = simulate(cfg, &grids, |i, x, all| {
                if i == last {
                    0.0
                } else {
                    grids[i].eval(functional, x) - grids[last].eval(functional, &all[last])
                }
            })?;
            let rows = points
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    let (m, se) = mean_stderr(vals.iter().map(|v| v[i]));
                    row(cfg, p, m.abs(), se)
                })
                .collect::<Vec<_>>();
            (rows, format!("coupled fine grid n_elem = {}, N = {}", rp.n_elem, rp.n_steps))
        };
        let reference = format!("{reference}; {} paths", cfg.estimator.paths);
        Ok(ConvergenceReport::assemble(rows, meta(cfg, "weak_mc", reference)))
    })?
}

fn check_nested(cfg: &ExperimentConfig, points: &[LadderPoint], rp: LadderPoint) -> Result<()> {
    for p in points {
        if !rp.n_elem.is_multiple_of(p.n_elem) || !rp.n_steps.is_multiple_of(p.n_steps) {
            return Err(Error::Config(format!(
                "ladder point ({}, {}) is not nested in the reference grid ({}, {})",
                p.n_elem, p.n_steps, rp.n_elem, rp.n_steps
            )));
        }
    }
    let _ = cfg;
    Ok(())
}

/// Strong error `(E ||X_h^N - X_ref||^2)^{1/2}` against a coupled reference
/// on a finer grid.
pub fn strong_convergence_mc(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.check_admissibility()?;
    with_threads(cfg.estimator.threads, || {
        let points = mc_ladder(cfg);
        let rp = reference_point(cfg);
        check_nested(cfg, &points, rp)?;
        let mut grids =
            points.iter().map(|&p| McGrid::new(cfg, p, Functional::NormSq)).collect::<Result<Vec<_>>>()?;
        grids.push(McGrid::new(cfg, rp, Functional::NormSq)?);
        let last = grids.len() - 1;
        let fine = &grids[last];
        let vals = simulate(cfg, &grids, |i, x, all| {
            let y = &all[last];
            if grids[i].grid.mesh.n_elem() == fine.grid.mesh.n_elem() {
                x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum()
            } else {
                let u = grids[i].prolongate(x, &fine.grid.mesh);
                let v = fine.grid.basis.synthesize(y);
                let d: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
                fine.grid.ops.h_norm(&d).powi(2)
            }
        })?;
        let rows = points
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let (m, se) = mean_stderr(vals.iter().map(|v| v[i]));
                let e = m.max(0.0).sqrt();
                let se = if e > 0.0 { se / (2.0 * e) } else { 0.0 };
                row(cfg, p, e, se)
            })
            .collect();
        let reference =
            format!("coupled fine grid n_elem = {}, N = {}; {} paths", rp.n_elem, rp.n_steps, cfg.estimator.paths);
        Ok(ConvergenceReport::assemble(rows, meta(cfg, "strong_mc", reference)))
    })?
}

/// Dispatches `weak-conv` on the configured estimator.
pub fn weak_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    match cfg.estimator.kind {
        EstimatorKind::ExactCov => weak_convergence_exact(cfg),
        EstimatorKind::MonteCarlo => weak_convergence_mc(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::exact_discrete_second_moment;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    const SMALL_NOISE: &str = r#"
[kernel]
rho = 1.5
[domain]
initial = "custom"
initial_coeffs = [0.5, 0.0, 0.2]
[noise]
model = "inverse_power"
alpha = 0.75
truncation = 12
[ladder]
direction = "time"
n_elem = [8]
n_steps = [4, 8, 16]
[estimator]
kind = "monte_carlo"
paths = 4000
seed = 3
"#;

    #[test]
    fn modal_second_moment_matches_generic_stepper() {
        let c = cfg(SMALL_NOISE);
        let p = LadderPoint { n_elem: 8, n_steps: 16 };
        let modal = discrete_second_moment(&c, p, None).unwrap();
        let grid = Grid::new(1.0, 8).unwrap();
        let x0 = grid.ops.l2_project(&grid.load_of(&c.initial_data().unwrap())).unwrap();
        let w = cq_weights(&c.kernel_spec().unwrap(), 1.0 / 16.0, 16).unwrap();
        let cov = c.covariance().unwrap().unwrap();
        let direct = exact_discrete_second_moment(&grid.ops, &w, &x0, &cov, 16).unwrap();
        assert!(((modal - direct) / direct).abs() < 1e-12, "{modal} vs {direct}");
    }

    #[test]
    fn monte_carlo_matches_exact_discrete_moment() {
        let c = cfg(SMALL_NOISE);
        let p = LadderPoint { n_elem: 8, n_steps: 8 };
        let (m, se) = monte_carlo_estimate(&c, p, Functional::NormSq).unwrap();
        let exact = discrete_second_moment(&c, p, None).unwrap();
        assert!((m - exact).abs() < 3.0 * se, "{m} +- {se} vs {exact}");
        let (m, se) = monte_carlo_estimate(&c, p, Functional::LinearSq { mode: 1 }).unwrap();
        let exact = discrete_linear_sq_moment(&c, p, 1).unwrap();
        assert!((m - exact).abs() < 3.0 * se, "{m} +- {se} vs {exact}");
    }

    #[test]
    fn zero_noise_monte_carlo_has_no_variance() {
        let c = cfg(&SMALL_NOISE.replace("model = \"inverse_power\"\nalpha = 0.75", "model = \"none\""));
        let p = LadderPoint { n_elem: 8, n_steps: 8 };
        let (m, se) = monte_carlo_estimate(&c, p, Functional::NormSq).unwrap();
        assert_eq!(se, 0.0);
        let exact = discrete_second_moment(&c, p, None).unwrap();
        assert!((m - exact).abs() < 1e-15);
    }

    #[test]
    fn strong_error_vanishes_on_the_reference_grid() {
        let text = SMALL_NOISE.replace("paths = 4000", "paths = 50");
        let mut c = cfg(&text);
        c.ladder.reference_factor = 2;
        c.ladder.n_steps = vec![8, 16, 32];
        let r = strong_convergence_mc(&c).unwrap();
        assert!(r.rows.iter().all(|r| r.error > 0.0));
        // a ladder point equal to the reference grid has zero error
        c.ladder.n_steps = vec![16, 32, 64];
        c.ladder.reference_factor = 2;
        let mut grids = vec![McGrid::new(&c, LadderPoint { n_elem: 8, n_steps: 128 }, Functional::NormSq).unwrap()];
        grids.push(McGrid::new(&c, LadderPoint { n_elem: 8, n_steps: 128 }, Functional::NormSq).unwrap());
        let vals = simulate(&c, &grids, |i, x, all| x.iter().zip(&all[1 - i]).map(|(a, b)| (a - b).powi(2)).sum()).unwrap();
        assert!(vals.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn prolongation_is_exact_for_nested_meshes() {
        let c = cfg(SMALL_NOISE);
        let coarse = McGrid::new(&c, LadderPoint { n_elem: 4, n_steps: 4 }, Functional::NormSq).unwrap();
        let fine = Mesh1D::new(1.0, 16).unwrap();
        let x = vec![1.0, -2.0, 0.5];
        let nodal = coarse.grid.basis.synthesize(&x);
        let up = coarse.prolongate(&x, &fine);
        assert_eq!(up.len(), 15);
        for (i, v) in nodal.iter().enumerate() {
            assert!((up[4 * (i + 1) - 1] - v).abs() < 1e-14);
        }
        assert!((up[1] - 0.5 * nodal[0]).abs() < 1e-14);
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let mut c = cfg(SMALL_NOISE);
        c.estimator.paths = 300;
        c.estimator.threads = 1;
        let a = weak_convergence_mc(&c).unwrap().to_csv();
        c.estimator.threads = 4;
        let b = weak_convergence_mc(&c).unwrap().to_csv();
        assert_eq!(a, b);
    }

    #[test]
    fn deterministic_time_halving_ratio() {
        let c = cfg(r#"
[kernel]
rho = 1.5
[domain]
initial = "first_mode"
[ladder]
direction = "time"
n_elem = [256]
n_steps = [256, 512, 1024]
"#);
        let r = deterministic_convergence(&c).unwrap();
        for w in r.rows.windows(2) {
            let ratio = w[0].error / w[1].error;
            assert!(ratio > 1.7 && ratio < 2.3, "ratio {ratio}");
        }
    }

    #[test]
    fn configuration_mismatches_are_rejected() {
        let c = cfg(SMALL_NOISE);
        assert_eq!(deterministic_convergence(&c).unwrap_err().exit_code(), 2);
        let mut e = c.clone();
        e.estimator.functional = FunctionalName::ExpNegNormSq;
        assert_eq!(weak_convergence_exact(&e).unwrap_err().exit_code(), 2);
    }
}
