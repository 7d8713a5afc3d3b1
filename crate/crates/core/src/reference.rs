//! Mesh-free reference quantities: the Mittag-Leffler function, the scalar
//! resolvent modes `E_rho(-lambda t^rho)` of the continuous problem and
//! exact first and second moments of `X(T)`.
//!
//! Special functions are evaluated in `f64` regardless of the caller's
//! scalar type.

use crate::error::{Error, Result};
use crate::noise::{CovarianceModel, CovarianceSpec};
use crate::quadrature::{integrate, integrate_piecewise};
use crate::scalar::{CompensatedSum, Real};
use crate::special::{hurwitz_zeta, ln_gamma, recip_gamma};

/// Below this argument the power series is summed; above it the integral
/// representation is used.
pub const ML_SWITCH: f64 = 8.0;
const ML_MAX_TERMS: usize = 200;

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 1.0 && rho < 2.0) {
        return Err(Error::InvalidParameter(format!("rho must lie in (1, 2), got {rho}")));
    }
    Ok(())
}

/// `E_rho(-x)` from the power series `sum_m (-x)^m / Gamma(rho m + 1)`.
pub fn mittag_leffler_series(rho: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let lx = x.ln();
    let mut terms = Vec::with_capacity(64);
    let mut peak = 0.0_f64;
    for m in 0..=ML_MAX_TERMS {
        let mag = (m as f64 * lx - ln_gamma(rho * m as f64 + 1.0)).exp();
        terms.push(if m % 2 == 0 { mag } else { -mag });
        peak = peak.max(mag);
        if m > 2 && mag < 1e-18 * peak.max(1.0) {
            break;
        }
    }
    // smallest terms first
    terms.iter().rev().copied().collect::<CompensatedSum<f64>>().value()
}

/// `E_rho(-x)` from the residue at the principal pole plus the branch-cut
/// integral along the negative real axis:
///
/// `E_rho(-x) = (2/rho) e^{a cos(pi/rho)} cos(a sin(pi/rho))
///   + int_0^inf x sin(rho pi)/(rho pi) e^{-u^{1/rho}} / (u^2 + 2 x u cos(rho pi) + x^2) du`,
/// `a = x^{1/rho}`.
pub fn mittag_leffler_integral(rho: f64, x: f64) -> Result<f64> {
    use std::f64::consts::PI;
    let a = x.powf(1.0 / rho);
    let phi = PI / rho;
    let pole = (2.0 / rho) * (a * phi.cos()).exp() * (a * phi.sin()).cos();
    let (s, c) = (rho * PI).sin_cos();
    let pref = x * s / (rho * PI);
    let f = |u: f64| pref * (-u.powf(1.0 / rho)).exp() / (u * u + 2.0 * x * u * c + x * x);
    // e^{-u^{1/rho}} < 1e-20 beyond
    let u_max = 46f64.powf(rho);
    let mut bps = vec![0.0];
    let u0 = -x * c;
    if u0 > 0.0 && u0 < u_max {
        let w = x * s.abs();
        for p in [u0 - 4.0 * w, u0, u0 + 4.0 * w] {
            if p > *bps.last().unwrap() && p < u_max {
                bps.push(p);
            }
        }
    }
    bps.push(u_max);
    let tol = 1e-16 * (1.0 / x).min(1.0);
    let cut = integrate_piecewise(f, &bps, tol, 60)?;
    Ok(pole + cut.value)
}

/// `E_rho(-x)` for `rho` in `(1, 2)` and `x >= 0`.
pub fn mittag_leffler<T: Real>(rho: T, x: T) -> Result<T> {
    let (r, v) = (rho.as_f64(), x.as_f64());
    check_rho(r)?;
    if !(v >= 0.0) {
        return Err(Error::InvalidParameter(format!("Mittag-Leffler argument must be >= 0, got {v}")));
    }
    let e = if v < ML_SWITCH { mittag_leffler_series(r, v) } else { mittag_leffler_integral(r, v)? };
    Ok(T::lit(e))
}

/// Scalar resolvent `s(t) = E_rho(-lambda t^rho)` of
/// `s' + lambda int_0^t b(t - s) s(s) ds = 0`, `s(0) = 1`.
pub fn resolvent_mode<T: Real>(rho: T, lambda: T, t: T) -> Result<T> {
    if !(lambda >= T::zero()) || !(t >= T::zero()) {
        return Err(Error::InvalidParameter(format!("need lambda >= 0 and t >= 0, got {lambda}, {t}")));
    }
    mittag_leffler(rho, lambda * t.powf(rho))
}

/// Coefficients `x_k = (x, e_k)` in the Dirichlet sine basis of `(0, L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVector<T> {
    coeffs: Vec<T>,
    length: T,
}

impl<T: Real> SpectralVector<T> {
    pub fn new(coeffs: Vec<T>, length: T) -> Result<Self> {
        if !(length > T::zero()) {
            return Err(Error::InvalidParameter(format!("domain length must be positive, got {length}")));
        }
        Ok(Self { coeffs, length })
    }

    /// `c e_k` (1-based `k`).
    pub fn single_mode(k: usize, c: T, length: T) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("modes are 1-based".into()));
        }
        let mut coeffs = vec![T::zero(); k];
        coeffs[k - 1] = c;
        Self::new(coeffs, length)
    }

    pub fn zero(length: T) -> Self {
        Self { coeffs: Vec::new(), length }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn eigenvalue(&self, k: usize) -> T {
        let w = T::from_count(k) * T::PI() / self.length;
        w * w
    }

    pub fn norm(&self) -> T {
        self.coeffs.iter().map(|&c| c * c).collect::<CompensatedSum<T>>().value().sqrt()
    }

    /// `sum_k x_k e_k(x)` at a point.
    pub fn eval(&self, x: T) -> T {
        let amp = (T::lit(2.0) / self.length).sqrt();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c * amp * (T::from_count(k + 1) * T::PI() * x / self.length).sin())
            .fold(T::zero(), |a, b| a + b)
    }
}

/// `S(t) x0` mode by mode.
pub fn exact_solution_action<T: Real>(rho: T, x0: &SpectralVector<T>, t: T) -> Result<SpectralVector<T>> {
    let coeffs = x0
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            if c == T::zero() {
                Ok(T::zero())
            } else {
                Ok(c * resolvent_mode(rho, x0.eigenvalue(k + 1), t)?)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    SpectralVector::new(coeffs, x0.length())
}

/// `F(Y) = int_0^Y E_rho(-u^rho)^2 du`, from which
/// `int_0^t E_rho(-lambda s^rho)^2 ds = lambda^{-1/rho} F(lambda^{1/rho} t)`.
///
/// `F` is tabulated by adaptive quadrature on unit cells up to `Y_c`, where
/// the exponentially small pole contribution has died out; beyond `Y_c`,
/// `F(Y) = F(inf) - R(Y)` with `R` integrated term by term from the
/// algebraic expansion `E_rho(-x) ~ sum_m d_m x^{-m}`,
/// `d_m = -(-1)^m / Gamma(1 - rho m)`.
#[derive(Debug, Clone)]
pub struct SquaredResolventIntegral {
    rho: f64,
    tol: f64,
    cells: Vec<f64>,
    cumulative: Vec<f64>,
    y_c: f64,
    d: Vec<f64>,
    total: f64,
}

const TAIL_TERMS: usize = 8;

impl SquaredResolventIntegral {
    pub fn new<T: Real>(rho: T, tol: T) -> Result<Self> {
        let rho = rho.as_f64();
        let tol = tol.as_f64();
        check_rho(rho)?;
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        let decay = (std::f64::consts::PI / rho).cos().abs();
        let y_c = (45.0 / decay).max(50.0).ceil();
        let n_cells = y_c as usize;
        let cell_tol = tol / n_cells as f64;
        let mut cells = Vec::with_capacity(n_cells + 1);
        let mut cumulative = Vec::with_capacity(n_cells + 1);
        let mut acc = CompensatedSum::new();
        cells.push(0.0);
        cumulative.push(0.0);
        for i in 0..n_cells {
            let (a, b) = (i as f64, (i + 1) as f64);
            acc.add(Self::integrate_cell(rho, a, b, cell_tol)?);
            cells.push(b);
            cumulative.push(acc.value());
        }
        let d: Vec<f64> = (1..=TAIL_TERMS)
            .map(|m| {
                let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
                sign * recip_gamma(1.0 - rho * m as f64)
            })
            .collect();
        let mut out = Self { rho, tol, cells, cumulative, y_c, d, total: 0.0 };
        out.total = out.cumulative[n_cells] + out.remainder(y_c);
        Ok(out)
    }

    fn integrate_cell(rho: f64, a: f64, b: f64, tol: f64) -> Result<f64> {
        let mut err = None;
        let r = integrate(
            |u: f64| match mittag_leffler::<f64>(rho, u.powf(rho)) {
                Ok(e) => e * e,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            a,
            b,
            tol,
            40,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        Ok(r.value)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Crossover between tabulated and asymptotic evaluation of `F`.
    pub fn crossover(&self) -> f64 {
        self.y_c
    }

    /// `F(inf) = int_0^inf E_rho(-u^rho)^2 du`.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// `R(Y) = int_Y^inf E_rho(-u^rho)^2 du` for `Y >= Y_c`.
    fn remainder(&self, y: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for (m, &dm) in self.d.iter().enumerate() {
            for (n, &dn) in self.d.iter().enumerate() {
                let p = self.rho * (m + n + 2) as f64;
                acc.add(dm * dn * y.powf(1.0 - p) / (p - 1.0));
            }
        }
        acc.value()
    }

    /// `F(Y)`.
    pub fn cumulative(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return Err(Error::InvalidParameter(format!("upper limit must be >= 0, got {y}")));
        }
        if y >= self.y_c {
            return Ok(self.total - self.remainder(y));
        }
        let i = y.floor() as usize;
        let base = self.cumulative[i];
        if y == self.cells[i] {
            return Ok(base);
        }
        Ok(base + Self::integrate_cell(self.rho, self.cells[i], y, self.tol)?)
    }

    /// `int_0^t E_rho(-lambda s^rho)^2 ds`.
    pub fn integral<T: Real>(&self, lambda: T, t: T) -> Result<T> {
        let (l, t) = (lambda.as_f64(), t.as_f64());
        if !(l >= 0.0) || !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!("need lambda >= 0 and t >= 0, got {l}, {t}")));
        }
        if l == 0.0 {
            return Ok(T::lit(t));
        }
        let s = l.powf(1.0 / self.rho);
        Ok(T::lit(self.cumulative(s * t)? / s))
    }

    /// `sum_{j > j0} (j pi / L)^{-2 alpha} int_0^t E_rho(-(j pi / L)^2 s^rho)^2 ds`
    /// in closed form; requires the first omitted mode to lie in the
    /// asymptotic range.
    fn power_tail(&self, alpha: f64, length: f64, t: f64, j0: usize) -> f64 {
        let rho = self.rho;
        let w = std::f64::consts::PI / length;
        let a = j0 as f64 + 1.0;
        // lambda^{-alpha - 1/rho} F(inf)
        let p = 2.0 * alpha + 2.0 / rho;
        let mut acc = CompensatedSum::new();
        acc.add(self.total * w.powf(-p) * hurwitz_zeta(p, a));
        // lambda^{-1/rho} R(lambda^{1/rho} t) = sum d_m d_n t^{1-rho k} lambda^{-k} / (rho k - 1)
        for (m, &dm) in self.d.iter().enumerate() {
            for (n, &dn) in self.d.iter().enumerate() {
                let k = (m + n + 2) as f64;
                let e = 2.0 * alpha + 2.0 * k;
                acc.add(-dm * dn * t.powf(1.0 - rho * k) / (rho * k - 1.0) * w.powf(-e) * hurwitz_zeta(e, a));
            }
        }
        acc.value()
    }
}

/// Exact second moment split into its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMoment<T> {
    /// `||S(T) x0||^2`.
    pub deterministic: T,
    /// Noise modes `j <= J`.
    pub explicit: T,
    /// Noise modes `j > J` of an analytic covariance model.
    pub tail: T,
}

impl<T: Real> SecondMoment<T> {
    pub fn total(&self) -> T {
        self.deterministic + self.explicit + self.tail
    }
}

/// `E ||X(T)||^2 = sum_k (x0_k E(-lambda_k T^rho))^2 + sum_j q_j int_0^T E(-lambda_j s^rho)^2 ds`.
///
/// Identity and inverse-power models are summed over all modes: `j <= J`
/// explicitly and the rest analytically, reported in `tail`. Custom spectra
/// have no tail.
pub fn exact_second_moment<T: Real>(
    rho: T,
    x0: &SpectralVector<T>,
    cov: &CovarianceSpec<T>,
    horizon: T,
    tol: T,
) -> Result<SecondMoment<T>> {
    let s_t = exact_solution_action(rho, x0, horizon)?;
    let deterministic = s_t.norm().powi(2);
    if !cov.has_spectrum() {
        return Ok(SecondMoment { deterministic, explicit: T::zero(), tail: T::zero() });
    }
    let table = SquaredResolventIntegral::new(rho, tol)?;
    let t = horizon.as_f64();
    let mut explicit = CompensatedSum::new();
    for j in 1..=cov.truncation() {
        let q = cov.q(j).as_f64();
        if q != 0.0 {
            explicit.add(q * table.integral(cov.eigenvalue(j).as_f64(), t)?);
        }
    }
    let tail = match cov.model() {
        CovarianceModel::Custom(_) => 0.0,
        _ => {
            let alpha = cov.alpha().unwrap_or_else(T::zero).as_f64();
            let length = cov.length().as_f64();
            let mut tail = CompensatedSum::new();
            let mut j = cov.truncation();
            // modes still in the tabulated range are added one by one
            loop {
                let lam = cov.eigenvalue(j + 1).as_f64();
                if lam.powf(1.0 / table.rho()) * t >= table.crossover() {
                    break;
                }
                j += 1;
                tail.add(cov.q(j).as_f64() * table.integral(lam, t)?);
            }
            tail.add(table.power_tail(alpha, length, t, j));
            tail.value()
        }
    };
    Ok(SecondMoment { deterministic, explicit: T::lit(explicit.value()), tail: T::lit(tail) })
}

/// `max_lambda lambda^{nu/2} |E_rho(-lambda t^rho)| t^{rho nu / 2}`.
pub fn smoothing_envelope<T: Real>(rho: T, nu: T, t: T, lambda_grid: &[T]) -> Result<T> {
    let two = T::lit(2.0);
    if !(nu >= T::zero() && nu <= two / rho) {
        return Err(Error::InvalidParameter(format!("nu must lie in [0, 2/rho], got {nu}")));
    }
    let mut best = T::zero();
    for &lam in lambda_grid {
        let s = resolvent_mode(rho, lam, t)?.abs();
        let v = lam.powf(nu / two) * s * t.powf(rho * nu / two);
        best = best.max(v);
    }
    Ok(best)
}
