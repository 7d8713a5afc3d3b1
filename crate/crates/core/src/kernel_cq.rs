//! Memory kernel, its Laplace transform, the sector parameter, and
//! convolution-quadrature weights for the backward Euler stepper.
//!
//! The Riesz kernel `b(t) = t^(rho-2) / Gamma(rho-1)` has Laplace transform
//! `z^(1-rho)`; the tempered variant `e^(-eta t) b(t)` has `(z+eta)^(1-rho)`.
//! Both are 3-monotone and satisfy the sectorial bound
//! `|b^(k)(z)| <= C |z|^(1-rho-k)` analytically, so neither property is
//! checked numerically here.
//!
//! Weights are the Taylor coefficients of `z -> b_hat((1 - z) / dt)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelVariant {
    Riesz,
    TemperedRiesz,
}

/// Memory kernel with exponent `rho` in the open interval (1, 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec<T> {
    variant: KernelVariant,
    rho: T,
    eta: T,
}

fn check_rho<T: Real>(rho: T) -> Result<()> {
    if !(rho > T::one() && rho < T::lit(2.0)) {
        return Err(Error::InvalidParameter(format!("rho must lie in (1, 2), got {rho}")));
    }
    Ok(())
}

impl<T: Real> KernelSpec<T> {
    pub fn riesz(rho: T) -> Result<Self> {
        check_rho(rho)?;
        Ok(Self { variant: KernelVariant::Riesz, rho, eta: T::zero() })
    }

    pub fn tempered_riesz(rho: T, eta: T) -> Result<Self> {
        check_rho(rho)?;
        if !(eta >= T::zero()) || !eta.is_finite() {
            return Err(Error::InvalidParameter(format!("tempering rate must be >= 0, got {eta}")));
        }
        Ok(Self { variant: KernelVariant::TemperedRiesz, rho, eta })
    }

    pub fn variant(&self) -> KernelVariant {
        self.variant
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    /// Principal-branch Laplace transform `(z + eta)^(1 - rho)`.
    pub fn laplace_transform(&self, z: Complex<T>) -> Result<Complex<T>> {
        if !(z.re > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "Laplace transform needs Re z > 0, got {}",
                z.re
            )));
        }
        Ok(self.transform_unchecked(z))
    }

    fn transform_unchecked(&self, z: Complex<T>) -> Complex<T> {
        let shifted = z + Complex::new(self.eta, T::zero());
        // exp((1 - rho) Log w) on the principal branch
        let (r, theta) = shifted.to_polar();
        let e = T::one() - self.rho;
        Complex::from_polar(r.powf(e), theta * e)
    }

    /// `1 + (2/pi) sup |arg b_hat(lambda)|` over the sampled right half-plane.
    pub fn sector_parameter(&self, grid: &SectorGrid) -> T {
        let mut sup = T::zero();
        let half_pi = T::FRAC_PI_2();
        let n_arg = grid.arg_points.max(1);
        let n_mod = grid.modulus_points.max(2);
        for a in 0..=2 * n_arg {
            // arguments strictly inside (-pi/2, pi/2)
            let frac = T::from_count(a) / T::from_count(n_arg) - T::one();
            let theta = frac * half_pi * (T::one() - T::lit(grid.edge_margin));
            for m in 0..n_mod {
                let t = T::from_count(m) / T::from_count(n_mod - 1);
                let log10 = T::lit(grid.log10_min) + t * T::lit(grid.log10_max - grid.log10_min);
                let modulus = T::lit(10.0).powf(log10);
                let lambda = Complex::from_polar(modulus, theta);
                let val = self.transform_unchecked(lambda);
                sup = sup.max(val.arg().abs());
            }
        }
        T::one() + T::lit(2.0) / T::PI() * sup
    }
}

/// Sampling grid for [`KernelSpec::sector_parameter`].
#[derive(Debug, Clone, Copy)]
pub struct SectorGrid {
    /// Arguments per half-plane side; `2 * arg_points + 1` values in total.
    pub arg_points: usize,
    pub modulus_points: usize,
    pub log10_min: f64,
    pub log10_max: f64,
    /// Relative distance kept from the imaginary axis.
    pub edge_margin: f64,
}

impl Default for SectorGrid {
    fn default() -> Self {
        Self { arg_points: 200, modulus_points: 49, log10_min: -6.0, log10_max: 6.0, edge_margin: 1e-3 }
    }
}

/// Convolution-quadrature weights `omega_0 .. omega_{n-1}` for step `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct CqWeights<T> {
    dt: T,
    rho: T,
    weights: Vec<T>,
}

impl<T: Real> CqWeights<T> {
    /// Wraps an explicit weight sequence, e.g. a Dirac kernel `[1, 0, 0, ..]`
    /// that turns the scheme into backward Euler for the heat equation.
    pub fn from_sequence(dt: T, rho: T, weights: Vec<T>) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if weights.is_empty() {
            return Err(Error::InvalidParameter("weight sequence is empty".into()));
        }
        Ok(Self { dt, rho, weights })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.weights
    }

    pub fn get(&self, k: usize) -> Option<T> {
        self.weights.get(k).copied()
    }
}

/// Riesz weights `omega_k = dt^(rho-1) c_k`, where `sum c_k z^k = (1-z)^(1-rho)`,
/// from `c_0 = 1`, `c_k = c_{k-1} (k + rho - 2) / k`.
pub fn cq_weights_riesz<T: Real>(rho: T, dt: T, n_weights: usize) -> Result<CqWeights<T>> {
    check_rho(rho)?;
    if !(dt > T::zero()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if n_weights == 0 {
        return Err(Error::InvalidParameter("n_weights must be at least 1".into()));
    }
    let scale = dt.powf(rho - T::one());
    let two = T::lit(2.0);
    let mut c = T::one();
    let mut weights = Vec::with_capacity(n_weights);
    weights.push(scale);
    for k in 1..n_weights {
        let kf = T::from_count(k);
        c = c * (kf + rho - two) / kf;
        weights.push(scale * c);
    }
    Ok(CqWeights { dt, rho, weights })
}

/// Radius whose `n`-th power is `1e-2`: aliasing `r^(8n) = 1e-16` and
/// round-off amplification `r^(-n) = 1e2`.
pub fn default_contour_radius(n_weights: usize) -> f64 {
    1e-2_f64.powf(1.0 / n_weights.max(1) as f64)
}

/// Weights for any kernel by trapezoidal quadrature of the Cauchy integral
/// on `|z| = radius` with `8 n_weights` nodes.
pub fn cq_weights_contour<T: Real>(
    kernel: &KernelSpec<T>,
    dt: T,
    n_weights: usize,
    radius: Option<T>,
) -> Result<CqWeights<T>> {
    if !(dt > T::zero()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if n_weights == 0 {
        return Err(Error::InvalidParameter("n_weights must be at least 1".into()));
    }
    let radius = radius.unwrap_or_else(|| T::lit(default_contour_radius(n_weights)));
    if !(radius > T::zero() && radius < T::one()) {
        return Err(Error::InvalidParameter(format!("contour radius must lie in (0, 1), got {radius}")));
    }
    let amplification = radius.powi(-(n_weights as i32 - 1));
    if !amplification.is_finite() || amplification * T::epsilon() >= T::one() {
        return Err(Error::PrecisionLoss(format!(
            "radius^-(n-1) = {amplification:e} amplifies round-off beyond the working precision"
        )));
    }
    let nodes = 8 * n_weights;
    let nodes_f = T::from_count(nodes);
    let (cos_table, sin_table): (Vec<T>, Vec<T>) = (0..nodes)
        .map(|l| {
            let angle = T::TAU() * T::from_count(l) / nodes_f;
            (angle.cos(), angle.sin())
        })
        .unzip();
    let values: Vec<Complex<T>> = (0..nodes)
        .map(|l| {
            let z = Complex::new(radius * cos_table[l], radius * sin_table[l]);
            let s = (Complex::new(T::one(), T::zero()) - z) / dt;
            kernel.transform_unchecked(s)
        })
        .collect();
    let mut weights = Vec::with_capacity(n_weights);
    let mut inv_r_pow = T::one();
    for k in 0..n_weights {
        let mut acc = CompensatedSum::new();
        for (l, v) in values.iter().enumerate() {
            let idx = (k * l) % nodes;
            // Re[v * exp(-i 2 pi k l / nodes)]
            acc.add(v.re * cos_table[idx] + v.im * sin_table[idx]);
        }
        weights.push(acc.value() / nodes_f * inv_r_pow);
        inv_r_pow = inv_r_pow / radius;
    }
    Ok(CqWeights { dt, rho: kernel.rho(), weights })
}

/// Weights for a kernel, using the recurrence when it applies.
pub fn cq_weights<T: Real>(kernel: &KernelSpec<T>, dt: T, n_weights: usize) -> Result<CqWeights<T>> {
    match kernel.variant() {
        KernelVariant::Riesz => cq_weights_riesz(kernel.rho(), dt, n_weights),
        KernelVariant::TemperedRiesz if kernel.eta() == T::zero() => {
            cq_weights_riesz(kernel.rho(), dt, n_weights)
        }
        KernelVariant::TemperedRiesz => cq_weights_contour(kernel, dt, n_weights, None),
    }
}
