//! Spectral covariance model, Hilbert-Schmidt admissibility bookkeeping and
//! reproducible sampling of Wiener increments.
//!
//! `Q` is diagonal in the Dirichlet sine basis, `Q e_j = q_j e_j`, with
//! `lambda_j = (j pi / L)^2`. The increment over a step of length `dt` is
//! `sum_j sqrt(q_j dt) xi_j e_j` with i.i.d. standard normal `xi_j`,
//! truncated at `J` modes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fem1d::{load_vector_sine, Mesh1D, ModalBasis};
use crate::scalar::{dot, Real};

#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceModel<T> {
    Identity,
    /// `q_j = lambda_j^(-alpha)`, i.e. `Q = A^(-alpha)`.
    InversePower(T),
    Custom(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSpec<T> {
    model: CovarianceModel<T>,
    truncation: usize,
    length: T,
}

impl<T: Real> CovarianceSpec<T> {
    pub fn new(model: CovarianceModel<T>, truncation: usize, length: T) -> Result<Self> {
        if !(length > T::zero()) {
            return Err(Error::InvalidParameter(format!("domain length must be positive, got {length}")));
        }
        match &model {
            CovarianceModel::InversePower(alpha) if !(*alpha >= T::zero()) => {
                return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
            }
            CovarianceModel::Custom(q) if q.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) => {
                return Err(Error::InvalidParameter("custom eigenvalues must be finite and >= 0".into()));
            }
            _ => {}
        }
        Ok(Self { model, truncation, length })
    }

    pub fn identity(truncation: usize, length: T) -> Result<Self> {
        Self::new(CovarianceModel::Identity, truncation, length)
    }

    pub fn inverse_power(alpha: T, truncation: usize, length: T) -> Result<Self> {
        Self::new(CovarianceModel::InversePower(alpha), truncation, length)
    }

    pub fn custom(q: Vec<T>, length: T) -> Result<Self> {
        let j = q.len();
        Self::new(CovarianceModel::Custom(q), j, length)
    }

    /// Zero covariance (deterministic problem).
    pub fn zero(length: T) -> Self {
        Self { model: CovarianceModel::Custom(Vec::new()), truncation: 0, length }
    }

    pub fn with_truncation(&self, truncation: usize) -> Self {
        Self { truncation, ..self.clone() }
    }

    pub fn model(&self) -> &CovarianceModel<T> {
        &self.model
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn length(&self) -> T {
        self.length
    }

    /// Decay exponent for the analytic models (`0` for the identity).
    pub fn alpha(&self) -> Option<T> {
        match &self.model {
            CovarianceModel::Identity => Some(T::zero()),
            CovarianceModel::InversePower(a) => Some(*a),
            CovarianceModel::Custom(_) => None,
        }
    }

    /// Laplacian eigenvalue `lambda_j = (j pi / L)^2`, `j >= 1`.
    pub fn eigenvalue(&self, j: usize) -> T {
        let k = T::from_count(j) * T::PI() / self.length;
        k * k
    }

    /// `q_j` for `j >= 1`, ignoring the truncation.
    pub fn q(&self, j: usize) -> T {
        match &self.model {
            CovarianceModel::Identity => T::one(),
            CovarianceModel::InversePower(a) => self.eigenvalue(j).powf(-*a),
            CovarianceModel::Custom(q) => q.get(j - 1).copied().unwrap_or_else(T::zero),
        }
    }

    /// True when every retained `q_j` vanishes.
    pub fn is_zero(&self) -> bool {
        match &self.model {
            CovarianceModel::Custom(q) => q.iter().take(self.truncation).all(|&v| v == T::zero()),
            _ => false,
        }
    }

    /// Whether the model carries nonzero spectrum somewhere (regardless of `J`).
    pub fn has_spectrum(&self) -> bool {
        match &self.model {
            CovarianceModel::Custom(q) => q.iter().any(|&v| v != T::zero()),
            _ => true,
        }
    }
}

/// Supremum of admissible rate parameters `nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility<T> {
    pub nu_max: T,
    /// `nu_max` itself is not admissible (divergent series at equality).
    pub exclusive: bool,
    /// Both constraints coincide (`alpha = 1/2`).
    pub boundary: bool,
    /// Custom spectra: the cap `1/rho` is returned and admissibility has to
    /// be established by the caller.
    pub user_supplied: bool,
}

/// `nu_max = min(1/rho, 1/rho + alpha - 1/2)` from convergence of
/// `sum_j lambda_j^(nu - 1/rho) q_j` with `lambda_j ~ j^2`.
pub fn admissible_nu<T: Real>(cov: &CovarianceSpec<T>, rho: T) -> Admissibility<T> {
    let cap = T::one() / rho;
    match cov.alpha() {
        None => Admissibility { nu_max: cap, exclusive: false, boundary: false, user_supplied: true },
        Some(alpha) => {
            let half = T::lit(0.5);
            if alpha < half {
                Admissibility { nu_max: cap + alpha - half, exclusive: true, boundary: false, user_supplied: false }
            } else if alpha == half {
                Admissibility { nu_max: cap, exclusive: true, boundary: true, user_supplied: false }
            } else {
                Admissibility { nu_max: cap, exclusive: false, boundary: false, user_supplied: false }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsEstimate<T> {
    /// `sum_{j<=J} lambda_j^(nu - 1/rho) q_j`.
    pub partial_sum: T,
    /// Integral-test bound on the remainder; infinite when divergent.
    pub tail_bound: T,
    pub divergent: bool,
}

/// Partial sum of `||A^((nu - 1/rho)/2) Q^(1/2)||_HS^2` with a tail bound.
pub fn hs_norm_estimate<T: Real>(cov: &CovarianceSpec<T>, rho: T, nu: T, j_max: usize) -> HsEstimate<T> {
    let shift = nu - T::one() / rho;
    let partial_sum = (1..=j_max)
        .map(|j| cov.eigenvalue(j).powf(shift) * cov.q(j))
        .fold(T::zero(), |a, b| a + b);
    match cov.alpha() {
        None => HsEstimate { partial_sum, tail_bound: T::zero(), divergent: false },
        Some(alpha) => {
            // term = (j pi / L)^(2e), decreasing in j when e < 0
            let e2 = T::lit(2.0) * (shift - alpha);
            if e2 >= -T::one() {
                return HsEstimate { partial_sum, tail_bound: T::infinity(), divergent: true };
            }
            let c = (T::PI() / cov.length()).powf(e2);
            let tail_bound = c * T::from_count(j_max.max(1)).powf(e2 + T::one()) / -(e2 + T::one());
            HsEstimate { partial_sum, tail_bound, divergent: false }
        }
    }
}

/// Counter-based normal draws keyed by `(path, step, mode)`.
///
/// Each `(path, step)` pair addresses its own ChaCha8 block sequence
/// (stream = path, word position = step << 32); mode `j` is the `j`-th draw
/// in that block, so any query order reproduces the same values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedPolicy {
    master_seed: u64,
}

impl SeedPolicy {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    fn rng(&self, path: u64, step: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(path);
        rng.set_word_pos(u128::from(step) << 32);
        rng
    }

    /// Fills `out[j]` with the draw for mode `j + 1`.
    pub fn fill_normals(&self, path: u64, step: u64, out: &mut [f64]) {
        let mut rng = self.rng(path, step);
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
    }

    pub fn normal(&self, path: u64, step: u64, mode: usize) -> f64 {
        assert!(mode >= 1, "modes are 1-based");
        let mut rng = self.rng(path, step);
        let mut v = 0.0;
        for _ in 0..mode {
            v = rng.sample(StandardNormal);
        }
        v
    }
}

/// Load vector `(w, phi_i)` of one truncated Q-Wiener increment.
pub fn sample_increment_load<T: Real>(
    seed: &SeedPolicy,
    path: u64,
    step: u64,
    mesh: &Mesh1D<T>,
    cov: &CovarianceSpec<T>,
    dt: T,
) -> Vec<T> {
    let j_max = cov.truncation();
    let mut xi = vec![0.0; j_max];
    seed.fill_normals(path, step, &mut xi);
    let mut load = vec![T::zero(); mesh.n_dof()];
    for (j, &x) in (1..=j_max).zip(&xi) {
        let q = cov.q(j);
        if q == T::zero() {
            continue;
        }
        let amp = (q * dt).sqrt() * T::lit(x);
        for (l, b) in load.iter_mut().zip(load_vector_sine(mesh, j)) {
            *l = *l + amp * b;
        }
    }
    load
}

/// Noise modes expressed in the modal coordinates of a finite element basis:
/// entry `(i, beta)` of mode `j` means `v_i^T b_j = beta / sqrt(q_j)`.
#[derive(Debug, Clone)]
pub struct ModalNoiseMap<T> {
    /// `columns[j - 1]` lists `(modal index, sqrt(q_j) v_i^T b_j)`.
    columns: Vec<Vec<(usize, T)>>,
    n_modes: usize,
}

impl<T: Real> ModalNoiseMap<T> {
    pub fn new(basis: &ModalBasis<T>, mesh: &Mesh1D<T>, cov: &CovarianceSpec<T>) -> Self {
        let columns = (1..=cov.truncation())
            .map(|j| {
                let q = cov.q(j);
                if q == T::zero() {
                    return Vec::new();
                }
                let b = load_vector_sine(mesh, j);
                let beta: Vec<T> = (0..basis.len()).map(|i| dot(basis.vector(i), &b)).collect();
                let scale = beta.iter().fold(T::zero(), |m, v| m.max(v.abs()));
                let cut = scale * T::lit(1e-12);
                let sq = q.sqrt();
                beta.into_iter()
                    .enumerate()
                    .filter(|(_, v)| v.abs() > cut)
                    .map(|(i, v)| (i, sq * v))
                    .collect()
            })
            .collect();
        Self { columns, n_modes: basis.len() }
    }

    pub fn n_noise_modes(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[(usize, T)] {
        &self.columns[j - 1]
    }

    /// Per modal index: `sum_j q_j (v_i^T b_j)^2`.
    pub fn modal_variances(&self) -> Vec<T> {
        let mut w = vec![T::zero(); self.n_modes];
        for col in &self.columns {
            for &(i, v) in col {
                w[i] = w[i] + v * v;
            }
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem1d::assemble;

    #[test]
    fn model_invariants() {
        let c = CovarianceSpec::inverse_power(1.0_f64, 10, 1.0).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((c.q(1) - 1.0 / pi2).abs() < 1e-15);
        assert!((c.q(3) - 1.0 / (9.0 * pi2)).abs() < 1e-15);
        let id = CovarianceSpec::identity(5, 1.0_f64).unwrap();
        let zero_alpha = CovarianceSpec::inverse_power(0.0_f64, 5, 1.0).unwrap();
        for j in 1..=5 {
            assert_eq!(id.q(j), zero_alpha.q(j));
        }
        assert!(CovarianceSpec::inverse_power(-1.0_f64, 3, 1.0).is_err());
        assert!(CovarianceSpec::custom(vec![1.0_f64, -0.5], 1.0).is_err());
        assert!(CovarianceSpec::zero(1.0_f64).is_zero());
        assert!(!CovarianceSpec::zero(1.0_f64).has_spectrum());
    }

    #[test]
    fn admissibility_examples() {
        let id = CovarianceSpec::identity(10, 1.0_f64).unwrap();
        let a = admissible_nu(&id, 1.5);
        assert!((a.nu_max - 1.0 / 6.0).abs() < 1e-15);
        assert!(a.exclusive && !a.boundary);

        let tc = CovarianceSpec::inverse_power(1.0_f64, 10, 1.0).unwrap();
        let a = admissible_nu(&tc, 1.5);
        assert!((a.nu_max - 2.0 / 3.0).abs() < 1e-15);
        assert!(!a.exclusive);

        for rho in [1.2, 1.5, 1.8] {
            let half = CovarianceSpec::inverse_power(0.5_f64, 10, 1.0).unwrap();
            let a = admissible_nu(&half, rho);
            assert_eq!(a.nu_max, 1.0 / rho);
            assert!(a.boundary && a.exclusive);
        }

        let custom = CovarianceSpec::custom(vec![1.0_f64, 0.5], 1.0).unwrap();
        let a = admissible_nu(&custom, 1.25);
        assert!(a.user_supplied);
        assert_eq!(a.nu_max, 0.8);
    }

    #[test]
    fn hs_partial_sum_matches_zeta_two() {
        let tc = CovarianceSpec::inverse_power(1.0_f64, 0, 1.0).unwrap();
        let est = hs_norm_estimate(&tc, 1.5, 2.0 / 3.0, 20_000);
        assert!(!est.divergent);
        // sum (j pi)^-2 = 1/6
        assert!(est.partial_sum <= 1.0 / 6.0);
        assert!((1.0 / 6.0 - est.partial_sum) <= est.tail_bound);
        assert!((est.partial_sum - 1.0 / 6.0).abs() < 1e-5);
    }

    #[test]
    fn hs_zero_exponent_is_divergent() {
        // nu - 1/rho - alpha = 0: every term equals 1
        let c = CovarianceSpec::inverse_power(0.25_f64, 0, 1.0).unwrap();
        let rho = 1.6;
        let nu = 1.0 / rho + 0.25;
        let est = hs_norm_estimate(&c, rho, nu, 10);
        assert!((est.partial_sum - 10.0).abs() < 1e-12);
        assert!(est.divergent && est.tail_bound.is_infinite());
    }

    #[test]
    fn hs_doubling_stays_within_tail_bound() {
        let c = CovarianceSpec::inverse_power(0.6_f64, 0, 2.0).unwrap();
        for j in [8usize, 32, 128] {
            let a = hs_norm_estimate(&c, 1.4, 0.5, j);
            let b = hs_norm_estimate(&c, 1.4, 0.5, 2 * j);
            assert!(b.partial_sum - a.partial_sum <= a.tail_bound);
            assert!(b.partial_sum > a.partial_sum);
        }
    }

    #[test]
    fn seed_policy_is_order_independent() {
        let s = SeedPolicy::new(7);
        let mut a = vec![0.0; 16];
        s.fill_normals(3, 11, &mut a);
        for (j, &v) in a.iter().enumerate().rev() {
            assert_eq!(v.to_bits(), s.normal(3, 11, j + 1).to_bits());
        }
        let mut b = vec![0.0; 16];
        s.fill_normals(3, 12, &mut b);
        assert_ne!(a, b);
        s.fill_normals(4, 11, &mut b);
        assert_ne!(a, b);
        // prefix property: a shorter request reproduces the leading draws
        let mut c = vec![0.0; 5];
        s.fill_normals(3, 11, &mut c);
        assert_eq!(&a[..5], &c[..]);
    }

    #[test]
    fn zero_covariance_gives_zero_load() {
        let mesh = Mesh1D::new(1.0_f64, 8).unwrap();
        let c = CovarianceSpec::custom(vec![0.0; 7], 1.0).unwrap();
        let load = sample_increment_load(&SeedPolicy::new(1), 0, 0, &mesh, &c, 0.1);
        assert!(load.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn increment_load_is_reproducible_across_threads() {
        let mesh = Mesh1D::new(1.0_f64, 16).unwrap();
        let c = CovarianceSpec::identity(15, 1.0).unwrap();
        let seed = SeedPolicy::new(99);
        let base = sample_increment_load(&seed, 5, 9, &mesh, &c, 0.01);
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let c = c.clone();
                std::thread::spawn(move || sample_increment_load(&seed, 5, 9, &mesh, &c, 0.01))
            })
            .collect();
        for h in handles {
            let v = h.join().unwrap();
            assert!(v.iter().zip(&base).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }

    #[test]
    fn single_mode_increment_second_moment() {
        let mesh = Mesh1D::new(1.0_f64, 6).unwrap();
        let c = CovarianceSpec::custom(vec![1.0], 1.0).unwrap();
        let seed = SeedPolicy::new(2024);
        let b = load_vector_sine(&mesh, 1);
        let n = 100_000;
        let i = 2;
        let samples: Vec<f64> = (0..n).map(|p| sample_increment_load(&seed, p, 0, &mesh, &c, 1.0)[i]).collect();
        let sq: Vec<f64> = samples.iter().map(|x| x * x).collect();
        let mean = sq.iter().sum::<f64>() / n as f64;
        let var = sq.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        assert!((mean - b[i] * b[i]).abs() < 3.0 * se, "{mean} vs {}", b[i] * b[i]);
    }

    #[test]
    fn noise_map_on_uniform_mesh_is_one_to_one_below_resolution() {
        let mesh = Mesh1D::new(1.0_f64, 8).unwrap();
        let basis = ModalBasis::uniform(&mesh);
        let c = CovarianceSpec::identity(16, 1.0).unwrap();
        let map = ModalNoiseMap::new(&basis, &mesh, &c);
        for j in 1..8 {
            assert_eq!(map.column(j).len(), 1);
            assert_eq!(map.column(j)[0].0, j - 1);
        }
        // mode n_elem aliases to zero, n_elem + k onto n_elem - k
        assert!(map.column(8).is_empty());
        assert_eq!(map.column(11)[0].0, 8 - 3 - 1);
        let ops = assemble(&mesh);
        let w = map.modal_variances();
        assert_eq!(w.len(), 7);
        // full alias sum reproduces the mass matrix: sum over all j of b_j b_j^T = M
        let full = ModalNoiseMap::new(&basis, &mesh, &c.with_truncation(8 * 400));
        let wf = full.modal_variances();
        for (i, &v) in wf.iter().enumerate() {
            let e = basis.vector(i);
            let m = dot(e, &ops.mass().mul_vec(e));
            assert!((v - m).abs() < 2e-3, "mode {i}: {v} vs {m}");
        }
    }
}
