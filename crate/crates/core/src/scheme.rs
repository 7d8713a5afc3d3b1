//! Fully discrete scheme: piecewise-linear elements in space, implicit Euler
//! with convolution-quadrature memory in time.
//!
//! One step solves
//! `(M + dt w_0 K) X^{n+1} = M X^n - dt K sum_{k=1}^{n} w_{n+1-k} X^k + b`,
//! where `b` is the load vector `(w^{n+1}, phi_i)` of the noise increment.
//! The memory sum never contains `X^0`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem1d::{FemOperators, TridiagonalLdl};
use crate::kernel_cq::CqWeights;
use crate::noise::CovarianceSpec;
use crate::fem1d::load_vector_sine;
use crate::scalar::{CompensatedSum, Real};

/// Running state of the recursion. Keeps the full history for the memory sum.
#[derive(Debug, Clone)]
pub struct SchemeState<'a, T> {
    ops: &'a FemOperators<T>,
    weights: &'a CqWeights<T>,
    history: Vec<Vec<T>>,
    lhs: TridiagonalLdl<T>,
    memory: Vec<T>,
    rhs: Vec<T>,
}

impl<'a, T: Real> SchemeState<'a, T> {
    pub fn init(ops: &'a FemOperators<T>, weights: &'a CqWeights<T>, x0: &[T]) -> Result<Self> {
        ops.check_dim(x0.len())?;
        let w0 = weights
            .get(0)
            .ok_or(Error::WeightsExhausted { step: 1, needed: 1, available: 0 })?;
        let lhs = ops.mass().combine(T::one(), ops.stiffness(), weights.dt() * w0)?.factorize()?;
        let n = ops.n_dof();
        Ok(Self {
            ops,
            weights,
            history: vec![x0.to_vec()],
            lhs,
            memory: vec![T::zero(); n],
            rhs: vec![T::zero(); n],
        })
    }

    /// Index `n` of the newest iterate.
    pub fn n(&self) -> usize {
        self.history.len() - 1
    }

    pub fn current(&self) -> &[T] {
        &self.history[self.n()]
    }

    pub fn history(&self) -> &[Vec<T>] {
        &self.history
    }

    pub fn into_history(self) -> Vec<Vec<T>> {
        self.history
    }

    /// Advances to `n + 1` with the given load vector.
    pub fn step(&mut self, load: &[T]) -> Result<&[T]> {
        self.ops.check_dim(load.len())?;
        let n = self.n();
        if self.weights.len() < n + 1 {
            return Err(Error::WeightsExhausted { step: n + 1, needed: n + 1, available: self.weights.len() });
        }
        let w = self.weights.as_slice();
        let dt = self.weights.dt();

        self.memory.iter_mut().for_each(|m| *m = T::zero());
        for k in 1..=n {
            let c = w[n + 1 - k];
            for (m, &x) in self.memory.iter_mut().zip(&self.history[k]) {
                *m = *m + c * x;
            }
        }
        self.ops.mass().mul_vec_into(&self.history[n], &mut self.rhs);
        if n > 0 {
            let mut km = vec![T::zero(); self.memory.len()];
            self.ops.stiffness().mul_vec_into(&self.memory, &mut km);
            for (r, v) in self.rhs.iter_mut().zip(&km) {
                *r = *r - dt * *v;
            }
        }
        for (r, &b) in self.rhs.iter_mut().zip(load) {
            *r = *r + b;
        }
        let mut next = self.rhs.clone();
        self.lhs.solve_in_place(&mut next);
        self.history.push(next);
        Ok(self.current())
    }
}

/// Trajectory `X^0..X^N` of the noise-free scheme.
pub fn run_homogeneous<T: Real>(
    ops: &FemOperators<T>,
    weights: &CqWeights<T>,
    x0: &[T],
    n_steps: usize,
) -> Result<Vec<Vec<T>>> {
    let mut state = SchemeState::init(ops, weights, x0)?;
    let zero = vec![T::zero(); ops.n_dof()];
    for _ in 0..n_steps {
        state.step(&zero)?;
    }
    Ok(state.into_history())
}

/// Final iterate `X^N` with `loads[k]` applied in step `k + 1`.
pub fn run_driven<T: Real>(ops: &FemOperators<T>, weights: &CqWeights<T>, x0: &[T], loads: &[Vec<T>]) -> Result<Vec<T>> {
    let mut state = SchemeState::init(ops, weights, x0)?;
    for load in loads {
        state.step(load)?;
    }
    Ok(state.current().to_vec())
}

/// `E ||X^N||^2` from one homogeneous run per noise mode.
///
/// A load applied in step `k + 1` propagates like an initial value
/// `M^{-1} b` started at step `k`, so the stochastic part equals
/// `dt sum_j q_j sum_{m=1}^{N} ||B_m P_h e_j||^2`.
pub fn exact_discrete_second_moment<T: Real>(
    ops: &FemOperators<T>,
    weights: &CqWeights<T>,
    x0: &[T],
    cov: &CovarianceSpec<T>,
    n_steps: usize,
) -> Result<T> {
    ops.check_dim(x0.len())?;
    if cov.truncation() == 0 && cov.has_spectrum() {
        return Err(Error::InvalidParameter("truncation J = 0 with nonzero covariance".into()));
    }
    let det = run_homogeneous(ops, weights, x0, n_steps)?;
    let det_part = ops.h_norm(&det[n_steps]).powi(2);

    let dt = weights.dt();
    let mesh = ops.mesh();
    let per_mode: Vec<Result<T>> = (1..=cov.truncation())
        .into_par_iter()
        .map(|j| {
            let q = cov.q(j);
            if q == T::zero() {
                return Ok(T::zero());
            }
            let start = ops.l2_project(&load_vector_sine(mesh, j))?;
            let traj = run_homogeneous(ops, weights, &start, n_steps)?;
            let acc: CompensatedSum<T> = traj[1..].iter().map(|x| ops.h_norm(x).powi(2)).collect();
            Ok(q * acc.value())
        })
        .collect();
    let mut total = CompensatedSum::new();
    for v in per_mode {
        total.add(v?);
    }
    Ok(det_part + dt * total.value())
}

/// Mode-by-mode evaluation of the scheme in an `M`-orthonormal eigenbasis of
/// `(K, M)`. Each eigencomponent evolves by the scalar recursion
/// `r_n = (r_{n-1} - dt lambda sum_{k=1}^{n-1} w_{n-k} r_k) / (1 + dt w_0 lambda)`.
pub mod modal {
    use super::*;
    use crate::noise::ModalNoiseMap;

    /// `r_0..r_N` for a single eigenvalue, `r_0 = 1`.
    pub fn scalar_response<T: Real>(lambda: T, weights: &CqWeights<T>, n_steps: usize) -> Result<Vec<T>> {
        if weights.len() < n_steps.max(1) {
            return Err(Error::WeightsExhausted { step: n_steps, needed: n_steps, available: weights.len() });
        }
        let w = weights.as_slice();
        let dl = weights.dt() * lambda;
        let denom = T::one() + dl * w[0];
        let mut r = Vec::with_capacity(n_steps + 1);
        r.push(T::one());
        for n in 1..=n_steps {
            let mut mem = T::zero();
            for k in 1..n {
                mem = mem + w[n - k] * r[k];
            }
            r.push((r[n - 1] - dl * mem) / denom);
        }
        Ok(r)
    }

    /// Scalar responses for a whole spectrum.
    #[derive(Debug, Clone)]
    pub struct ModalPropagator<T> {
        dt: T,
        responses: Vec<Vec<T>>,
    }

    impl<T: Real> ModalPropagator<T> {
        pub fn new(eigenvalues: &[T], weights: &CqWeights<T>, n_steps: usize) -> Result<Self> {
            let responses = eigenvalues
                .par_iter()
                .map(|&lam| scalar_response(lam, weights, n_steps))
                .collect::<Result<Vec<_>>>()?;
            Ok(Self { dt: weights.dt(), responses })
        }

        pub fn n_modes(&self) -> usize {
            self.responses.len()
        }

        pub fn n_steps(&self) -> usize {
            self.responses.first().map_or(0, |r| r.len() - 1)
        }

        pub fn dt(&self) -> T {
            self.dt
        }

        pub fn response(&self, mode: usize) -> &[T] {
            &self.responses[mode]
        }

        /// `r_N(lambda_i) c_i`.
        pub fn propagate(&self, coords: &[T]) -> Vec<T> {
            let n = self.n_steps();
            coords.iter().zip(&self.responses).map(|(&c, r)| c * r[n]).collect()
        }

        /// `sum_{m=1}^{N} r_m(lambda_i)^2` per mode.
        pub fn energies(&self) -> Vec<T> {
            self.responses
                .iter()
                .map(|r| r[1..].iter().map(|&v| v * v).collect::<CompensatedSum<T>>().value())
                .collect()
        }

        /// `E ||X^N||^2` given initial modal coordinates and per-mode
        /// noise variances `sum_j q_j (v_i^T b_j)^2`.
        pub fn second_moment(&self, x0_coords: &[T], variances: &[T]) -> T {
            let det: CompensatedSum<T> = self.propagate(x0_coords).into_iter().map(|v| v * v).collect();
            let sto: CompensatedSum<T> = self.energies().into_iter().zip(variances).map(|(e, &w)| e * w).collect();
            det.value() + self.dt * sto.value()
        }

        /// Final modal coordinates of one sample path, given the standard
        /// normal draws `xi(step, j)` for noise mode `j` (1-based) in step
        /// `step` (0-based, the increment over `[t_step, t_step+1]`).
        pub fn sample_final<F>(&self, x0_coords: &[T], noise: &ModalNoiseMap<T>, mut xi: F) -> Vec<T>
        where
            F: FnMut(usize, &mut [f64]),
        {
            let n = self.n_steps();
            let mut x = self.propagate(x0_coords);
            let sdt = self.dt.sqrt();
            let mut draws = vec![0.0; noise.n_noise_modes()];
            for step in 0..n {
                xi(step, &mut draws);
                let lag = n - step;
                for (j, &d) in draws.iter().enumerate() {
                    let a = sdt * T::lit(d);
                    for &(i, beta) in noise.column(j + 1) {
                        x[i] = x[i] + self.responses[i][lag] * beta * a;
                    }
                }
            }
            x
        }
    }
}
