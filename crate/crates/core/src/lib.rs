//! Solver library for the linear stochastic Volterra equation
//! `dX + int_0^t b(t-s) A X(s) ds dt = dW^Q` on an interval, with the Riesz
//! kernel `b(t) = t^(rho-2) / Gamma(rho-1)`, `1 < rho < 2`.
//!
//! Space is discretized by piecewise-linear finite elements, time by
//! implicit Euler with convolution-quadrature memory. The numerical core is
//! generic over `f32`/`f64`; the aliases below fix `f64`.

// `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod fem1d;
pub mod kernel_cq;
pub mod noise;
pub mod quadrature;
pub mod reference;
pub mod scalar;
pub mod scheme;
pub mod special;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mesh = fem1d::Mesh1D<f64>;
pub type Operators = fem1d::FemOperators<f64>;
pub type Basis = fem1d::ModalBasis<f64>;
pub type Kernel = kernel_cq::KernelSpec<f64>;
pub type Weights = kernel_cq::CqWeights<f64>;
pub type Covariance = noise::CovarianceSpec<f64>;
pub type Spectral = reference::SpectralVector<f64>;
pub type State<'a> = scheme::SchemeState<'a, f64>;
