//! Adaptive composite Gauss-Legendre quadrature (4 nodes per panel,
//! interval halving).

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

const NODES: [f64; 2] = [0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const WEIGHTS: [f64; 2] = [0.652_145_154_862_546_1, 0.347_854_845_137_453_9];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult<T> {
    pub value: T,
    /// Sum over accepted panels of |two-half estimate - one-panel estimate|.
    pub error: T,
    pub panels: usize,
}

fn gauss4<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> T {
    let half = T::lit(0.5) * (b - a);
    let mid = T::lit(0.5) * (a + b);
    let mut s = T::zero();
    for (&x, &w) in NODES.iter().zip(&WEIGHTS) {
        let dx = half * T::lit(x);
        s = s + T::lit(w) * (f(mid - dx) + f(mid + dx));
    }
    s * half
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol`.
///
/// Each panel is accepted once its two-half estimate agrees with the
/// single-panel estimate to a share of `abs_tol` proportional to its length.
/// Panels still unresolved at `max_depth` are accepted and their
/// discrepancy is charged to the returned error; if that total exceeds
/// `abs_tol` the call fails with [`Error::Tolerance`].
pub fn integrate<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    abs_tol: T,
    max_depth: usize,
) -> Result<QuadratureResult<T>> {
    if a == b {
        return Ok(QuadratureResult { value: T::zero(), error: T::zero(), panels: 0 });
    }
    let total = (b - a).abs();
    let mut value = CompensatedSum::new();
    let mut error = T::zero();
    let mut panels = 0usize;
    let mut stack = vec![(a, b, gauss4(&mut f, a, b), 0usize)];
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = T::lit(0.5) * (lo + hi);
        let left = gauss4(&mut f, lo, mid);
        let right = gauss4(&mut f, mid, hi);
        let fine = left + right;
        let diff = (fine - coarse).abs();
        let local_tol = abs_tol * (hi - lo).abs() / total;
        let floor = T::epsilon() * T::lit(8.0) * fine.abs();
        if diff <= local_tol.max(floor) || depth >= max_depth {
            value.add(fine);
            error = error + diff;
            panels += 2;
        } else {
            // right pushed first so the left half is processed first
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    if !error.is_finite() || error > abs_tol.max(T::epsilon() * value.value().abs() * T::lit(64.0)) * T::lit(4.0) {
        return Err(Error::Tolerance { estimate: error.as_f64(), target: abs_tol.as_f64() });
    }
    Ok(QuadratureResult { value: value.value(), error, panels })
}

/// Integrates over consecutive breakpoints, summing the pieces in order.
pub fn integrate_piecewise<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    breakpoints: &[T],
    abs_tol: T,
    max_depth: usize,
) -> Result<QuadratureResult<T>> {
    let mut value = CompensatedSum::new();
    let mut error = T::zero();
    let mut panels = 0;
    let pieces = breakpoints.len().saturating_sub(1).max(1);
    let piece_tol = abs_tol / T::from_count(pieces);
    for w in breakpoints.windows(2) {
        let r = integrate(&mut f, w[0], w[1], piece_tol, max_depth)?;
        value.add(r.value);
        error = error + r.error;
        panels += r.panels;
    }
    Ok(QuadratureResult { value: value.value(), error, panels })
}
