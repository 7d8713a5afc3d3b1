//! Piecewise-linear finite elements on a uniform mesh of `(0, L)` with
//! homogeneous Dirichlet conditions.
//!
//! Functions in `V_h` are stored as interior nodal coefficient vectors.
//! The discrete Laplacian `A_h` is represented by the pencil
//! (stiffness, mass); the L2 projection by a mass solve.

use nalgebra::{DMatrix, DVector, RealField};

use crate::error::{Error, Result};
use crate::scalar::{dot, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh1D<T> {
    length: T,
    n_elem: usize,
}

impl<T: Real> Mesh1D<T> {
    pub fn new(length: T, n_elem: usize) -> Result<Self> {
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidParameter(format!("domain length must be positive, got {length}")));
        }
        if n_elem < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 elements, got {n_elem}")));
        }
        Ok(Self { length, n_elem })
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn n_elem(&self) -> usize {
        self.n_elem
    }

    pub fn h(&self) -> T {
        self.length / T::from_count(self.n_elem)
    }

    pub fn n_dof(&self) -> usize {
        self.n_elem - 1
    }

    /// Coordinate of interior node `i` (0-based), i.e. `(i + 1) h`.
    pub fn node(&self, i: usize) -> T {
        T::from_count(i + 1) * self.h()
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n_dof()).map(move |i| self.node(i))
    }
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal<T> {
    diag: Vec<T>,
    off: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch { expected: diag.len().saturating_sub(1), found: off.len() });
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn off_diag(&self) -> &[T] {
        &self.off
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let diag = self.diag.iter().zip(&other.diag).map(|(&x, &y)| a * x + b * y).collect();
        let off = self.off.iter().zip(&other.off).map(|(&x, &y)| a * x + b * y).collect();
        Ok(Self { diag, off })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); v.len()];
        self.mul_vec_into(v, &mut out);
        out
    }

    pub fn mul_vec_into(&self, v: &[T], out: &mut [T]) {
        let n = self.dim();
        debug_assert_eq!(v.len(), n);
        for i in 0..n {
            let mut s = self.diag[i] * v[i];
            if i > 0 {
                s = s + self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s = s + self.off[i] * v[i + 1];
            }
            out[i] = s;
        }
    }

    /// `v^T self v`.
    pub fn quadratic_form(&self, v: &[T]) -> T {
        let n = self.dim();
        let mut s = T::zero();
        for i in 0..n {
            s = s + self.diag[i] * v[i] * v[i];
            if i + 1 < n {
                s = s + T::lit(2.0) * self.off[i] * v[i] * v[i + 1];
            }
        }
        s
    }

    /// `L D L^T` factorization; fails on a zero or non-finite pivot.
    pub fn factorize(&self) -> Result<TridiagonalLdl<T>> {
        let n = self.dim();
        let mut d = Vec::with_capacity(n);
        let mut l = Vec::with_capacity(n.saturating_sub(1));
        d.push(self.diag[0]);
        for i in 1..n {
            let prev = d[i - 1];
            if prev == T::zero() || !prev.is_finite() {
                return Err(Error::Singular(i - 1));
            }
            let li = self.off[i - 1] / prev;
            l.push(li);
            d.push(self.diag[i] - li * self.off[i - 1]);
        }
        if d[n - 1] == T::zero() || !d[n - 1].is_finite() {
            return Err(Error::Singular(n - 1));
        }
        Ok(TridiagonalLdl { l, d })
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.dim();
        let mut m = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            m[i][i] = self.diag[i];
            if i + 1 < n {
                m[i][i + 1] = self.off[i];
                m[i + 1][i] = self.off[i];
            }
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct TridiagonalLdl<T> {
    l: Vec<T>,
    d: Vec<T>,
}

impl<T: Real> TridiagonalLdl<T> {
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let n = self.d.len();
        for i in 1..n {
            x[i] = x[i] - self.l[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] = x[i] / self.d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            x[i] = x[i] - self.l[i] * x[i + 1];
        }
    }
}

/// Mass and stiffness matrices of the hat-function basis.
#[derive(Debug, Clone)]
pub struct FemOperators<T> {
    mesh: Mesh1D<T>,
    mass: SymTridiagonal<T>,
    stiffness: SymTridiagonal<T>,
    mass_factor: TridiagonalLdl<T>,
}

/// Mass: diagonal `2h/3`, off-diagonal `h/6`. Stiffness: `2/h` and `-1/h`.
pub fn assemble<T: Real>(mesh: &Mesh1D<T>) -> FemOperators<T> {
    let n = mesh.n_dof();
    let h = mesh.h();
    let mass = SymTridiagonal {
        diag: vec![T::lit(2.0) * h / T::lit(3.0); n],
        off: vec![h / T::lit(6.0); n - 1],
    };
    let stiffness = SymTridiagonal {
        diag: vec![T::lit(2.0) / h; n],
        off: vec![-T::one() / h; n - 1],
    };
    let mass_factor = mass.factorize().expect("mass matrix is SPD");
    FemOperators { mesh: *mesh, mass, stiffness, mass_factor }
}

/// Inner products `(e_j, phi_i)` of the Dirichlet eigenfunction
/// `e_j(x) = sqrt(2/L) sin(j pi x / L)` with every interior hat function.
pub fn load_vector_sine<T: Real>(mesh: &Mesh1D<T>, j: usize) -> Vec<T> {
    assert!(j >= 1, "sine modes are 1-based");
    let l = mesh.length();
    let h = mesh.h();
    let k = T::from_count(j) * T::PI() / l;
    let amp = (T::lit(2.0) / l).sqrt() / (k * k) * (T::lit(2.0) - T::lit(2.0) * (k * h).cos()) / h;
    // sin(j pi i / n_elem) evaluated through the integer phase keeps exact zeros
    let n_elem = mesh.n_elem();
    (0..mesh.n_dof())
        .map(|i| {
            let phase = (j * (i + 1)) % (2 * n_elem);
            amp * crate::special::sin_pi(T::from_count(phase) / T::from_count(n_elem))
        })
        .collect()
}

impl<T: Real> FemOperators<T> {
    pub fn mesh(&self) -> &Mesh1D<T> {
        &self.mesh
    }

    pub fn mass(&self) -> &SymTridiagonal<T> {
        &self.mass
    }

    pub fn stiffness(&self) -> &SymTridiagonal<T> {
        &self.stiffness
    }

    pub fn n_dof(&self) -> usize {
        self.mass.dim()
    }

    pub(crate) fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n_dof() {
            return Err(Error::DimensionMismatch { expected: self.n_dof(), found: len });
        }
        Ok(())
    }

    /// Coefficients of `P_h f` from the load vector `(f, phi_i)`.
    pub fn l2_project(&self, load: &[T]) -> Result<Vec<T>> {
        self.check_dim(load.len())?;
        let x = self.mass_factor.solve(load);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular(0));
        }
        Ok(x)
    }

    /// L2 norm of the finite element function with coefficients `v`.
    pub fn h_norm(&self, v: &[T]) -> T {
        self.mass.quadratic_form(v).max(T::zero()).sqrt()
    }

    /// L2 inner product of two finite element functions.
    pub fn inner(&self, u: &[T], v: &[T]) -> T {
        dot(&self.mass.mul_vec(u), v)
    }

    /// `A_h v = M^{-1} K v`.
    pub fn apply_discrete_laplacian(&self, v: &[T]) -> Result<Vec<T>> {
        self.check_dim(v.len())?;
        Ok(self.mass_factor.solve(&self.stiffness.mul_vec(v)))
    }
}

/// Largest system accepted by the dense generalized eigensolver.
pub const DENSE_EIGEN_LIMIT: usize = 1024;

/// Generalized eigenpairs of (stiffness, mass), eigenvectors M-orthonormal.
#[derive(Debug, Clone)]
pub struct ModalBasis<T> {
    eigenvalues: Vec<T>,
    /// `vectors[k]` holds the nodal coefficients of eigenvector `k`.
    vectors: Vec<Vec<T>>,
}

impl<T: Real> ModalBasis<T> {
    /// Closed-form eigenpairs of the uniform mesh: nodal sine vectors with
    /// `lambda_{h,k} = 6 (1 - cos t) / (h^2 (2 + cos t))`, `t = k pi h / L`.
    pub fn uniform(mesh: &Mesh1D<T>) -> Self {
        let n = mesh.n_dof();
        let n_elem = mesh.n_elem();
        let h = mesh.h();
        let mut eigenvalues = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n);
        for k in 1..=n {
            let t = T::from_count(k) * T::PI() / T::from_count(n_elem);
            let c = t.cos();
            eigenvalues.push(T::lit(6.0) * (T::one() - c) / (h * h * (T::lit(2.0) + c)));
            // |s|_M^2 = h (2 + cos t) / 3 * n_elem / 2
            let norm = (h * (T::lit(2.0) + c) / T::lit(3.0) * T::from_count(n_elem) / T::lit(2.0)).sqrt();
            let v = (0..n)
                .map(|i| {
                    let phase = (k * (i + 1)) % (2 * n_elem);
                    crate::special::sin_pi(T::from_count(phase) / T::from_count(n_elem)) / norm
                })
                .collect();
            vectors.push(v);
        }
        Self { eigenvalues, vectors }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn vector(&self, k: usize) -> &[T] {
        &self.vectors[k]
    }

    /// Modal coordinates `v_k^T load`; these expand `M^{-1} load`.
    pub fn coords_of_load(&self, load: &[T]) -> Vec<T> {
        self.vectors.iter().map(|v| dot(v, load)).collect()
    }

    /// Modal coordinates of a coefficient vector: `v_k^T M c`.
    pub fn coords_of_coefficients(&self, ops: &FemOperators<T>, c: &[T]) -> Vec<T> {
        self.coords_of_load(&ops.mass().mul_vec(c))
    }

    /// Nodal coefficients of `sum_k coords[k] v_k`.
    pub fn synthesize(&self, coords: &[T]) -> Vec<T> {
        let n = self.vectors.first().map_or(0, Vec::len);
        let mut out = vec![T::zero(); n];
        for (v, &a) in self.vectors.iter().zip(coords) {
            if a != T::zero() {
                for (o, &x) in out.iter_mut().zip(v) {
                    *o = *o + a * x;
                }
            }
        }
        out
    }
}

impl<T: Real + RealField> ModalBasis<T> {
    /// Dense generalized eigensolve through the Cholesky factor of the mass
    /// matrix. Eigenvalues ascending.
    pub fn dense(ops: &FemOperators<T>) -> Result<Self> {
        let n = ops.n_dof();
        if n > DENSE_EIGEN_LIMIT {
            return Err(Error::Eigensolve(format!("n_dof = {n} exceeds dense limit {DENSE_EIGEN_LIMIT}")));
        }
        let m = dense(ops.mass());
        let k = dense(ops.stiffness());
        let chol = m.cholesky().ok_or_else(|| Error::Eigensolve("mass matrix not SPD".into()))?;
        let l = chol.l();
        let y = l
            .solve_lower_triangular(&k)
            .ok_or_else(|| Error::Eigensolve("triangular solve failed".into()))?;
        let c = l
            .solve_lower_triangular(&y.transpose())
            .ok_or_else(|| Error::Eigensolve("triangular solve failed".into()))?;
        let c = (&c + c.transpose()) * nalgebra::convert::<f64, T>(0.5);
        let eig = c
            .try_symmetric_eigen(T::default_epsilon(), 0)
            .ok_or_else(|| Error::Eigensolve("symmetric eigensolver did not converge".into()))?;
        let lt = l.transpose();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut eigenvalues = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n);
        for &idx in &order {
            let u: DVector<T> = eig.eigenvectors.column(idx).into_owned();
            let v = lt
                .solve_upper_triangular(&u)
                .ok_or_else(|| Error::Eigensolve("back substitution failed".into()))?;
            eigenvalues.push(eig.eigenvalues[idx]);
            vectors.push(v.iter().copied().collect());
        }
        Ok(Self { eigenvalues, vectors })
    }
}

fn dense<T: Real + RealField>(m: &SymTridiagonal<T>) -> DMatrix<T> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            m.diag()[i]
        } else if i + 1 == j {
            m.off_diag()[i]
        } else if j + 1 == i {
            m.off_diag()[j]
        } else {
            T::zero()
        }
    })
}

/// `A_h^s v` by expansion in the (stiffness, mass) eigenvectors.
pub fn discrete_fractional_apply<T: Real + RealField>(ops: &FemOperators<T>, s: T, v: &[T]) -> Result<Vec<T>> {
    ops.check_dim(v.len())?;
    let basis = ModalBasis::dense(ops)?;
    Ok(fractional_apply_with(&basis, ops, s, v))
}

/// `A_h^s v` with a precomputed basis.
pub fn fractional_apply_with<T: Real>(basis: &ModalBasis<T>, ops: &FemOperators<T>, s: T, v: &[T]) -> Vec<T> {
    let coords = basis.coords_of_coefficients(ops, v);
    let scaled: Vec<T> = coords
        .iter()
        .zip(basis.eigenvalues())
        .map(|(&c, &lam)| c * num_traits::Float::powf(lam, s))
        .collect();
    basis.synthesize(&scaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ops(n_elem: usize) -> FemOperators<f64> {
        assemble(&Mesh1D::new(1.0, n_elem).unwrap())
    }

    #[test]
    fn mesh_validation() {
        assert!(Mesh1D::new(1.0_f64, 1).is_err());
        assert!(Mesh1D::new(0.0_f64, 4).is_err());
        let m = Mesh1D::new(2.0_f64, 4).unwrap();
        assert_eq!(m.n_dof(), 3);
        assert_eq!(m.h(), 0.5);
        assert_eq!(m.nodes().collect::<Vec<_>>(), vec![0.5, 1.0, 1.5]);
    }

    #[test]
    fn assembled_entries_for_quarter_mesh() {
        let o = ops(4);
        assert!(o.stiffness().diag().iter().all(|&d| (d - 8.0).abs() < 1e-14));
        assert!(o.stiffness().off_diag().iter().all(|&d| (d + 4.0).abs() < 1e-14));
        assert!(o.mass().diag().iter().all(|&d| (d - 1.0 / 6.0).abs() < 1e-15));
        assert!(o.mass().off_diag().iter().all(|&d| (d - 1.0 / 24.0).abs() < 1e-15));
    }

    #[test]
    fn stiffness_annihilates_linear_sequences_away_from_the_boundary() {
        let o = ops(10);
        let v: Vec<f64> = (1..10).map(|i| 3.0 + 2.0 * i as f64).collect();
        let r = o.stiffness().mul_vec(&v);
        for (i, x) in r.iter().enumerate() {
            if i != 0 && i != 8 {
                assert!(x.abs() < 1e-12, "row {i}: {x}");
            }
        }
        assert!(r[0].abs() > 1.0 && r[8].abs() > 1.0);
    }

    #[test]
    fn sine_load_closed_form_examples() {
        let mesh = Mesh1D::new(1.0_f64, 2).unwrap();
        let b = load_vector_sine(&mesh, 1);
        let pi2 = std::f64::consts::PI.powi(2);
        assert_eq!(b.len(), 1);
        assert!((b[0] - 4.0 * 2f64.sqrt() / pi2).abs() < 1e-15);

        let mesh = Mesh1D::new(1.0_f64, 8).unwrap();
        assert!(load_vector_sine(&mesh, 8).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn sine_load_matches_gauss_quadrature() {
        let mesh = Mesh1D::new(1.7_f64, 9).unwrap();
        let h = mesh.h();
        let l = mesh.length();
        for j in [1usize, 4, 9, 13] {
            let b = load_vector_sine(&mesh, j);
            for (i, &bi) in b.iter().enumerate() {
                let xi = mesh.node(i);
                let e = |x: f64| (2.0 / l).sqrt() * (j as f64 * std::f64::consts::PI * x / l).sin();
                let left = crate::quadrature::integrate(|x| e(x) * (x - (xi - h)) / h, xi - h, xi, 1e-14, 30)
                    .unwrap()
                    .value;
                let right = crate::quadrature::integrate(|x| e(x) * ((xi + h) - x) / h, xi, xi + h, 1e-14, 30)
                    .unwrap()
                    .value;
                assert!((bi - (left + right)).abs() < 1e-13, "j {j} i {i}");
                assert!(bi.abs() <= h * (2.0 / l).sqrt() + 1e-15);
            }
        }
    }

    #[test]
    fn projection_round_trip_and_zero() {
        let o = ops(12);
        let c: Vec<f64> = (0..11).map(|i| (i as f64 * 0.7).sin() + 0.1).collect();
        let back = o.l2_project(&o.mass().mul_vec(&c)).unwrap();
        for (a, b) in c.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(o.l2_project(&vec![0.0; 11]).unwrap().iter().all(|&x| x == 0.0));
        assert!(o.l2_project(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn projection_of_first_mode_approaches_its_interpolant() {
        let mesh = Mesh1D::new(1.0_f64, 256).unwrap();
        let o = assemble(&mesh);
        let p = o.l2_project(&load_vector_sine(&mesh, 1)).unwrap();
        let sup = mesh
            .nodes()
            .zip(&p)
            .map(|(x, &v)| (v - 2f64.sqrt() * (std::f64::consts::PI * x).sin()).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-3, "sup error {sup}");
        assert!((o.h_norm(&p) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn h_norm_basic_properties() {
        let o = ops(6);
        assert_eq!(o.h_norm(&vec![0.0; 5]), 0.0);
        let v = vec![0.3, -1.0, 2.0, 0.5, 0.1];
        let v2: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
        assert!((o.h_norm(&v2) - 2.0 * o.h_norm(&v)).abs() < 1e-14);
    }

    #[test]
    fn closed_form_basis_matches_dense_eigensolve() {
        let o = ops(17);
        let closed = ModalBasis::uniform(o.mesh());
        let dense = ModalBasis::dense(&o).unwrap();
        for k in 0..closed.len() {
            let a = closed.eigenvalues()[k];
            let b = dense.eigenvalues()[k];
            assert!(((a - b) / a).abs() < 1e-12, "mode {k}: {a} vs {b}");
            // same vector up to sign
            let d = dot(closed.vector(k), &o.mass().mul_vec(dense.vector(k)));
            assert!((d.abs() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn discrete_eigenvalues_dominate_continuous_ones() {
        for n_elem in [4, 9, 32] {
            let mesh = Mesh1D::new(2.0_f64, n_elem).unwrap();
            let basis = ModalBasis::dense(&assemble(&mesh)).unwrap();
            for (k, &lam) in basis.eigenvalues().iter().enumerate() {
                let exact = ((k + 1) as f64 * std::f64::consts::PI / 2.0).powi(2);
                assert!(lam >= exact * (1.0 - 1e-12), "k {k}: {lam} < {exact}");
            }
        }
    }

    #[test]
    fn first_eigenvalue_converges_at_second_order() {
        let pi2 = std::f64::consts::PI.powi(2);
        let errs: Vec<f64> = [8usize, 16, 32, 64, 128]
            .iter()
            .map(|&n| ModalBasis::uniform(&Mesh1D::new(1.0, n).unwrap()).eigenvalues()[0] - pi2)
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = [8.0f64, 16.0, 32.0, 64.0, 128.0]
            .iter()
            .zip(&errs)
            .map(|(n, e)| ((1.0 / n).ln(), e.ln()))
            .unzip();
        let mx = xs.iter().sum::<f64>() / 5.0;
        let my = ys.iter().sum::<f64>() / 5.0;
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!(slope >= 1.9, "slope {slope}");
    }

    #[test]
    fn operators_are_exactly_symmetric_and_positive() {
        let o = ops(9);
        for m in [o.mass(), o.stiffness()] {
            let d = m.to_dense();
            for i in 0..d.len() {
                for j in 0..d.len() {
                    assert_eq!(d[i][j].to_bits(), d[j][i].to_bits());
                }
            }
            assert!(m.factorize().is_ok());
        }
    }

    #[test]
    fn fractional_powers() {
        let o = ops(10);
        let v: Vec<f64> = (0..9).map(|i| ((i * i) as f64 * 0.37).cos()).collect();
        let id = discrete_fractional_apply(&o, 0.0, &v).unwrap();
        for (a, b) in v.iter().zip(&id) {
            assert!((a - b).abs() < 1e-12);
        }
        let basis = ModalBasis::dense(&o).unwrap();
        for k in [0usize, 4, 8] {
            let e = basis.vector(k);
            let a = fractional_apply_with(&basis, &o, 1.0, e);
            let lam = basis.eigenvalues()[k];
            for (x, y) in a.iter().zip(e) {
                assert!((x - lam * y).abs() < 1e-10 * lam);
            }
        }
        let half = fractional_apply_with(&basis, &o, 0.5, &fractional_apply_with(&basis, &o, 0.5, &v));
        let one = o.apply_discrete_laplacian(&v).unwrap();
        let scale = one.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (a, b) in half.iter().zip(&one) {
            assert!((a - b).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn dense_limit_is_enforced() {
        let o = ops(DENSE_EIGEN_LIMIT + 2);
        assert!(matches!(ModalBasis::dense(&o), Err(Error::Eigensolve(_))));
    }

    proptest! {
        #[test]
        fn tridiagonal_solve_residual_is_small(
            n_elem in 3usize..200,
            seed in proptest::collection::vec(-1.0f64..1.0, 200),
        ) {
            let o = ops(n_elem);
            let b: Vec<f64> = seed.iter().take(n_elem - 1).copied().collect();
            let x = o.l2_project(&b).unwrap();
            let r = o.mass().mul_vec(&x);
            let res = r.iter().zip(&b).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
            let nb = b.iter().map(|c| c * c).sum::<f64>().sqrt();
            prop_assert!(res <= 1e-12 * nb.max(1e-300));
        }
    }
}
