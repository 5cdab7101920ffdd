//! Small dense complex matrices and their Hermitian functional calculus.
//!
//! Every matrix power, square root and inverse power used by the crate goes
//! through [`MatrixValue::apply_hermitian`], which diagonalizes the Hermitian
//! part and maps the eigenvalues. Positive semidefinite inputs are allowed a
//! relative negative slack of [`TOL_PSD`] before they are rejected; eigenvalues
//! inside the slack are clamped to zero.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative tolerance used when deciding whether a Hermitian matrix is PSD.
pub const TOL_PSD: f64 = 1e-10;

/// Relative tolerance on `‖A − A*‖` for treating a matrix as Hermitian.
pub const TOL_HERMITIAN: f64 = 1e-10;

/// A `d × d` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixValue(DMatrix<C64>);

/// Spectral decomposition `A = U diag(λ) U*` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl Eigh {
    /// Rebuilds `U diag(g(λ)) U*`.
    pub fn map(&self, g: impl Fn(f64) -> f64) -> MatrixValue {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let s = g(lambda);
            for i in 0..d {
                scaled[(i, j)] *= s;
            }
        }
        MatrixValue(&scaled * self.vectors.adjoint())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl MatrixValue {
    pub fn from_dmatrix(m: DMatrix<C64>) -> Self {
        assert!(m.is_square(), "matrix values must be square");
        MatrixValue(m)
    }

    pub fn zeros(dim: usize) -> Self {
        MatrixValue(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        MatrixValue(DMatrix::identity(dim, dim))
    }

    /// Builds a matrix from `dim²` entries in row-major order.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Self {
        assert_eq!(entries.len(), dim * dim);
        MatrixValue(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_real_row_major(dim: usize, entries: &[f64]) -> Self {
        let z: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_row_major(dim, &z)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        let mut m = DMatrix::zeros(d, d);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        MatrixValue(m)
    }

    pub fn scalar(dim: usize, value: C64) -> Self {
        MatrixValue(DMatrix::identity(dim, dim) * value)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.0[(i, j)] = value;
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn row_major(&self) -> Vec<C64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        MatrixValue(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `A* A`, the square of the column modulus `|A|`.
    pub fn gram(&self) -> Self {
        MatrixValue(self.0.adjoint() * &self.0)
    }

    /// `A A*`, the square of the row modulus `|A*|`.
    pub fn cogram(&self) -> Self {
        MatrixValue(&self.0 * self.0.adjoint())
    }

    /// Squared Hilbert–Schmidt norm `τ(A* A)`.
    pub fn hs_norm_sq(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_norm_sq().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn singular_values(&self) -> Vec<f64> {
        if self.dim() == 1 {
            return vec![self.0[(0, 0)].norm()];
        }
        self.0
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect()
    }

    /// Operator norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        self.singular_values().into_iter().fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn hermitian_part(&self) -> Self {
        MatrixValue((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        let skew = (&self.0 - self.0.adjoint()).iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        skew <= rel_tol * self.max_abs_entry().max(f64::MIN_POSITIVE)
    }

    pub fn commutator_hs_norm(&self, other: &Self) -> f64 {
        let c = &self.0 * &other.0 - &other.0 * &self.0;
        c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Eigendecomposition of the Hermitian part.
    pub fn eigh(&self) -> Eigh {
        let d = self.dim();
        if d == 1 {
            return Eigh {
                values: vec![self.0[(0, 0)].re],
                vectors: DMatrix::identity(1, 1),
            };
        }
        let e = self.hermitian_part().0.symmetric_eigen();
        Eigh {
            values: e.eigenvalues.iter().copied().collect(),
            vectors: e.eigenvectors,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigh().min()
    }

    pub fn is_psd(&self, rel_tol: f64) -> bool {
        let e = self.eigh();
        e.min() >= -rel_tol * e.spectral_radius()
    }

    /// Applies `g` to the spectrum of the Hermitian matrix `self`.
    pub fn apply_hermitian(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        if !self.is_hermitian(TOL_HERMITIAN) {
            return Err(Error::InvalidInput("matrix is not Hermitian".into()));
        }
        Ok(self.eigh().map(g))
    }

    /// Spectrum of a PSD matrix with round-off negatives clamped to zero.
    pub fn psd_spectrum(&self, rel_tol: f64) -> Result<Eigh> {
        if !self.is_hermitian(TOL_HERMITIAN) {
            return Err(Error::InvalidInput("matrix is not Hermitian".into()));
        }
        let mut e = self.eigh();
        let scale = e.spectral_radius();
        if e.min() < -rel_tol * scale {
            return Err(Error::NotPositive(format!(
                "minimum eigenvalue {:e} below tolerance {:e}",
                e.min(),
                -rel_tol * scale
            )));
        }
        for v in e.values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Ok(e)
    }

    /// `A^p` for PSD `A` and `p ≥ 0`; negative eigenvalues within tolerance are
    /// clamped to zero.
    pub fn psd_power(&self, p: f64) -> Result<Self> {
        if p < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "psd_power needs p >= 0, got {p}; use pd_power for inverse powers"
            )));
        }
        let e = self.psd_spectrum(TOL_PSD)?;
        Ok(e.map(|l| if l == 0.0 { if p == 0.0 { 1.0 } else { 0.0 } } else { l.powf(p) }))
    }

    pub fn psd_sqrt(&self) -> Result<Self> {
        self.psd_sqrt_with_tol(TOL_PSD)
    }

    pub fn psd_sqrt_with_tol(&self, rel_tol: f64) -> Result<Self> {
        let e = self.psd_spectrum(rel_tol)?;
        Ok(e.map(f64::sqrt))
    }

    /// `A^p` for any real `p`, requiring `A` strictly positive.
    pub fn pd_power(&self, p: f64, min_eigenvalue: f64) -> Result<Self> {
        if !self.is_hermitian(TOL_HERMITIAN) {
            return Err(Error::InvalidInput("matrix is not Hermitian".into()));
        }
        let e = self.eigh();
        if e.min() < min_eigenvalue {
            return Err(Error::NotPositive(format!(
                "minimum eigenvalue {:e} below required {:e}",
                e.min(),
                min_eigenvalue
            )));
        }
        Ok(e.map(|l| l.powf(p)))
    }

    pub fn scale(&self, s: f64) -> Self {
        MatrixValue(&self.0 * C64::new(s, 0.0))
    }

    /// `self += s·other` in place.
    pub fn add_scaled(&mut self, other: &Self, s: f64) {
        self.0.zip_apply(&other.0, |a, b| *a += b * s);
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        MatrixValue(&self.0 * s)
    }

    /// `Re τ(A* B)`, the real Hilbert–Schmidt inner product.
    pub fn real_inner(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// `τ(A* B)`.
    pub fn trace_inner(&self, other: &Self) -> C64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn conj_map(&self, f: impl Fn(C64) -> C64) -> Self {
        MatrixValue(self.0.map(f))
    }
}

impl Add for &MatrixValue {
    type Output = MatrixValue;
    fn add(self, rhs: &MatrixValue) -> MatrixValue {
        MatrixValue(&self.0 + &rhs.0)
    }
}

impl Add for MatrixValue {
    type Output = MatrixValue;
    fn add(self, rhs: MatrixValue) -> MatrixValue {
        MatrixValue(self.0 + rhs.0)
    }
}

impl Sub for &MatrixValue {
    type Output = MatrixValue;
    fn sub(self, rhs: &MatrixValue) -> MatrixValue {
        MatrixValue(&self.0 - &rhs.0)
    }
}

impl Sub for MatrixValue {
    type Output = MatrixValue;
    fn sub(self, rhs: MatrixValue) -> MatrixValue {
        MatrixValue(self.0 - rhs.0)
    }
}

impl Mul for &MatrixValue {
    type Output = MatrixValue;
    fn mul(self, rhs: &MatrixValue) -> MatrixValue {
        MatrixValue(&self.0 * &rhs.0)
    }
}

impl Mul for MatrixValue {
    type Output = MatrixValue;
    fn mul(self, rhs: MatrixValue) -> MatrixValue {
        MatrixValue(self.0 * rhs.0)
    }
}

impl Mul<f64> for &MatrixValue {
    type Output = MatrixValue;
    fn mul(self, rhs: f64) -> MatrixValue {
        self.scale(rhs)
    }
}

impl Mul<f64> for MatrixValue {
    type Output = MatrixValue;
    fn mul(self, rhs: f64) -> MatrixValue {
        MatrixValue(self.0 * C64::new(rhs, 0.0))
    }
}

impl Neg for MatrixValue {
    type Output = MatrixValue;
    fn neg(self) -> MatrixValue {
        MatrixValue(-self.0)
    }
}

impl Neg for &MatrixValue {
    type Output = MatrixValue;
    fn neg(self) -> MatrixValue {
        MatrixValue(-&self.0)
    }
}

impl AddAssign<&MatrixValue> for MatrixValue {
    fn add_assign(&mut self, rhs: &MatrixValue) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&MatrixValue> for MatrixValue {
    fn sub_assign(&mut self, rhs: &MatrixValue) {
        self.0 -= &rhs.0;
    }
}
