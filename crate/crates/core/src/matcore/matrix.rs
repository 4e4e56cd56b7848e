use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Eigenvalues of a Hermitian input within this band around zero are treated
/// as roundoff and clamped, relative to `max(1, largest |eigenvalue|)`.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Which Hermitian square root [`ComplexMatrix::herm_sqrt_inv`] returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqrtPower {
    /// `M^{1/2}`
    Half,
    /// `M^{-1/2}`
    NegHalf,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn scalar(z: C64) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![z],
        }
    }

    /// Matrix unit `E_{ij}` of size `rows x cols`.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m[(i, j)] = ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.is_finite())
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.cols).map(<[C64]>::to_vec).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, z: C64) -> Self {
        self.map(|x| x * z)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self
            .to_na()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.singular_values()[0]
    }

    /// `sigma_max / sigma_min`; infinite for singular or non-square input.
    pub fn condition_number(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let sv = self.singular_values();
        let smin = *sv.last().unwrap();
        if smin == 0.0 {
            f64::INFINITY
        } else {
            sv[0] / smin
        }
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Inverse via LU with partial pivoting, together with the reciprocal
    /// 1-norm condition number `1 / (|M|_1 |M^-1|_1)`. Fails with
    /// [`Error::Singular`] when that reciprocal condition is below `rcond_floor`.
    pub fn inverse_checked(&self, rcond_floor: f64) -> Result<(Self, f64)> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "cannot invert a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let inv = self
            .to_na()
            .lu()
            .try_inverse()
            .map(|m| Self::from_na(&m))
            .ok_or(Error::Singular { rcond: 0.0 })?;
        if !inv.is_finite() {
            return Err(Error::Singular { rcond: 0.0 });
        }
        let rcond = 1.0 / (self.one_norm() * inv.one_norm());
        if !(rcond >= rcond_floor) {
            return Err(Error::Singular { rcond });
        }
        Ok((inv, rcond))
    }

    /// Kronecker product with `self` as the outer factor.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    /// The level-`n` amplification in block layout: the block matrix whose
    /// `(i, j)` block is `self[(i, j)] * I_n`.
    pub fn amplify(&self, n: usize) -> Self {
        self.kron(&Self::identity(n))
    }

    /// The `(bi, bj)` block of size `br x bc`.
    pub fn block(&self, bi: usize, bj: usize, br: usize, bc: usize) -> Self {
        Self::from_fn(br, bc, |i, j| self[(bi * br + i, bj * bc + j)])
    }

    pub fn set_block(&mut self, bi: usize, bj: usize, block: &Self) {
        let (br, bc) = block.shape();
        for i in 0..br {
            for j in 0..bc {
                self[(bi * br + i, bj * bc + j)] = block[(i, j)];
            }
        }
    }

    /// Block-diagonal sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out[(self.rows + i, self.cols + j)] = other[(i, j)];
            }
        }
        out
    }

    pub fn commutator(a: &Self, b: &Self) -> Self {
        &(a * b) - &(b * a)
    }

    /// `max |M^* M - I|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&(&self.adjoint() * self) - &Self::identity(self.rows)).max_abs()
    }

    pub fn ensure_unitary(&self, tol: f64) -> Result<()> {
        let defect = self.unitarity_defect();
        if defect <= tol {
            Ok(())
        } else {
            Err(Error::NotUnitary(defect))
        }
    }

    fn hermitian_residual(&self) -> f64 {
        (self - &self.adjoint()).frobenius_norm() / (1.0 + self.frobenius_norm())
    }

    /// Eigen-decomposition of a Hermitian matrix: eigenvalues (ascending) and
    /// the unitary whose columns are the matching eigenvectors.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, Self)> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(
                "Hermitian eigenproblem needs a square matrix".into(),
            ));
        }
        let res = self.hermitian_residual();
        if res > 1e-10 {
            return Err(Error::NotHermitian(res));
        }
        let sym = (self + &self.adjoint()).scale(C64::new(0.5, 0.0));
        let eig = nalgebra::linalg::SymmetricEigen::new(sym.to_na());
        let mut order: Vec<usize> = (0..self.rows).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = Self::from_fn(self.rows, self.rows, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok((values, vectors))
    }

    /// Smallest eigenvalue of a Hermitian matrix.
    pub fn min_hermitian_eigenvalue(&self) -> Result<f64> {
        Ok(self.hermitian_eigen()?.0[0])
    }

    /// Hermitian `M^{1/2}` or `M^{-1/2}` through the unitary eigendecomposition.
    ///
    /// Eigenvalues in `[-EIGEN_CLAMP * scale, 0]` are clamped to zero; anything
    /// more negative is an error. `M^{-1/2}` additionally needs the smallest
    /// eigenvalue above `EIGEN_CLAMP * scale`.
    pub fn herm_sqrt_inv(&self, power: SqrtPower) -> Result<Self> {
        let (values, vectors) = self.hermitian_eigen()?;
        let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let floor = EIGEN_CLAMP * scale;
        let min = values[0];
        if min < -floor || (power == SqrtPower::NegHalf && min <= floor) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
            });
        }
        let roots: Vec<C64> = values
            .iter()
            .map(|&v| {
                let r = v.max(0.0).sqrt();
                C64::new(if power == SqrtPower::Half { r } else { 1.0 / r }, 0.0)
            })
            .collect();
        let scaled = Self::from_fn(self.rows, self.rows, |i, j| vectors[(i, j)] * roots[j]);
        Ok(&scaled * &vectors.adjoint())
    }

    /// Complex Schur form `M = Q T Q^*` with `T` upper triangular.
    pub fn schur(&self) -> Result<(Self, Self)> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(
                "Schur form needs a square matrix".into(),
            ));
        }
        let (q, t) = nalgebra::linalg::Schur::new(self.to_na()).unpack();
        Ok((Self::from_na(&q), Self::from_na(&t)))
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        let (_, t) = self.schur()?;
        Ok((0..t.rows).map(|i| t[(i, i)]).collect())
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(self
            .eigenvalues()?
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    /// Eigenvalues and unit eigenvectors (as columns) by back substitution on
    /// the Schur form. For defective matrices the returned vectors are nearly
    /// parallel; callers judge usefulness through the condition number.
    pub fn eigenvectors(&self) -> Result<(Vec<C64>, Self)> {
        let (q, t) = self.schur()?;
        let n = t.rows;
        let tiny = f64::EPSILON * t.frobenius_norm().max(f64::MIN_POSITIVE);
        let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
        let mut y = Self::zeros(n, n);
        for k in 0..n {
            y[(k, k)] = ONE;
            for i in (0..k).rev() {
                let s: C64 = (i + 1..=k).map(|j| t[(i, j)] * y[(j, k)]).sum();
                let mut den = t[(i, i)] - values[k];
                if den.norm() < tiny {
                    den = C64::new(tiny, 0.0);
                }
                y[(i, k)] = -s / den;
            }
        }
        let mut v = &q * &y;
        for k in 0..n {
            let norm = (0..n).map(|i| v[(i, k)].norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 && norm.is_finite() {
                for i in 0..n {
                    v[(i, k)] /= norm;
                }
            }
        }
        Ok((values, v))
    }

    pub(crate) fn to_na(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_na(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds"
        );
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds"
        );
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.shape(),
            rhs.shape(),
            "shape mismatch in matrix addition"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.shape(),
            rhs.shape(),
            "shape mismatch in matrix subtraction"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).expect("shape mismatch in matrix product")
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.data.chunks(self.cols) {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:>+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Nested row-major arrays of `[re, im]` pairs.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<C64>>::deserialize(deserializer)?;
        Self::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
