use serde::{Deserialize, Deserializer, Serialize};

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Similarities whose reciprocal condition falls below this are refused.
pub const CONJUGATION_RCOND_FLOOR: f64 = 1e-12;

/// A `d`-tuple of `n x n` complex matrices at level `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NcPoint {
    level: usize,
    vars: Vec<ComplexMatrix>,
}

/// Block layout `p x q` used by `gamma`: variable `k` (0-based) sits in block
/// row `k / q`, block column `k % q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockShape {
    pub p: usize,
    pub q: usize,
}

impl BlockShape {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidParameter(format!(
                "block shape must be positive, got {p}x{q}"
            )));
        }
        Ok(Self { p, q })
    }

    /// Number of variables, `p * q`.
    pub fn d(self) -> usize {
        self.p * self.q
    }
}

impl NcPoint {
    pub fn new(vars: Vec<ComplexMatrix>) -> Result<Self> {
        let level = vars
            .first()
            .ok_or_else(|| {
                Error::DimensionMismatch("an nc-point needs at least one variable".into())
            })?
            .rows();
        for (j, v) in vars.iter().enumerate() {
            if v.shape() != (level, level) {
                return Err(Error::DimensionMismatch(format!(
                    "variable {j} is {}x{}, expected {level}x{level}",
                    v.rows(),
                    v.cols()
                )));
            }
        }
        Ok(Self { level, vars })
    }

    pub fn zeros(level: usize, d: usize) -> Self {
        Self {
            level,
            vars: vec![ComplexMatrix::zeros(level, level); d],
        }
    }

    /// Level-1 point from scalars.
    pub fn from_scalars(values: &[C64]) -> Result<Self> {
        Self::new(values.iter().map(|&z| ComplexMatrix::scalar(z)).collect())
    }

    /// The point that is `z` in slot `j` and zero elsewhere.
    pub fn single(d: usize, j: usize, z: ComplexMatrix) -> Result<Self> {
        let mut vars = vec![ComplexMatrix::zeros(z.rows(), z.rows()); d];
        if j >= d {
            return Err(Error::DimensionMismatch(format!(
                "slot {j} out of range for d = {d}"
            )));
        }
        vars[j] = z;
        Self::new(vars)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[ComplexMatrix] {
        &self.vars
    }

    pub fn var(&self, j: usize) -> &ComplexMatrix {
        &self.vars[j]
    }

    pub fn into_vars(self) -> Vec<ComplexMatrix> {
        self.vars
    }

    pub fn map_vars(&self, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        Self {
            level: self.level,
            vars: self.vars.iter().map(f).collect(),
        }
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&ComplexMatrix, &ComplexMatrix) -> ComplexMatrix,
    ) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            level: self.level,
            vars: self
                .vars
                .iter()
                .zip(&other.vars)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.level != other.level || self.arity() != other.arity() {
            return Err(Error::DimensionMismatch(format!(
                "points have shapes (level {}, d {}) and (level {}, d {})",
                self.level,
                self.arity(),
                other.level,
                other.arity()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, z: C64) -> Self {
        self.map_vars(|v| v.scale(z))
    }

    /// `self + t * dir`
    pub fn axpy(&self, t: C64, dir: &Self) -> Result<Self> {
        self.zip_with(dir, |a, b| a + &b.scale(t))
    }

    /// Frobenius norm of the whole tuple.
    pub fn frobenius_norm(&self) -> f64 {
        self.vars
            .iter()
            .map(|v| v.frobenius_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `max_j |x^j|` in operator norm.
    pub fn max_norm(&self) -> f64 {
        self.vars
            .iter()
            .map(ComplexMatrix::operator_norm)
            .fold(0.0, f64::max)
    }

    /// `(x^1 ⊕ y^1, ..., x^d ⊕ y^d)` at level `n + m`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.arity() != other.arity() {
            return Err(Error::DimensionMismatch(format!(
                "direct sum of points with d = {} and d = {}",
                self.arity(),
                other.arity()
            )));
        }
        Ok(Self {
            level: self.level + other.level,
            vars: self
                .vars
                .iter()
                .zip(&other.vars)
                .map(|(a, b)| a.direct_sum(b))
                .collect(),
        })
    }

    /// `(s^-1 x^1 s, ..., s^-1 x^d s)`.
    pub fn conjugate(&self, s: &ComplexMatrix) -> Result<Self> {
        let (s_inv, _) = self.similarity_inverse(s)?;
        Ok(self.conjugate_with(&s_inv, s))
    }

    /// Conjugation with a precomputed inverse: `s_inv * x^j * s`.
    pub fn conjugate_with(&self, s_inv: &ComplexMatrix, s: &ComplexMatrix) -> Self {
        self.map_vars(|v| &(s_inv * v) * s)
    }

    pub(crate) fn similarity_inverse(&self, s: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
        if s.shape() != (self.level, self.level) {
            return Err(Error::DimensionMismatch(format!(
                "similarity is {}x{}, point has level {}",
                s.rows(),
                s.cols(),
                self.level
            )));
        }
        s.inverse_checked(CONJUGATION_RCOND_FLOOR)
    }

    /// Pack into the `(n p) x (n q)` block matrix, filling blocks left to
    /// right and then top to bottom.
    pub fn gamma_pack(&self, shape: BlockShape) -> Result<ComplexMatrix> {
        if self.arity() != shape.d() {
            return Err(Error::DimensionMismatch(format!(
                "gamma packing into {}x{} blocks needs d = {}, got {}",
                shape.p,
                shape.q,
                shape.d(),
                self.arity()
            )));
        }
        let n = self.level;
        let mut out = ComplexMatrix::zeros(n * shape.p, n * shape.q);
        for (k, v) in self.vars.iter().enumerate() {
            out.set_block(k / shape.q, k % shape.q, v);
        }
        Ok(out)
    }

    /// Inverse of [`NcPoint::gamma_pack`].
    pub fn gamma_unpack(packed: &ComplexMatrix, shape: BlockShape, level: usize) -> Result<Self> {
        if level == 0 || packed.shape() != (level * shape.p, level * shape.q) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix is not a {}x{} block matrix of level-{level} blocks",
                packed.rows(),
                packed.cols(),
                shape.p,
                shape.q
            )));
        }
        let vars = (0..shape.d())
            .map(|k| packed.block(k / shape.q, k % shape.q, level, level))
            .collect();
        Ok(Self { level, vars })
    }
}

impl<'de> Deserialize<'de> for NcPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            level: Option<usize>,
            vars: Vec<ComplexMatrix>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let point = NcPoint::new(raw.vars).map_err(serde::de::Error::custom)?;
        if let Some(level) = raw.level {
            if level != point.level {
                return Err(serde::de::Error::custom(format!(
                    "declared level {level} but variables are {}x{}",
                    point.level, point.level
                )));
            }
        }
        Ok(point)
    }
}

/// `|a - b|_F / (1 + |a|_F + |b|_F)` over all variables.
pub fn relative_residual(a: &NcPoint, b: &NcPoint) -> f64 {
    match a.sub(b) {
        Ok(diff) => diff.frobenius_norm() / (1.0 + a.frobenius_norm() + b.frobenius_norm()),
        Err(_) => f64::INFINITY,
    }
}

/// Matrix version of [`relative_residual`].
pub fn relative_matrix_residual(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    (a - b).frobenius_norm() / (1.0 + a.frobenius_norm() + b.frobenius_norm())
}
