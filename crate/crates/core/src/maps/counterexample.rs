use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, NcPoint, C64};

/// `h(w) = sum_k coeffs[k] w^k` on a square matrix, by Horner's scheme.
pub fn polynomial_apply(coeffs: &[C64], w: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(w.rows());
    let mut acc = ComplexMatrix::zeros(w.rows(), w.cols());
    for &c in coeffs.iter().rev() {
        acc = &(&acc * w) + &id.scale(c);
    }
    acc
}

pub(crate) fn validate_polynomial(coeffs: &[C64]) -> Result<()> {
    if coeffs.first().is_some_and(|c| *c != C64::new(0.0, 0.0)) {
        return Err(Error::InvalidParameter("h must satisfy h(0) = 0".into()));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter(
            "h has a non-finite coefficient".into(),
        ));
    }
    if coeffs.iter().skip(1).all(|c| c.norm() == 0.0) {
        return Err(Error::InvalidParameter("h must be non-constant".into()));
    }
    Ok(())
}

/// `(x, y, z) -> (x, y, z + h(xy - yx))`.
pub fn counterexample_apply(coeffs: &[C64], x: &NcPoint) -> Result<NcPoint> {
    if x.arity() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "counterexample map needs d = 3, got {}",
            x.arity()
        )));
    }
    let comm = ComplexMatrix::commutator(x.var(0), x.var(1));
    let shifted = x.var(2) + &polynomial_apply(coeffs, &comm);
    NcPoint::new(vec![x.var(0).clone(), x.var(1).clone(), shifted])
}
