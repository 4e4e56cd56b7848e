//! Directional derivatives `Df(z)[h] = lim (f(z + t h) - f(z)) / t` by
//! central differences with one Richardson extrapolation step.

use super::matrix::C64;
use super::point::NcPoint;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffScheme {
    /// Base step is `step_scale * (1 + |z|) / max(1, |h|)`.
    pub step_scale: f64,
}

impl Default for DiffScheme {
    fn default() -> Self {
        Self { step_scale: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeEstimate {
    pub value: NcPoint,
    /// Frobenius distance between the extrapolated value and the finer
    /// central difference.
    pub error_estimate: f64,
    pub step: f64,
}

impl DiffScheme {
    pub fn base_step(&self, z: &NcPoint, h: &NcPoint) -> f64 {
        self.step_scale * (1.0 + z.max_norm()) / h.max_norm().max(1.0)
    }
}

/// Estimate `Df(z)[h]`.
///
/// `f` signals a probe point outside its domain by returning
/// [`crate::Error::DomainExit`]; that error is passed through unchanged.
pub fn directional_derivative<F>(
    f: F,
    z: &NcPoint,
    h: &NcPoint,
    scheme: &DiffScheme,
) -> Result<DerivativeEstimate>
where
    F: Fn(&NcPoint) -> Result<NcPoint>,
{
    z.check_same_shape(h)?;
    let t = scheme.base_step(z, h);
    let central = |step: f64| -> Result<NcPoint> {
        let plus = f(&z.axpy(C64::new(step, 0.0), h)?)?;
        let minus = f(&z.axpy(C64::new(-step, 0.0), h)?)?;
        Ok(plus.sub(&minus)?.scale(C64::new(0.5 / step, 0.0)))
    };
    let coarse = central(t)?;
    let fine = central(0.5 * t)?;
    let value = fine
        .scale(C64::new(4.0 / 3.0, 0.0))
        .sub(&coarse.scale(C64::new(1.0 / 3.0, 0.0)))?;
    let error_estimate = value.sub(&fine)?.frobenius_norm();
    Ok(DerivativeEstimate {
        value,
        error_estimate,
        step: t,
    })
}
