use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, NcPoint, C64};

/// Rcond floor for `I - conj(a) Z`.
const MOBIUS_RCOND_FLOOR: f64 = 1e-12;

/// Disk automorphism `m(z) = e^{i theta} (z - a) / (1 - conj(a) z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusParams {
    pub theta: f64,
    pub a: C64,
}

impl MobiusParams {
    pub fn new(theta: f64, a: C64) -> Result<Self> {
        let m = Self { theta, a };
        m.validate()?;
        Ok(m)
    }

    pub fn rotation(theta: f64) -> Self {
        Self {
            theta,
            a: C64::new(0.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() || !self.a.is_finite() || self.a.norm() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "Möbius map needs finite theta and |a| < 1, got theta = {}, a = {}",
                self.theta, self.a
            )));
        }
        Ok(())
    }

    /// `m^{-1}(w) = e^{-i theta} (w + e^{i theta} a) / (1 + conj(a) e^{-i theta} w)`,
    /// written again in standard form.
    pub fn inverse(&self) -> Self {
        Self {
            theta: -self.theta,
            a: -C64::from_polar(1.0, self.theta) * self.a,
        }
    }

    pub fn eval_scalar(&self, z: C64) -> C64 {
        C64::from_polar(1.0, self.theta) * (z - self.a) / (1.0 - self.a.conj() * z)
    }

    pub fn apply(&self, z: &ComplexMatrix) -> Result<ComplexMatrix> {
        mobius_apply(self.theta, self.a, z)
    }
}

/// `e^{i theta} (Z - a I)(I - conj(a) Z)^{-1}`.
///
/// Only invertibility of `I - conj(a) Z` is checked; `|Z| < 1` is the
/// caller's contract.
pub fn mobius_apply(theta: f64, a: C64, z: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !z.is_square() {
        return Err(Error::DimensionMismatch(
            "Möbius maps act on square matrices".into(),
        ));
    }
    let id = ComplexMatrix::identity(z.rows());
    let shifted = z - &id.scale(a);
    let (inv, _) = (&id - &z.scale(a.conj())).inverse_checked(MOBIUS_RCOND_FLOOR)?;
    Ok((&shifted * &inv).scale(C64::from_polar(1.0, theta)))
}

/// `sigma ∘ (m^1(x^1), ..., m^d(x^d))`: slot `permutation[j]` of the output
/// receives `m^j(x^j)`.
pub fn polydisk_auto_apply(
    permutation: &[usize],
    maps: &[MobiusParams],
    x: &NcPoint,
) -> Result<NcPoint> {
    let d = x.arity();
    if maps.len() != d || permutation.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "polydisk automorphism has {} maps and {} slots, point has d = {d}",
            maps.len(),
            permutation.len()
        )));
    }
    for (j, v) in x.vars().iter().enumerate() {
        let norm = v.operator_norm();
        if norm >= 1.0 {
            return Err(Error::DomainExit(format!(
                "|x^{}| = {norm} is not < 1",
                j + 1
            )));
        }
    }
    let mut out = vec![ComplexMatrix::zeros(x.level(), x.level()); d];
    for (j, (m, v)) in maps.iter().zip(x.vars()).enumerate() {
        out[permutation[j]] = m.apply(v)?;
    }
    NcPoint::new(out)
}

pub(crate) fn validate_permutation(permutation: &[usize]) -> Result<()> {
    let mut seen = vec![false; permutation.len()];
    for &k in permutation {
        if k >= seen.len() || std::mem::replace(&mut seen[k], true) {
            return Err(Error::InvalidParameter(format!(
                "{permutation:?} is not a permutation"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{disk_point, matrix_with_norm, trial_rng};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn trivial_cases() {
        let mut rng = trial_rng(41, 0);
        let z = matrix_with_norm(&mut rng, 3, 3, 0.7);
        assert!((&mobius_apply(0.0, c(0.0), &z).unwrap() - &z).max_abs() < 1e-15);

        let a = C64::new(0.3, -0.4);
        let fixed = ComplexMatrix::identity(3).scale(a);
        assert!(mobius_apply(1.1, a, &fixed).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn jordan_nilpotent_closed_form() {
        // (Z - I/2)(I - Z/2)^{-1} with Z = [[0, 1/2], [0, 0]]:
        // (I - Z/2)^{-1} = [[1, 1/4], [0, 1]], so the product is
        // [[-1/2, 3/8], [0, -1/2]].
        let z = ComplexMatrix::from_real_rows(&[&[0.0, 0.5], &[0.0, 0.0]]).unwrap();
        let got = mobius_apply(0.0, c(0.5), &z).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[-0.5, 0.375], &[0.0, -0.5]]).unwrap();
        assert!((&got - &expected).max_abs() < 1e-15);
    }

    #[test]
    fn inverse_round_trips_scalars() {
        let mut rng = trial_rng(42, 0);
        for _ in 0..100 {
            let m = MobiusParams::new(rng_theta(&mut rng), disk_point(&mut rng, 0.95)).unwrap();
            let z = disk_point(&mut rng, 0.99);
            let back = m.inverse().eval_scalar(m.eval_scalar(z));
            assert!((back - z).norm() < 1e-12);
        }
    }

    fn rng_theta(rng: &mut impl rand::Rng) -> f64 {
        rng.random::<f64>() * std::f64::consts::TAU
    }

    #[test]
    fn matrix_version_agrees_with_scalar_on_diagonals() {
        let m = MobiusParams::new(0.4, C64::new(0.2, 0.5)).unwrap();
        let diag = [C64::new(0.1, 0.2), c(-0.7), C64::new(0.0, 0.9)];
        let out = m.apply(&ComplexMatrix::from_diag(&diag)).unwrap();
        for (i, z) in diag.iter().enumerate() {
            assert!((out[(i, i)] - m.eval_scalar(*z)).norm() < 1e-14);
        }
    }

    #[test]
    fn polydisk_swap_and_domain_exit() {
        let x = NcPoint::from_scalars(&[c(0.1), c(0.2)]).unwrap();
        let id = MobiusParams::rotation(0.0);
        let swapped = polydisk_auto_apply(&[1, 0], &[id, id], &x).unwrap();
        assert_eq!(swapped, NcPoint::from_scalars(&[c(0.2), c(0.1)]).unwrap());
        assert_eq!(polydisk_auto_apply(&[0, 1], &[id, id], &x).unwrap(), x);

        let outside = NcPoint::from_scalars(&[c(1.0), c(0.2)]).unwrap();
        assert!(matches!(
            polydisk_auto_apply(&[0, 1], &[id, id], &outside),
            Err(Error::DomainExit(_))
        ));
    }

    #[test]
    fn permutation_validation() {
        assert!(validate_permutation(&[2, 0, 1]).is_ok());
        assert!(validate_permutation(&[0, 0]).is_err());
        assert!(validate_permutation(&[0, 2]).is_err());
        assert!(MobiusParams::new(0.0, c(1.0)).is_err());
    }
}
