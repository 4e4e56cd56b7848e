use rand::Rng;

use super::spec::{DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::matcore::{BlockShape, ComplexMatrix, NcPoint, C64};
use crate::rng::{ginibre, haar_unitary, matrix_with_norm};

const MAX_ATTEMPTS: usize = 32;

/// Draws members of a domain from Ginibre matrices rescaled so the defining
/// functional lands at `norm_fraction * u` with `u` uniform in `[0.1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampler {
    pub norm_fraction: f64,
}

impl Default for Sampler {
    fn default() -> Self {
        Self { norm_fraction: 0.8 }
    }
}

impl Sampler {
    pub fn with_fraction(norm_fraction: f64) -> Self {
        Self { norm_fraction }
    }

    fn radius<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.norm_fraction * (0.1 + 0.9 * rng.random::<f64>())
    }

    pub fn sample_member<R: Rng + ?Sized>(
        &self,
        spec: &DomainSpec,
        level: usize,
        rng: &mut R,
    ) -> Result<NcPoint> {
        if !spec.has_level(level) {
            return Err(Error::SamplerStarvation(format!(
                "level {level} is excluded by the level filter"
            )));
        }
        for _ in 0..MAX_ATTEMPTS {
            let x = self.propose(spec, level, rng)?;
            if spec.is_member(&x)? {
                return Ok(x);
            }
        }
        Err(Error::SamplerStarvation(format!(
            "no member found at level {level} after {MAX_ATTEMPTS} attempts"
        )))
    }

    fn propose<R: Rng + ?Sized>(
        &self,
        spec: &DomainSpec,
        n: usize,
        rng: &mut R,
    ) -> Result<NcPoint> {
        match &spec.kind {
            DomainKind::MatrixPolydisk { d } => NcPoint::new(
                (0..*d)
                    .map(|_| {
                        let radius = self.radius(rng);
                        matrix_with_norm(rng, n, n, radius)
                    })
                    .collect(),
            ),
            DomainKind::RpqBall { p, q } => {
                let radius = self.radius(rng);
                let packed = matrix_with_norm(rng, n * p, n * q, radius);
                NcPoint::gamma_unpack(&packed, BlockShape { p: *p, q: *q }, n)
            }
            DomainKind::SpectralDisk { .. } => {
                let radius = self.radius(rng);
                NcPoint::new(vec![matrix_with_norm(rng, n, n, radius)])
            }
            DomainKind::CommutatorDomain {} => {
                let (a, b, z) = (ginibre(rng, n, n), ginibre(rng, n, n), ginibre(rng, n, n));
                let comm = ComplexMatrix::commutator(&a, &b).operator_norm();
                // Scalars commute: every level-1 triple is a member.
                let k = if comm < 1e-12 {
                    1.0
                } else {
                    (self.radius(rng) / comm).sqrt()
                };
                let k = C64::new(k, 0.0);
                NcPoint::new(vec![a.scale(k), b.scale(k), z])
            }
        }
    }
}

/// `x = s y s^-1` with `|y| < 1` and `s = U diag(e^l) V`, `l` spread over
/// `[0, ln r]`. A spectral-disk member at budget `r` by construction, usually
/// with `|x| > 1`. Returns `(x, s)`; `s` certifies `x`.
pub fn disguised_spectral_member<R: Rng + ?Sized>(
    rng: &mut R,
    level: usize,
    r: f64,
    contraction: f64,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let y = matrix_with_norm(rng, level, level, contraction);
    let u = haar_unitary(rng, level);
    let v = haar_unitary(rng, level);
    let width = r.ln();
    let diag: Vec<C64> = (0..level)
        .map(|i| {
            let l = match i {
                0 => 0.0,
                1 => width,
                _ => width * rng.random::<f64>(),
            };
            C64::new(l.exp(), 0.0)
        })
        .collect();
    let s = &(&u * &ComplexMatrix::from_diag(&diag)) * &v;
    let (s_inv, _) = s.inverse_checked(1e-12)?;
    Ok((&(&s * &y) * &s_inv, s))
}

/// `I + eps G` for a Ginibre `G`.
pub fn near_identity<R: Rng + ?Sized>(rng: &mut R, n: usize, eps: f64) -> ComplexMatrix {
    &ComplexMatrix::identity(n) + &ginibre(rng, n, n).scale(C64::new(eps, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::spectral::verify_certificate;
    use crate::rng::trial_rng;

    #[test]
    fn samples_are_members_with_margin() {
        let specs = [
            DomainSpec::polydisk(3).unwrap(),
            DomainSpec::rpq(2, 3).unwrap(),
            DomainSpec::spectral_disk(vec![1.0, 2.0]).unwrap(),
            DomainSpec::commutator(),
        ];
        let mut rng = trial_rng(31, 0);
        for spec in &specs {
            for level in 1..=4 {
                for _ in 0..10 {
                    let x = Sampler::default()
                        .sample_member(spec, level, &mut rng)
                        .unwrap();
                    let v = spec.membership(&x).unwrap();
                    assert!(v.is_member());
                    assert!(v.margin.unwrap() > 0.19, "{spec:?} margin {:?}", v.margin);
                    if let Some(bound) = spec.level_bound(level) {
                        assert!(x.max_norm() < bound);
                    }
                }
            }
        }
    }

    #[test]
    fn filtered_levels_starve() {
        let spec = DomainSpec::rpq(2, 2)
            .unwrap()
            .restricted_to(vec![2])
            .unwrap();
        let mut rng = trial_rng(32, 0);
        assert!(matches!(
            Sampler::default().sample_member(&spec, 3, &mut rng),
            Err(Error::SamplerStarvation(_))
        ));
        assert!(Sampler::default().sample_member(&spec, 4, &mut rng).is_ok());
    }

    #[test]
    fn commutator_domain_is_unbounded() {
        let spec = DomainSpec::commutator();
        for c in [10.0, 1e3, 1e6] {
            let x =
                NcPoint::new(vec![ComplexMatrix::identity(3).scale(C64::new(c, 0.0)); 3]).unwrap();
            assert!(spec.is_member(&x).unwrap());
            assert!(x.max_norm() >= c);
        }
    }

    #[test]
    fn disguised_members_have_known_certificates() {
        let mut rng = trial_rng(33, 0);
        for level in 1..=4 {
            let (x, s) = disguised_spectral_member(&mut rng, level, 3.0, 0.7).unwrap();
            assert!(verify_certificate(&x, &s, 3.0 + 1e-9));
        }
    }
}
