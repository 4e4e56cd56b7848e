//! One-sided membership search for the spectral disk
//! `{ x : exists s, |s| |s^-1| <= r and |s^-1 x s| < 1 }`.
//!
//! Only `|s^-1 x s|` matters and it is invariant under `s -> s w` for unitary
//! `w`, so the search runs over `s = U diag(e^l)` with `U` unitary and
//! `max l - min l <= ln r`.

use super::membership::{Certificate, Membership, MembershipVerdict};
use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, C64};

/// Relative slack kept inside the condition budget so certificates re-verify.
const BUDGET_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSearch {
    pub max_iterations: usize,
    /// Descent stops once `|s^-1 x s| < 1 - target_margin`.
    pub target_margin: f64,
}

impl Default for SpectralSearch {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            target_margin: 1e-6,
        }
    }
}

/// `(|s| |s^-1|, |s^-1 x s|)` recomputed from scratch.
pub fn certificate_values(x: &ComplexMatrix, s: &ComplexMatrix) -> Result<(f64, f64)> {
    let (s_inv, _) = s.inverse_checked(crate::matcore::CONJUGATION_RCOND_FLOOR)?;
    let condition = s.operator_norm() * s_inv.operator_norm();
    let contracted = (&(&s_inv * x) * s).operator_norm();
    Ok((condition, contracted))
}

/// Independent re-check of a similarity certificate.
pub fn verify_certificate(x: &ComplexMatrix, s: &ComplexMatrix, r: f64) -> bool {
    matches!(certificate_values(x, s), Ok((cond, norm)) if cond <= r && norm < 1.0)
}

struct Candidate {
    u: ComplexMatrix,
    logs: Vec<f64>,
    value: f64,
}

impl Candidate {
    fn similarity(&self) -> ComplexMatrix {
        let d: Vec<C64> = self.logs.iter().map(|l| C64::new(l.exp(), 0.0)).collect();
        &self.u * &ComplexMatrix::from_diag(&d)
    }
}

fn objective(x: &ComplexMatrix, u: &ComplexMatrix, logs: &[f64]) -> f64 {
    let y = &(&u.adjoint() * x) * u;
    let scaled = ComplexMatrix::from_fn(y.rows(), y.cols(), |i, j| {
        y[(i, j)] * (logs[j] - logs[i]).exp()
    });
    scaled.operator_norm()
}

/// Keep `logs[i]` within `width` of every other coordinate.
fn clamp_coordinate(logs: &[f64], i: usize, value: f64, width: f64) -> f64 {
    let (lo, hi) = logs
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .fold((f64::NEG_INFINITY, f64::INFINITY), |(lo, hi), (_, &l)| {
            (lo.max(l - width), hi.min(l + width))
        });
    value.clamp(lo, hi)
}

/// Right-multiply by a plane rotation acting on columns `i`, `j`.
fn rotate(u: &ComplexMatrix, i: usize, j: usize, angle: f64, imaginary: bool) -> ComplexMatrix {
    let (s, c) = angle.sin_cos();
    let (cs, sn) = (
        C64::new(c, 0.0),
        if imaginary {
            C64::new(0.0, s)
        } else {
            C64::new(s, 0.0)
        },
    );
    let mut out = u.clone();
    for row in 0..u.rows() {
        let (a, b) = (u[(row, i)], u[(row, j)]);
        out[(row, i)] = cs * a + sn * b;
        out[(row, j)] = if imaginary {
            sn * a + cs * b
        } else {
            -sn * a + cs * b
        };
    }
    out
}

impl SpectralSearch {
    pub fn search(&self, x: &ComplexMatrix, r: f64) -> Result<MembershipVerdict> {
        if !x.is_square() {
            return Err(Error::DimensionMismatch(
                "spectral disk points are square matrices".into(),
            ));
        }
        if !(r >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "condition budget must be >= 1, got {r}"
            )));
        }
        let rho = x.spectral_radius()?;
        if rho >= 1.0 {
            return Ok(MembershipVerdict {
                member: Membership::No,
                certificate: Some(Certificate::SpectralRadius { value: rho }),
                margin: Some(1.0 - rho),
            });
        }
        let n = x.rows();
        let identity = ComplexMatrix::identity(n);
        let norm = x.operator_norm();
        if norm < 1.0 {
            return Ok(Self::accept(identity, 1.0, norm));
        }

        let width = r.ln() * (1.0 - BUDGET_SLACK);
        let mut best = Candidate {
            u: identity.clone(),
            logs: vec![0.0; n],
            value: norm,
        };
        if let Some(eig) = self.eigenbasis_candidate(x, width) {
            if eig.value < best.value {
                best = eig;
            }
        }
        if best.value >= 1.0 - self.target_margin {
            best = self.descend(x, best, width);
        }

        let s = best.similarity();
        match certificate_values(x, &s) {
            Ok((condition, contracted)) if condition <= r && contracted < 1.0 => {
                Ok(Self::accept(s, condition, contracted))
            }
            _ => Ok(MembershipVerdict {
                member: Membership::Undetermined,
                certificate: None,
                margin: Some(1.0 - best.value),
            }),
        }
    }

    fn accept(s: ComplexMatrix, condition: f64, contracted_norm: f64) -> MembershipVerdict {
        MembershipVerdict {
            member: Membership::Yes,
            certificate: Some(Certificate::Similarity {
                s,
                condition,
                contracted_norm,
            }),
            margin: Some(1.0 - contracted_norm),
        }
    }

    /// Unit-column eigenvector matrix `V = W S Z^*`, reduced to `W diag(S)`
    /// with the singular values clamped into the condition budget.
    fn eigenbasis_candidate(&self, x: &ComplexMatrix, width: f64) -> Option<Candidate> {
        let (_, v) = x.eigenvectors().ok()?;
        if !v.is_finite() {
            return None;
        }
        let svd = v.to_na().svd(true, false);
        let w = ComplexMatrix::from_na(svd.u.as_ref()?);
        let smax = svd.singular_values.max();
        if !(smax > 0.0) {
            return None;
        }
        let top = smax.ln();
        let logs: Vec<f64> = svd
            .singular_values
            .iter()
            .map(|&s| {
                if s > 0.0 {
                    s.ln().max(top - width)
                } else {
                    top - width
                }
            })
            .collect();
        let value = objective(x, &w, &logs);
        Some(Candidate { u: w, logs, value })
    }

    /// Coordinate descent over log-scalings and plane rotations, halving the
    /// step whenever a full sweep makes no progress.
    fn descend(&self, x: &ComplexMatrix, start: Candidate, width: f64) -> Candidate {
        let n = x.rows();
        let Candidate {
            mut u,
            mut logs,
            mut value,
        } = start;
        let mut log_step = 0.5_f64.min(width.max(1e-3));
        let mut angle_step = 0.3_f64;
        let goal = 1.0 - self.target_margin;
        for _ in 0..self.max_iterations {
            if value < goal || (log_step < 1e-12 && angle_step < 1e-12) {
                break;
            }
            let mut improved = false;
            for i in 0..n {
                for dir in [1.0, -1.0] {
                    let trial = clamp_coordinate(&logs, i, logs[i] + dir * log_step, width);
                    if trial == logs[i] {
                        continue;
                    }
                    let mut cand = logs.clone();
                    cand[i] = trial;
                    let v = objective(x, &u, &cand);
                    if v < value {
                        (logs, value, improved) = (cand, v, true);
                        break;
                    }
                }
            }
            for i in 0..n {
                for j in i + 1..n {
                    for imaginary in [false, true] {
                        for dir in [1.0, -1.0] {
                            let cand = rotate(&u, i, j, dir * angle_step, imaginary);
                            let v = objective(x, &cand, &logs);
                            if v < value {
                                (u, value, improved) = (cand, v, true);
                                break;
                            }
                        }
                    }
                }
            }
            if !improved {
                log_step *= 0.5;
                angle_step *= 0.5;
            }
        }
        Candidate { u, logs, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{haar_unitary, trial_rng};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// min over 1/lambda <= r of |diag(1, lambda)^-1 x diag(1, lambda)| for
    /// x = [[0, t], [0, 0]], by dense scan of lambda.
    fn diagonal_scaling_oracle(t: f64, r: f64) -> f64 {
        (0..=100_000)
            .map(|k| {
                let lambda = 1.0 / r + (1.0 - 1.0 / r) * k as f64 / 100_000.0;
                let s = ComplexMatrix::from_diag(&[c(1.0), c(lambda)]);
                let x = ComplexMatrix::from_real_rows(&[&[0.0, t], &[0.0, 0.0]]).unwrap();
                let (s_inv, _) = s.inverse_checked(1e-12).unwrap();
                (&(&s_inv * &x) * &s).operator_norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn contraction_needs_no_similarity() {
        let x = ComplexMatrix::from_diag(&[c(0.3), c(0.9)]);
        for r in [1.0, 2.0, 10.0] {
            let v = SpectralSearch::default().search(&x, r).unwrap();
            assert_eq!(v.member, Membership::Yes);
            match v.certificate.unwrap() {
                Certificate::Similarity { s, .. } => assert_eq!(s, ComplexMatrix::identity(2)),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn nilpotent_certificate_matches_scaling_oracle() {
        let oracle = diagonal_scaling_oracle(1.5, 2.0);
        assert!((oracle - 0.75).abs() < 1e-12);
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.5], &[0.0, 0.0]]).unwrap();
        let v = SpectralSearch::default().search(&x, 2.0).unwrap();
        assert_eq!(v.member, Membership::Yes);
        let Some(Certificate::Similarity {
            s,
            condition,
            contracted_norm,
        }) = v.certificate
        else {
            panic!("expected similarity certificate");
        };
        assert!(verify_certificate(&x, &s, 2.0));
        assert!(condition <= 2.0);
        // |s^-1 x s| >= 1.5 / cond(s) for this rank-one nilpotent.
        assert!(contracted_norm >= oracle - 1e-9 && contracted_norm < 1.0);
    }

    #[test]
    fn nilpotent_out_of_budget_is_undetermined() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 3.0], &[0.0, 0.0]]).unwrap();
        let v = SpectralSearch::default().search(&x, 2.0).unwrap();
        assert_eq!(v.member, Membership::Undetermined);
        assert!(v.margin.unwrap() < 0.0);
    }

    #[test]
    fn jordan_block_with_unit_eigenvalue_is_rejected() {
        let j = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert_eq!(
            SpectralSearch::default().search(&j, 5.0).unwrap().member,
            Membership::No
        );
    }

    #[test]
    fn diagonalizable_non_normal_found_through_eigenbasis() {
        let mut rng = trial_rng(21, 0);
        let u = haar_unitary(&mut rng, 3);
        let s = &ComplexMatrix::from_diag(&[c(1.0), c(1.6), c(2.5)]) * &u;
        let y = ComplexMatrix::from_diag(&[c(0.9), C64::new(0.0, -0.8), c(0.5)]);
        let (s_inv, _) = s.inverse_checked(1e-12).unwrap();
        let x = &(&s * &y) * &s_inv;
        assert!(x.operator_norm() > 1.0);
        let v = SpectralSearch::default().search(&x, 3.0).unwrap();
        assert_eq!(v.member, Membership::Yes);
        let Some(Certificate::Similarity { s, .. }) = v.certificate else {
            panic!()
        };
        assert!(verify_certificate(&x, &s, 3.0));
    }

    #[test]
    fn unitary_conjugation_carries_certificates() {
        let x = ComplexMatrix::from_real_rows(&[&[0.2, 1.4], &[0.0, -0.3]]).unwrap();
        let v = SpectralSearch::default().search(&x, 2.5).unwrap();
        let Some(Certificate::Similarity { s, .. }) = v.certificate else {
            panic!("{v:?}")
        };
        let mut rng = trial_rng(22, 0);
        for _ in 0..10 {
            let w = haar_unitary(&mut rng, 2);
            let wx = &(&w.adjoint() * &x) * &w;
            let ws = &(&w.adjoint() * &s) * &w;
            assert!(verify_certificate(&wx, &ws, 2.5));
        }
    }

    #[test]
    fn rejects_budget_below_one() {
        assert!(SpectralSearch::default()
            .search(&ComplexMatrix::identity(2), 0.5)
            .is_err());
    }
}
