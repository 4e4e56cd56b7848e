use serde::{Deserialize, Serialize};

use super::counterexample::{counterexample_apply, validate_polynomial};
use super::mobius::{polydisk_auto_apply, validate_permutation, MobiusParams};
use super::rectangular::{ha_apply, linear_isometry_apply, transpose_amplify, UNITARY_TOL};
use crate::error::{Error, Result};
use crate::matcore::{BlockShape, ComplexMatrix, NcPoint, C64};

/// Closed description of an nc map, evaluable at any level.
///
/// JSON form: `{"variant": "<snake_case name>", "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "params", rename_all = "snake_case")]
pub enum NcMapExpr {
    /// Polydisk automorphism: `m^j` acts on slot `j`, the result lands in
    /// slot `permutation[j]`.
    MobiusTuple {
        maps: Vec<MobiusParams>,
        permutation: Vec<usize>,
    },
    /// `x -> U x V` on `R_pq`, with `U` `p x p` and `V` `q x q` unitary.
    LinearIsometry {
        u: ComplexMatrix,
        v: ComplexMatrix,
    },
    /// Block transpose of a single variable viewed in `M_p(M_{n/p})`. Not an
    /// nc map; kept to exhibit that failure.
    TransposeAmplification {
        p: usize,
    },
    /// `H_A` on `R_pq` for a `p x q` strict contraction `A`.
    Ha {
        a: ComplexMatrix,
    },
    /// `(x, y, z) -> (x, y, z + h(xy - yx))`, `h` given by its coefficients.
    CounterexampleMap {
        h: Vec<C64>,
    },
    /// `maps[0] ∘ maps[1] ∘ ... ∘ maps[k - 1]`, applied right to left.
    Compose {
        maps: Vec<NcMapExpr>,
    },
    Identity {
        d: usize,
    },
}

impl NcMapExpr {
    pub fn mobius_tuple(maps: Vec<MobiusParams>, permutation: Vec<usize>) -> Result<Self> {
        let e = NcMapExpr::MobiusTuple { maps, permutation };
        e.validate()?;
        Ok(e)
    }

    pub fn linear_isometry(u: ComplexMatrix, v: ComplexMatrix) -> Result<Self> {
        let e = NcMapExpr::LinearIsometry { u, v };
        e.validate()?;
        Ok(e)
    }

    pub fn ha(a: ComplexMatrix) -> Result<Self> {
        let e = NcMapExpr::Ha { a };
        e.validate()?;
        Ok(e)
    }

    pub fn counterexample(h: Vec<C64>) -> Result<Self> {
        let e = NcMapExpr::CounterexampleMap { h };
        e.validate()?;
        Ok(e)
    }

    pub fn compose(maps: Vec<NcMapExpr>) -> Result<Self> {
        let e = NcMapExpr::Compose { maps };
        e.validate()?;
        Ok(e)
    }

    /// Number of variables the map consumes (and produces).
    pub fn arity(&self) -> usize {
        match self {
            NcMapExpr::MobiusTuple { maps, .. } => maps.len(),
            NcMapExpr::LinearIsometry { u, v } => u.rows() * v.rows(),
            NcMapExpr::TransposeAmplification { .. } => 1,
            NcMapExpr::Ha { a } => a.rows() * a.cols(),
            NcMapExpr::CounterexampleMap { .. } => 3,
            NcMapExpr::Compose { maps } => maps.last().map_or(0, NcMapExpr::arity),
            NcMapExpr::Identity { d } => *d,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NcMapExpr::MobiusTuple { .. } => "mobius_tuple",
            NcMapExpr::LinearIsometry { .. } => "linear_isometry",
            NcMapExpr::TransposeAmplification { .. } => "transpose_amplification",
            NcMapExpr::Ha { .. } => "ha",
            NcMapExpr::CounterexampleMap { .. } => "counterexample_map",
            NcMapExpr::Compose { .. } => "compose",
            NcMapExpr::Identity { .. } => "identity",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NcMapExpr::MobiusTuple { maps, permutation } => {
                if maps.is_empty() || maps.len() != permutation.len() {
                    return Err(Error::InvalidParameter(
                        "Möbius tuple needs one map per slot and a permutation of the same length"
                            .into(),
                    ));
                }
                maps.iter().try_for_each(MobiusParams::validate)?;
                validate_permutation(permutation)
            }
            NcMapExpr::LinearIsometry { u, v } => {
                if !u.is_square() || !v.is_square() {
                    return Err(Error::InvalidParameter(
                        "Morita factors must be square".into(),
                    ));
                }
                u.ensure_unitary(UNITARY_TOL)?;
                v.ensure_unitary(UNITARY_TOL)
            }
            NcMapExpr::TransposeAmplification { p } if *p == 0 => Err(Error::InvalidParameter(
                "transpose block size must be positive".into(),
            )),
            NcMapExpr::TransposeAmplification { .. } => Ok(()),
            NcMapExpr::Ha { a } => {
                let norm = a.operator_norm();
                if norm < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "H_A needs |A| < 1, got {norm}"
                    )))
                }
            }
            NcMapExpr::CounterexampleMap { h } => validate_polynomial(h),
            NcMapExpr::Compose { maps } => {
                let first = maps
                    .first()
                    .ok_or_else(|| Error::InvalidParameter("composition of zero maps".into()))?
                    .arity();
                for m in maps {
                    m.validate()?;
                    if m.arity() != first {
                        return Err(Error::DimensionMismatch(format!(
                            "composed maps have arities {first} and {}",
                            m.arity()
                        )));
                    }
                }
                Ok(())
            }
            NcMapExpr::Identity { d } if *d == 0 => {
                Err(Error::InvalidParameter("identity needs d >= 1".into()))
            }
            NcMapExpr::Identity { .. } => Ok(()),
        }
    }

    /// Evaluate at `x`. Variants with a natural domain (Möbius tuples on the
    /// polydisk, `H_A` on `R_pq`) report [`Error::DomainExit`] outside it.
    pub fn apply(&self, x: &NcPoint) -> Result<NcPoint> {
        if x.arity() != self.arity() {
            return Err(Error::DimensionMismatch(format!(
                "{} expects d = {}, point has d = {}",
                self.name(),
                self.arity(),
                x.arity()
            )));
        }
        match self {
            NcMapExpr::MobiusTuple { maps, permutation } => {
                polydisk_auto_apply(permutation, maps, x)
            }
            NcMapExpr::LinearIsometry { u, v } => {
                linear_isometry_apply(u, v, BlockShape::new(u.rows(), v.rows())?, x)
            }
            NcMapExpr::TransposeAmplification { p } => {
                NcPoint::new(vec![transpose_amplify(*p, x.var(0))?])
            }
            NcMapExpr::Ha { a } => {
                let shape = BlockShape::new(a.rows(), a.cols())?;
                let packed = x.gamma_pack(shape)?;
                let norm = packed.operator_norm();
                if norm >= 1.0 {
                    return Err(Error::DomainExit(format!("|gamma(x)| = {norm} is not < 1")));
                }
                NcPoint::gamma_unpack(&ha_apply(a, &packed)?, shape, x.level())
            }
            NcMapExpr::CounterexampleMap { h } => counterexample_apply(h, x),
            NcMapExpr::Compose { maps } => maps
                .iter()
                .rev()
                .try_fold(x.clone(), |acc, m| m.apply(&acc)),
            NcMapExpr::Identity { .. } => Ok(x.clone()),
        }
    }

    /// Closed-form inverse.
    pub fn invert(&self) -> Result<Self> {
        self.validate()?;
        Ok(match self {
            NcMapExpr::MobiusTuple { maps, permutation } => {
                let d = maps.len();
                let mut inv_maps = vec![MobiusParams::rotation(0.0); d];
                let mut inv_perm = vec![0; d];
                for (j, m) in maps.iter().enumerate() {
                    inv_maps[permutation[j]] = m.inverse();
                    inv_perm[permutation[j]] = j;
                }
                NcMapExpr::MobiusTuple {
                    maps: inv_maps,
                    permutation: inv_perm,
                }
            }
            NcMapExpr::LinearIsometry { u, v } => NcMapExpr::LinearIsometry {
                u: u.adjoint(),
                v: v.adjoint(),
            },
            NcMapExpr::TransposeAmplification { p } => NcMapExpr::TransposeAmplification { p: *p },
            NcMapExpr::Ha { a } => NcMapExpr::Ha {
                a: a.scale(C64::new(-1.0, 0.0)),
            },
            // The first two slots are untouched, so subtracting h undoes the shift.
            NcMapExpr::CounterexampleMap { h } => NcMapExpr::CounterexampleMap {
                h: h.iter().map(|c| -c).collect(),
            },
            NcMapExpr::Compose { maps } => NcMapExpr::Compose {
                maps: maps
                    .iter()
                    .rev()
                    .map(NcMapExpr::invert)
                    .collect::<Result<_>>()?,
            },
            NcMapExpr::Identity { d } => NcMapExpr::Identity { d: *d },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{DomainSpec, Sampler};
    use crate::matcore::relative_residual;
    use crate::rng::{disk_point, haar_unitary, matrix_with_norm, trial_rng};
    use rand::Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn catalog(rng: &mut impl Rng) -> Vec<(NcMapExpr, DomainSpec)> {
        let maps: Vec<MobiusParams> = (0..3)
            .map(|_| MobiusParams::new(rng.random::<f64>() * 6.0, disk_point(rng, 0.8)).unwrap())
            .collect();
        vec![
            (
                NcMapExpr::mobius_tuple(maps, vec![2, 0, 1]).unwrap(),
                DomainSpec::polydisk(3).unwrap(),
            ),
            (
                NcMapExpr::linear_isometry(haar_unitary(rng, 2), haar_unitary(rng, 3)).unwrap(),
                DomainSpec::rpq(2, 3).unwrap(),
            ),
            (
                NcMapExpr::ha(matrix_with_norm(rng, 2, 2, 0.7)).unwrap(),
                DomainSpec::rpq(2, 2).unwrap(),
            ),
            (
                NcMapExpr::counterexample(vec![c(0.0), c(1.0), c(0.3)]).unwrap(),
                DomainSpec::commutator(),
            ),
            (
                NcMapExpr::Identity { d: 2 },
                DomainSpec::polydisk(2).unwrap(),
            ),
        ]
    }

    #[test]
    fn inverses_compose_to_identity() {
        let mut rng = trial_rng(61, 0);
        for (expr, spec) in catalog(&mut rng) {
            let round_trip =
                NcMapExpr::compose(vec![expr.invert().unwrap(), expr.clone()]).unwrap();
            for level in 1..=3 {
                let x = Sampler::default()
                    .sample_member(&spec, level, &mut rng)
                    .unwrap();
                let y = round_trip.apply(&x).unwrap();
                assert_eq!(y.level(), level);
                assert!(
                    relative_residual(&y, &x) <= 1e-9,
                    "{}: {}",
                    expr.name(),
                    relative_residual(&y, &x)
                );
            }
        }
    }

    #[test]
    fn compose_applies_right_to_left() {
        let shift = NcMapExpr::counterexample(vec![c(0.0), c(1.0)]).unwrap();
        let swap_xy =
            NcMapExpr::mobius_tuple(vec![MobiusParams::rotation(0.0); 3], vec![1, 0, 2]).unwrap();
        let x = NcPoint::new(vec![
            ComplexMatrix::unit(2, 2, 0, 1).scale(c(0.5)),
            ComplexMatrix::unit(2, 2, 1, 0).scale(c(0.5)),
            ComplexMatrix::zeros(2, 2),
        ])
        .unwrap();
        let shift_then_swap = NcMapExpr::compose(vec![swap_xy.clone(), shift.clone()])
            .unwrap()
            .apply(&x)
            .unwrap();
        let swap_then_shift = NcMapExpr::compose(vec![shift, swap_xy])
            .unwrap()
            .apply(&x)
            .unwrap();
        // [x, y] and [y, x] differ in sign.
        assert!((shift_then_swap.var(2) + swap_then_shift.var(2)).max_abs() < 1e-15);
        assert!(shift_then_swap.var(2).max_abs() > 0.2);
    }

    #[test]
    fn invert_identity_and_mobius_formula() {
        assert_eq!(
            NcMapExpr::Identity { d: 4 }.invert().unwrap(),
            NcMapExpr::Identity { d: 4 }
        );
        let m = MobiusParams::new(0.7, C64::new(0.2, -0.3)).unwrap();
        let inv = m.inverse();
        assert_eq!(inv.theta, -0.7);
        assert!((inv.a + C64::from_polar(1.0, 0.7) * m.a).norm() < 1e-16);
    }

    #[test]
    fn validation_and_arity_errors() {
        assert!(NcMapExpr::ha(ComplexMatrix::identity(2)).is_err());
        assert!(NcMapExpr::linear_isometry(
            ComplexMatrix::identity(2).scale(c(1.1)),
            ComplexMatrix::identity(1)
        )
        .is_err());
        assert!(NcMapExpr::compose(vec![]).is_err());
        assert!(NcMapExpr::compose(vec![
            NcMapExpr::Identity { d: 2 },
            NcMapExpr::Identity { d: 3 }
        ])
        .is_err());
        assert!(NcMapExpr::counterexample(vec![c(1.0), c(1.0)]).is_err());
        assert!(matches!(
            NcMapExpr::Identity { d: 2 }.apply(&NcPoint::zeros(1, 3)),
            Err(Error::DimensionMismatch(_))
        ));
        let ha = NcMapExpr::ha(ComplexMatrix::scalar(c(0.5))).unwrap();
        assert!(matches!(
            ha.apply(&NcPoint::from_scalars(&[c(1.0)]).unwrap()),
            Err(Error::DomainExit(_))
        ));
    }

    #[test]
    fn json_shape() {
        let e = NcMapExpr::compose(vec![
            NcMapExpr::ha(ComplexMatrix::scalar(C64::new(0.5, 0.25))).unwrap(),
            NcMapExpr::Identity { d: 1 },
        ])
        .unwrap();
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(v["variant"], "compose");
        assert_eq!(v["params"]["maps"][0]["variant"], "ha");
        assert_eq!(
            v["params"]["maps"][0]["params"]["a"],
            serde_json::json!([[[0.5, 0.25]]])
        );
        let back: NcMapExpr = serde_json::from_value(v).unwrap();
        assert_eq!(back, e);
    }
}
