use std::f64::consts::{FRAC_PI_3, TAU};

use ncauto_core::domains::DomainSpec;
use ncauto_core::maps::{MobiusParams, NcMapExpr};
use ncauto_core::rng::{disk_point, haar_unitary, matrix_with_norm, trial_rng};
use ncauto_core::verify::{RigidityConfig, RigidityExpectation, DEFAULT_SEED};
use ncauto_core::{ComplexMatrix, NcPoint, C64};
use rand::Rng;

use crate::config::{Check, CheckDescriptor, SuiteConfig};

/// Seed for the fixed parameters (Möbius centers, unitaries, `A`) baked
/// into the built-in suite. Independent of the run seed.
const CATALOG_SEED: u64 = 0xCA7A_1060;

struct Catalog {
    mobius3: NcMapExpr,
    morita23: NcMapExpr,
    ha11: NcMapExpr,
    ha22: NcMapExpr,
    ha23: NcMapExpr,
    ha32: NcMapExpr,
    counterexample: NcMapExpr,
}

fn ha(rng: &mut impl Rng, p: usize, q: usize, norm: f64) -> NcMapExpr {
    NcMapExpr::ha(matrix_with_norm(rng, p, q, norm)).expect("norm below 1")
}

impl Catalog {
    fn new() -> Self {
        let mut rng = trial_rng(CATALOG_SEED, 0);
        let maps = (0..3)
            .map(|_| {
                MobiusParams::new(rng.random::<f64>() * TAU, disk_point(&mut rng, 0.7))
                    .expect("|a| < 1")
            })
            .collect();
        let mobius3 = NcMapExpr::mobius_tuple(maps, vec![2, 0, 1]).expect("valid tuple");
        let morita23 =
            NcMapExpr::linear_isometry(haar_unitary(&mut rng, 2), haar_unitary(&mut rng, 3))
                .expect("unitary");
        Self {
            mobius3,
            morita23,
            ha11: ha(&mut rng, 1, 1, 0.8),
            ha22: ha(&mut rng, 2, 2, 0.6),
            ha23: ha(&mut rng, 2, 3, 0.7),
            ha32: ha(&mut rng, 3, 2, 0.5),
            counterexample: NcMapExpr::counterexample(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
                .expect("h = id"),
        }
    }
}

fn compose(maps: Vec<NcMapExpr>) -> NcMapExpr {
    NcMapExpr::compose(maps).expect("arities agree")
}

fn with_inverse(map: &NcMapExpr) -> NcMapExpr {
    compose(vec![
        map.invert().expect("closed-form inverse"),
        map.clone(),
    ])
}

fn polydisk(d: usize) -> DomainSpec {
    DomainSpec::polydisk(d).expect("d >= 1")
}

fn rpq(p: usize, q: usize) -> DomainSpec {
    DomainSpec::rpq(p, q).expect("p, q >= 1")
}

/// `x = 0.9 E_12`, `y = 0.9 E_21`, `z = 0`: the commutator shift moves `z`
/// by `0.81 (E_11 - E_22)`.
pub fn counterexample_witness() -> NcPoint {
    let unit = |i, j| ComplexMatrix::unit(2, 2, i, j).scale(C64::new(0.9, 0.0));
    NcPoint::new(vec![unit(0, 1), unit(1, 0), ComplexMatrix::zeros(2, 2)])
        .expect("square 2x2 variables")
}

/// The reference suite: every identity, example and counterexample the
/// library implements, at desk scale.
pub fn builtin_paper_suite() -> SuiteConfig {
    let cat = Catalog::new();
    let mut suite = Vec::new();
    let mut add = |check: Check| suite.push(CheckDescriptor::new(check));

    for p in 1..=3 {
        for q in 1..=3 {
            add(Check::KernelIdentity {
                a: None,
                p,
                q,
                levels: vec![1, 2, 4],
            });
        }
    }

    for (map, domain) in [
        (&cat.ha11, rpq(1, 1)),
        (&cat.ha22, rpq(2, 2)),
        (&cat.ha23, rpq(2, 3)),
        (&cat.ha32, rpq(3, 2)),
        (&cat.mobius3, polydisk(3)),
        (&cat.morita23, rpq(2, 3)),
    ] {
        add(Check::InverseLaw {
            map: map.clone(),
            domain,
            levels: vec![1, 2, 3],
        });
    }

    for (map, domain) in [
        (&cat.mobius3, polydisk(3)),
        (&cat.morita23, rpq(2, 3)),
        (&cat.ha22, rpq(2, 2)),
        (&cat.ha23, rpq(2, 3)),
        (&cat.counterexample, DomainSpec::commutator()),
    ] {
        add(Check::NcAxioms {
            map: map.clone(),
            domain,
            levels: vec![1, 2, 3, 4],
        });
    }

    for domain in [
        polydisk(3),
        rpq(2, 3),
        DomainSpec::spectral_disk(vec![1.0, 2.0, 3.0]).expect("radii"),
        DomainSpec::commutator(),
    ] {
        add(Check::NcClosure {
            domain,
            levels: vec![1, 2, 3],
        });
    }

    for (p, level) in [(1, 3), (3, 1), (2, 2), (3, 3), (2, 3)] {
        add(Check::CbTranspose { p, level });
    }

    add(Check::VonNeumann {
        mobius: MobiusParams::new(0.4, C64::new(0.7, 0.0)).expect("|a| < 1"),
        level: 4,
    });
    add(Check::VonNeumann {
        mobius: MobiusParams::rotation(2.0),
        level: 4,
    });
    for (map, domain) in [
        (&cat.mobius3, polydisk(3)),
        (&cat.ha22, rpq(2, 2)),
        (&cat.ha23, rpq(2, 3)),
    ] {
        add(Check::RangePreservation {
            map: map.clone(),
            domain,
            levels: vec![1, 2, 3, 4],
        });
    }

    let full_turn = NcMapExpr::mobius_tuple(vec![MobiusParams::rotation(TAU); 2], vec![0, 1])
        .expect("rotations");
    let morita_ha = compose(vec![cat.morita23.clone(), cat.ha23.clone()]);
    for (map, domain) in [
        (NcMapExpr::Identity { d: 2 }, polydisk(2)),
        (full_turn, polydisk(2)),
        (with_inverse(&cat.mobius3), polydisk(3)),
        (with_inverse(&cat.ha22), rpq(2, 2)),
        (with_inverse(&morita_ha), rpq(2, 3)),
    ] {
        add(Check::Rigidity {
            map,
            domain,
            config: RigidityConfig::default(),
            expectation: RigidityExpectation::Identity,
        });
    }
    let third_turn = NcMapExpr::mobius_tuple(vec![MobiusParams::rotation(FRAC_PI_3)], vec![0])
        .expect("rotation");
    for (map, domain) in [(third_turn, polydisk(1)), (cat.ha22.clone(), rpq(2, 2))] {
        add(Check::Rigidity {
            map,
            domain,
            config: RigidityConfig::default(),
            expectation: RigidityExpectation::HypothesisFails,
        });
    }
    add(Check::Rigidity {
        map: cat.counterexample.clone(),
        domain: DomainSpec::commutator(),
        config: RigidityConfig {
            base_level: 1,
            probe_levels: vec![1, 2],
            extra_points: vec![counterexample_witness()],
        },
        expectation: RigidityExpectation::Counterexample {
            witness_deviation: 0.81,
        },
    });

    let swap_rotate = NcMapExpr::mobius_tuple(
        vec![MobiusParams::rotation(0.7), MobiusParams::rotation(-1.2)],
        vec![1, 0],
    )
    .expect("rotations");
    for (map, domain) in [(&cat.morita23, rpq(2, 3)), (&swap_rotate, polydisk(2))] {
        add(Check::LinearStructure {
            map: map.clone(),
            domain,
            base_level: 1,
            probe_levels: vec![1, 2, 3],
        });
    }

    add(Check::DerivativeClosedForm {
        a: None,
        p: 2,
        q: 3,
        levels: vec![1, 2],
    });
    add(Check::DerivativeClosedForm {
        a: None,
        p: 1,
        q: 1,
        levels: vec![1, 3],
    });

    for (map, domain, level) in [
        (&cat.morita23, rpq(2, 3), 2),
        (&swap_rotate, polydisk(2), 3),
    ] {
        add(Check::DerivativeSimilarityInvariance {
            map: map.clone(),
            domain,
            level,
        });
    }

    add(Check::SpectralDisk {
        domain: DomainSpec::spectral_disk(vec![1.0, 2.0, 3.0, 4.0]).expect("radii"),
        levels: vec![1, 2, 3, 4],
    });
    add(Check::LevelRestriction {
        p: 2,
        q: 2,
        generators: vec![2, 3],
        levels: vec![1, 2, 3, 4, 5],
    });

    // The block transpose is not an nc map; the axiom check must catch it.
    suite.push(
        CheckDescriptor::new(Check::NcAxioms {
            map: NcMapExpr::TransposeAmplification { p: 2 },
            domain: polydisk(1).restricted_to(vec![2]).expect("generator 2"),
            levels: vec![2, 4],
        })
        .expecting_violation(),
    );

    for d in suite.iter_mut() {
        if let Check::KernelIdentity { levels, .. } = &d.check {
            d.trials = Some(100 * levels.len());
        }
    }

    SuiteConfig {
        suite,
        seed: DEFAULT_SEED,
        ..SuiteConfig::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_large_and_round_trips() {
        let suite = builtin_paper_suite();
        assert!(suite.suite.len() >= 12);
        let text = serde_json::to_string(&suite).unwrap();
        assert_eq!(crate::config::parse_config(&text).unwrap(), suite);
    }

    #[test]
    fn suite_is_deterministic() {
        assert_eq!(builtin_paper_suite(), builtin_paper_suite());
    }
}
