use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::linear::{origin_residual, ORIGIN_TOL};
use super::{CheckOptions, CheckReport, ReportBuilder, TrialOutcome, DERIVATIVE_TOL};
use crate::domains::{DomainSpec, Sampler};
use crate::error::{Error, Result};
use crate::maps::NcMapExpr;
use crate::matcore::{directional_derivative, ComplexMatrix, DiffScheme, NcPoint, C64};
use crate::par::map_indexed;
use crate::rng::trial_rng;

const IDENTITY_TOL: f64 = 1e-8;
const WITNESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityConfig {
    #[serde(default = "default_base_level")]
    pub base_level: usize,
    #[serde(default = "default_probe_levels")]
    pub probe_levels: Vec<usize>,
    /// Fixed points probed in addition to the random members.
    #[serde(default)]
    pub extra_points: Vec<NcPoint>,
}

fn default_base_level() -> usize {
    1
}

fn default_probe_levels() -> Vec<usize> {
    vec![2, 3, 4]
}

impl Default for RigidityConfig {
    fn default() -> Self {
        Self {
            base_level: default_base_level(),
            probe_levels: default_probe_levels(),
            extra_points: Vec::new(),
        }
    }
}

/// Hypotheses and conclusion of the rigidity statement, measured at
/// `base_level` and at the probe levels. All residuals are operator norms,
/// maximized over variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityVerdict {
    pub base_level: usize,
    pub fixes_origin: bool,
    /// `|Phi(0)|` at the base level.
    pub origin_residual: f64,
    /// `max |DPhi(0)[H] - H|` over matrix units `H` and `iH`.
    pub derivative_residual: f64,
    /// `max |Phi(x) - x|` over sampled members at each level.
    pub identity_residual_at_levels: BTreeMap<usize, f64>,
    /// `|Phi(x) - x|` at each configured extra point.
    pub extra_point_residuals: Vec<f64>,
}

impl RigidityVerdict {
    pub fn hypotheses_hold(&self) -> bool {
        self.fixes_origin && self.derivative_residual <= DERIVATIVE_TOL
    }

    pub fn max_identity_residual(&self) -> f64 {
        self.identity_residual_at_levels
            .values()
            .chain(&self.extra_point_residuals)
            .fold(0.0, |acc, &r| acc.max(r))
    }
}

/// What a rigidity check expects of its map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "expect", rename_all = "snake_case")]
pub enum RigidityExpectation {
    /// Hypotheses hold and the map is the identity at every probed level.
    Identity,
    /// The map fails to fix 0 or its derivative there is not the identity.
    HypothesisFails,
    /// Hypotheses hold, yet every extra point moves by exactly
    /// `witness_deviation`.
    Counterexample { witness_deviation: f64 },
}

fn identity_deviation(expr: &NcMapExpr, x: &NcPoint) -> Result<f64> {
    let image = expr.apply(x)?;
    Ok(image
        .vars()
        .iter()
        .zip(x.vars())
        .map(|(a, b)| (a - b).operator_norm())
        .fold(0.0, f64::max))
}

fn derivative_residual(expr: &NcMapExpr, level: usize) -> Result<f64> {
    let d = expr.arity();
    let origin = NcPoint::zeros(level, d);
    let mut worst = 0.0_f64;
    for j in 0..d {
        for r in 0..level {
            for c in 0..level {
                for phase in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                    let h = NcPoint::single(
                        d,
                        j,
                        ComplexMatrix::unit(level, level, r, c).scale(phase),
                    )?;
                    let est = directional_derivative(
                        |x| expr.apply(x),
                        &origin,
                        &h,
                        &DiffScheme::default(),
                    )?;
                    let gap = est
                        .value
                        .vars()
                        .iter()
                        .zip(h.vars())
                        .map(|(a, b)| (a - b).operator_norm());
                    worst = gap.fold(worst, f64::max);
                }
            }
        }
    }
    Ok(worst)
}

/// Measures the rigidity hypotheses at the base level and `|Phi(x) - x|` on
/// `opts.trials` members per probe level.
pub fn rigidity_probe(
    expr: &NcMapExpr,
    spec: &DomainSpec,
    config: &RigidityConfig,
    opts: &CheckOptions,
) -> Result<RigidityVerdict> {
    expr.validate()?;
    spec.validate()?;
    if expr.arity() != spec.arity() {
        return Err(Error::DimensionMismatch(format!(
            "map has d = {}, domain has d = {}",
            expr.arity(),
            spec.arity()
        )));
    }
    let m = config.base_level;
    if m == 0 || !spec.contains_origin(m) {
        return Err(Error::OriginNotInDomain(m));
    }
    let origin_residual = origin_residual(expr, m)?;
    let derivative_residual = derivative_residual(expr, m)?;

    let levels: Vec<usize> = config
        .probe_levels
        .iter()
        .copied()
        .filter(|&n| n > 0 && spec.has_level(n))
        .collect();
    let per_level = opts.trials;
    let samples = map_indexed(opts.exec, levels.len() * per_level, |t| -> Result<f64> {
        let mut rng = trial_rng(opts.seed, t as u64);
        let x = Sampler::default().sample_member(spec, levels[t / per_level], &mut rng)?;
        identity_deviation(expr, &x)
    });
    let mut identity_residual_at_levels = BTreeMap::new();
    for (t, r) in samples.into_iter().enumerate() {
        let slot = identity_residual_at_levels
            .entry(levels[t / per_level])
            .or_insert(0.0_f64);
        *slot = slot.max(r?);
    }
    let extra_point_residuals = config
        .extra_points
        .iter()
        .map(|x| identity_deviation(expr, x))
        .collect::<Result<Vec<_>>>()?;

    Ok(RigidityVerdict {
        base_level: m,
        fixes_origin: origin_residual <= ORIGIN_TOL,
        origin_residual,
        derivative_residual,
        identity_residual_at_levels,
        extra_point_residuals,
    })
}

/// [`rigidity_probe`] turned into a pass/fail report against an
/// expectation.
///
/// * `Identity`: residual is the largest identity deviation, tolerance 1e-8.
/// * `HypothesisFails`: residual is `max(|Phi(0)|, |DPhi(0) - I|)`, which
///   must exceed 1e-6.
/// * `Counterexample`: residuals are the gaps between each extra point's
///   deviation and the expected value, together with the deviation at the
///   base level; tolerance 1e-12.
pub fn check_rigidity(
    expr: &NcMapExpr,
    spec: &DomainSpec,
    config: &RigidityConfig,
    expectation: RigidityExpectation,
    opts: &CheckOptions,
) -> CheckReport {
    let (tolerance, violation) = match expectation {
        RigidityExpectation::Identity => (IDENTITY_TOL, false),
        RigidityExpectation::HypothesisFails => (DERIVATIVE_TOL, true),
        RigidityExpectation::Counterexample { .. } => (WITNESS_TOL, false),
    };
    let mut builder = ReportBuilder::start("rigidity", opts, opts.tolerance_or(tolerance))
        .expect_violation(violation);
    let verdict = match rigidity_probe(expr, spec, config, opts) {
        Ok(v) => v,
        Err(e) => return builder.hard_failure(f64::INFINITY, e.to_string()),
    };
    builder.summary(json!({ "expectation": expectation, "verdict": verdict }));

    let outcomes = match expectation {
        RigidityExpectation::HypothesisFails => {
            let residual = verdict.origin_residual.max(verdict.derivative_residual);
            vec![TrialOutcome::ok(residual, json!({ "hypotheses": true }))]
        }
        _ if !verdict.hypotheses_hold() => {
            let reason = format!(
                "hypotheses fail: |Phi(0)| = {}, |DPhi(0) - I| = {}",
                verdict.origin_residual, verdict.derivative_residual
            );
            return builder.hard_failure(
                verdict.origin_residual.max(verdict.derivative_residual),
                reason,
            );
        }
        RigidityExpectation::Identity => verdict
            .identity_residual_at_levels
            .iter()
            .map(|(n, r)| TrialOutcome::ok(*r, json!({ "level": n })))
            .chain(
                verdict
                    .extra_point_residuals
                    .iter()
                    .enumerate()
                    .map(|(i, r)| TrialOutcome::ok(*r, json!({ "extra_point": i }))),
            )
            .collect(),
        RigidityExpectation::Counterexample { witness_deviation } => {
            if config.extra_points.is_empty() {
                return builder.hard_failure(
                    f64::INFINITY,
                    "counterexample expectation needs extra points".into(),
                );
            }
            let mut outcomes: Vec<TrialOutcome> = verdict
                .extra_point_residuals
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    TrialOutcome::ok(
                        (r - witness_deviation).abs(),
                        json!({ "extra_point": i, "deviation": r }),
                    )
                })
                .collect();
            if let Some(r) = verdict.identity_residual_at_levels.get(&verdict.base_level) {
                outcomes.push(TrialOutcome::ok(*r, json!({ "level": verdict.base_level })));
            }
            outcomes
        }
    };
    builder.finish(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::MobiusParams;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_map_has_zero_residuals() {
        let v = rigidity_probe(
            &NcMapExpr::Identity { d: 2 },
            &DomainSpec::polydisk(2).unwrap(),
            &RigidityConfig::default(),
            &CheckOptions::new(5, 1),
        )
        .unwrap();
        assert!(v.hypotheses_hold());
        assert_eq!(v.origin_residual, 0.0);
        assert_eq!(v.max_identity_residual(), 0.0);
        assert_eq!(
            v.identity_residual_at_levels
                .keys()
                .copied()
                .collect::<Vec<_>>(),
            [2, 3, 4]
        );
    }

    #[test]
    fn rotation_by_third_of_pi_fails_the_derivative_hypothesis() {
        let expr = NcMapExpr::mobius_tuple(
            vec![MobiusParams::rotation(std::f64::consts::FRAC_PI_3)],
            vec![0],
        )
        .unwrap();
        let spec = DomainSpec::polydisk(1).unwrap();
        let v = rigidity_probe(
            &expr,
            &spec,
            &RigidityConfig::default(),
            &CheckOptions::new(5, 2),
        )
        .unwrap();
        assert!(v.fixes_origin);
        // |e^{i pi/3} - 1| = 1.
        assert!((v.derivative_residual - 1.0).abs() < 1e-8);
        assert!(v.identity_residual_at_levels[&2] > 0.0);
        let r = check_rigidity(
            &expr,
            &spec,
            &RigidityConfig::default(),
            RigidityExpectation::HypothesisFails,
            &CheckOptions::new(5, 2),
        );
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn counterexample_witness() {
        let expr = NcMapExpr::counterexample(vec![c(0.0), c(1.0)]).unwrap();
        let witness = NcPoint::new(vec![
            ComplexMatrix::unit(2, 2, 0, 1).scale(c(0.9)),
            ComplexMatrix::unit(2, 2, 1, 0).scale(c(0.9)),
            ComplexMatrix::zeros(2, 2),
        ])
        .unwrap();
        let config = RigidityConfig {
            base_level: 1,
            probe_levels: vec![1, 2],
            extra_points: vec![witness],
        };
        let r = check_rigidity(
            &expr,
            &DomainSpec::commutator(),
            &config,
            RigidityExpectation::Counterexample {
                witness_deviation: 0.81,
            },
            &CheckOptions::new(10, 3),
        );
        assert!(r.passed, "{r:?}");
        let identity = check_rigidity(
            &expr,
            &DomainSpec::commutator(),
            &config,
            RigidityExpectation::Identity,
            &CheckOptions::new(10, 3),
        );
        assert!(!identity.passed);
    }

    #[test]
    fn origin_outside_filtered_levels() {
        let spec = DomainSpec::rpq(1, 1)
            .unwrap()
            .restricted_to(vec![2])
            .unwrap();
        let err = rigidity_probe(
            &NcMapExpr::Identity { d: 1 },
            &spec,
            &RigidityConfig::default(),
            &CheckOptions::new(1, 1),
        );
        assert_eq!(err, Err(Error::OriginNotInDomain(1)));
    }
}
