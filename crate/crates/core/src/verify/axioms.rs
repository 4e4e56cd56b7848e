use rand::Rng;
use serde_json::{json, Value};

use super::{
    admissible_levels, level_for, CheckOptions, CheckReport, ReportBuilder, TrialOutcome,
    ALGEBRAIC_TOL,
};
use crate::domains::{near_identity, DomainSpec, Sampler};
use crate::error::{Error, Result};
use crate::maps::{MobiusParams, NcMapExpr};
use crate::matcore::{relative_residual, NcPoint};
use crate::par::map_indexed;
use crate::rng::{matrix_with_norm, trial_rng};

const SIMILARITY_EPS: f64 = 0.1;
const SIMILARITY_RETRIES: usize = 50;

/// Sampler used by range checks; pushes samples close to the boundary.
const BOUNDARY_SAMPLER: Sampler = Sampler {
    norm_fraction: 0.999,
};

/// Gradedness, `f(x ⊕ y) = f(x) ⊕ f(y)` and `f(s^-1 x s) = s^-1 f(x) s` on
/// sampled members. The similarity residual is divided by `cond(s)`;
/// `s = I + 0.1 G` is redrawn until `s^-1 x s` is a member.
pub fn check_nc_axioms(
    expr: &NcMapExpr,
    spec: &DomainSpec,
    levels: &[usize],
    opts: &CheckOptions,
) -> CheckReport {
    let builder = ReportBuilder::start("nc_axioms", opts, opts.tolerance_or(ALGEBRAIC_TOL));
    let (builder, levels) = match admissible_levels(builder, spec, Some(expr), levels) {
        Ok(ok) => ok,
        Err(report) => return report,
    };
    let outcomes = map_indexed(opts.exec, opts.trials, |t| {
        let mut rng = trial_rng(opts.seed, t as u64);
        let n = level_for(&levels, t);
        let m = levels[rng.random_range(0..levels.len())];
        TrialOutcome::from_result(axiom_trial(expr, spec, n, m, &mut rng))
    });
    builder.finish(outcomes)
}

fn axiom_trial(
    expr: &NcMapExpr,
    spec: &DomainSpec,
    n: usize,
    m: usize,
    rng: &mut impl Rng,
) -> Result<(f64, Value)> {
    let sampler = Sampler::default();
    let x = sampler.sample_member(spec, n, rng)?;
    let y = sampler.sample_member(spec, m, rng)?;
    let fx = expr.apply(&x)?;
    if fx.level() != n || fx.arity() != x.arity() {
        let detail = json!({ "axiom": "graded", "x": x, "f_x_level": fx.level() });
        return Ok((f64::INFINITY, detail));
    }

    let sum = x.direct_sum(&y)?;
    let sum_residual = if spec.has_level(n + m) && spec.is_member(&sum)? {
        let fy = expr.apply(&y)?;
        Some(relative_residual(&expr.apply(&sum)?, &fx.direct_sum(&fy)?))
    } else {
        None
    };

    let mut attempt = None;
    for _ in 0..SIMILARITY_RETRIES {
        let s = near_identity(rng, n, SIMILARITY_EPS);
        let Ok((s_inv, _)) = x.similarity_inverse(&s) else {
            continue;
        };
        let moved = x.conjugate_with(&s_inv, &s);
        if spec.is_member(&moved)? {
            attempt = Some((s, s_inv, moved));
            break;
        }
    }
    let (s, s_inv, moved) = attempt.ok_or_else(|| {
        Error::SamplerStarvation(format!(
            "no admissible similarity after {SIMILARITY_RETRIES} draws at level {n}"
        ))
    })?;
    let condition = s.condition_number();
    let sim_residual =
        relative_residual(&expr.apply(&moved)?, &fx.conjugate_with(&s_inv, &s)) / condition;

    let residual = sum_residual.unwrap_or(0.0).max(sim_residual);
    let detail = json!({
        "levels": [n, m],
        "direct_sum": sum_residual,
        "similarity": sim_residual,
        "condition": condition,
        "x": x,
        "y": y,
        "s": s,
    });
    Ok((residual, detail))
}

/// `invert(expr) ∘ expr = id` on sampled members.
pub fn check_inverse_law(
    expr: &NcMapExpr,
    spec: &DomainSpec,
    levels: &[usize],
    opts: &CheckOptions,
) -> CheckReport {
    let builder = ReportBuilder::start("inverse_law", opts, opts.tolerance_or(ALGEBRAIC_TOL));
    let (builder, levels) = match admissible_levels(builder, spec, Some(expr), levels) {
        Ok(ok) => ok,
        Err(report) => return report,
    };
    let inverse = match expr.invert() {
        Ok(inv) => inv,
        Err(e) => return builder.hard_failure(f64::INFINITY, e.to_string()),
    };
    let outcomes = map_indexed(opts.exec, opts.trials, |t| {
        let mut rng = trial_rng(opts.seed, t as u64);
        let n = level_for(&levels, t);
        TrialOutcome::from_result((|| {
            let x = Sampler::default().sample_member(spec, n, &mut rng)?;
            let back = inverse.apply(&expr.apply(&x)?)?;
            Ok((relative_residual(&back, &x), json!({ "level": n, "x": x })))
        })())
    });
    builder.finish(outcomes)
}

/// Residual for a margin that must be strictly positive.
fn margin_residual(margin: f64) -> f64 {
    if margin > 0.0 {
        0.0
    } else {
        1.0 - margin
    }
}

fn finish_with_min_margin(mut builder: ReportBuilder, outcomes: Vec<TrialOutcome>) -> CheckReport {
    let min_margin = outcomes
        .iter()
        .filter_map(|o| o.detail.get("margin").and_then(Value::as_f64))
        .fold(f64::INFINITY, f64::min);
    builder.summary(json!({ "min_margin": super::report::finite_or_null::to_value(min_margin) }));
    builder.finish(outcomes)
}

/// Images of members, drawn up to 0.999 of the boundary, are members with a
/// strictly positive margin.
pub fn check_range_preservation(
    expr: &NcMapExpr,
    spec: &DomainSpec,
    levels: &[usize],
    opts: &CheckOptions,
) -> CheckReport {
    let builder = ReportBuilder::start("range_preservation", opts, opts.tolerance_or(0.0));
    let (builder, levels) = match admissible_levels(builder, spec, Some(expr), levels) {
        Ok(ok) => ok,
        Err(report) => return report,
    };
    let outcomes = map_indexed(opts.exec, opts.trials, |t| {
        let mut rng = trial_rng(opts.seed, t as u64);
        let n = level_for(&levels, t);
        TrialOutcome::from_result((|| {
            let x = BOUNDARY_SAMPLER.sample_member(spec, n, &mut rng)?;
            let verdict = spec.membership(&expr.apply(&x)?)?;
            let margin = verdict
                .margin
                .filter(|_| verdict.is_member())
                .unwrap_or(f64::NEG_INFINITY);
            Ok((
                margin_residual(margin),
                json!({ "level": n, "margin": margin, "x": x }),
            ))
        })())
    });
    finish_with_min_margin(builder, outcomes)
}

/// `|m(Z)| < 1` for random strict contractions `Z` at `level`, with norms
/// spread over `(0, 1 - 1e-6]`.
pub fn check_von_neumann(params: &MobiusParams, level: usize, opts: &CheckOptions) -> CheckReport {
    let builder = ReportBuilder::start("von_neumann", opts, opts.tolerance_or(0.0));
    if let Err(e) = params.validate() {
        return builder.hard_failure(f64::INFINITY, e.to_string());
    }
    if level == 0 {
        return builder.hard_failure(f64::INFINITY, "level must be positive".into());
    }
    let outcomes = map_indexed(opts.exec, opts.trials, |t| {
        let mut rng = trial_rng(opts.seed, t as u64);
        let radius = 1.0 - rng.random_range(1e-6..1.0);
        let z = matrix_with_norm(&mut rng, level, level, radius);
        TrialOutcome::from_result((|| {
            let image = params.apply(&z)?;
            let margin = 1.0 - image.operator_norm();
            let x = NcPoint::new(vec![z])?;
            Ok((
                margin_residual(margin),
                json!({ "norm": radius, "margin": margin, "x": x }),
            ))
        })())
    });
    finish_with_min_margin(builder, outcomes)
}
