use rand::Rng;
use serde_json::json;

use super::{level_for, CheckOptions, CheckReport, ReportBuilder, TrialOutcome};
use crate::domains::DomainSpec;
use crate::matcore::{BlockShape, NcPoint};
use crate::par::map_indexed;
use crate::rng::{matrix_with_norm, trial_rng};

/// `R_pq` restricted to the levels generated by `generators` refuses every
/// point at an excluded level and agrees with unrestricted `R_pq` at every
/// admitted one. Points have packed norms uniform in `(0, 2)`, so roughly
/// half are members. The residual counts disagreements; tolerance is zero.
pub fn check_level_restriction(
    shape: BlockShape,
    generators: &[usize],
    levels: &[usize],
    opts: &CheckOptions,
) -> CheckReport {
    let mut builder = ReportBuilder::start("level_restriction", opts, opts.tolerance_or(0.0));
    let restricted = match DomainSpec::rpq(shape.p, shape.q)
        .and_then(|s| s.restricted_to(generators.to_vec()))
    {
        Ok(s) => s,
        Err(e) => return builder.hard_failure(f64::INFINITY, e.to_string()),
    };
    if levels.is_empty() || levels.contains(&0) {
        return builder.hard_failure(f64::INFINITY, format!("invalid levels {levels:?}"));
    }
    let full = restricted.unrestricted();
    let admitted: Vec<usize> = levels
        .iter()
        .copied()
        .filter(|&n| restricted.has_level(n))
        .collect();
    builder.summary(json!({ "generators": generators, "admitted_levels": admitted }));

    let outcomes = map_indexed(opts.exec, opts.trials, |t| {
        let mut rng = trial_rng(opts.seed, t as u64);
        let n = level_for(levels, t);
        let norm = 2.0 * rng.random::<f64>();
        let packed = matrix_with_norm(&mut rng, n * shape.p, n * shape.q, norm);
        TrialOutcome::from_result((|| {
            let x = NcPoint::gamma_unpack(&packed, shape, n)?;
            let in_full = full.is_member(&x)?;
            let in_restricted = restricted.is_member(&x)?;
            let expected = restricted.has_level(n) && in_full;
            let detail = json!({ "level": n, "norm": norm, "unrestricted": in_full, "restricted": in_restricted });
            Ok((f64::from(u8::from(in_restricted != expected)), detail))
        })())
    });
    builder.finish(outcomes)
}
