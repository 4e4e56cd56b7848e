use rand::Rng;
use serde_json::json;

use super::sampling::Sampler;
use super::spec::DomainSpec;
use crate::error::Result;
use crate::par::map_indexed;
use crate::rng::{haar_unitary, trial_rng};
use crate::verify::{CheckOptions, CheckReport, ReportBuilder, TrialOutcome};

/// Samples member pairs `x`, `y` and a Haar unitary `u`, and counts how many
/// of `x ⊕ y` and `u^* x u` fail membership. Tolerance is zero violations.
pub fn nc_closure_check(spec: &DomainSpec, levels: &[usize], opts: &CheckOptions) -> CheckReport {
    let builder = ReportBuilder::start("nc_closure", opts, opts.tolerance_or(0.0));
    let levels: Vec<usize> = levels
        .iter()
        .copied()
        .filter(|&n| spec.has_level(n))
        .collect();
    if levels.is_empty() {
        return builder.hard_failure(f64::INFINITY, "no admissible sampling level".into());
    }
    let outcomes = map_indexed(opts.exec, opts.trials, |t| {
        let mut rng = trial_rng(opts.seed, t as u64);
        let n = levels[t % levels.len()];
        let m = levels[rng.random_range(0..levels.len())];
        TrialOutcome::from_result(closure_trial(spec, n, m, &mut rng))
    });
    builder.finish(outcomes)
}

fn closure_trial(
    spec: &DomainSpec,
    n: usize,
    m: usize,
    rng: &mut impl Rng,
) -> Result<(f64, serde_json::Value)> {
    let sampler = Sampler::default();
    let x = sampler.sample_member(spec, n, rng)?;
    let y = sampler.sample_member(spec, m, rng)?;
    let u = haar_unitary(rng, n);
    let sum = x.direct_sum(&y)?;
    let rotated = x.conjugate_with(&u.adjoint(), &u);

    let sum_ok = !spec.has_level(n + m) || spec.is_member(&sum)?;
    let rotated_ok = spec.is_member(&rotated)?;
    let violations = usize::from(!sum_ok) + usize::from(!rotated_ok);
    let detail = if violations == 0 {
        json!({ "levels": [n, m] })
    } else {
        json!({ "levels": [n, m], "direct_sum_member": sum_ok, "unitary_conjugate_member": rotated_ok, "x": x, "y": y, "u": u })
    };
    Ok((violations as f64, detail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_domains_are_nc_sets() {
        let opts = CheckOptions::new(100, 17);
        for spec in [
            DomainSpec::polydisk(2).unwrap(),
            DomainSpec::rpq(2, 3).unwrap(),
            DomainSpec::commutator(),
        ] {
            let r = nc_closure_check(&spec, &[1, 2, 3], &opts);
            assert!(r.passed, "{r:?}");
            assert_eq!(r.max_residual, 0.0);
        }
    }

    #[test]
    fn spectral_disk_contractions_close() {
        let spec = DomainSpec::spectral_disk(vec![1.0, 1.5]).unwrap();
        let r = nc_closure_check(&spec, &[1, 2], &CheckOptions::new(30, 3));
        assert!(r.passed, "{r:?}");
    }
}
