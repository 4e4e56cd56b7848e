use rand::Rng;
use serde_json::json;

use super::{admissible_levels, level_for, CheckOptions, CheckReport, ReportBuilder, TrialOutcome};
use crate::domains::{
    disguised_spectral_member, verify_certificate, Certificate, DomainKind, DomainSpec, Membership,
    SpectralSearch,
};
use crate::error::{Error, Result};
use crate::maps::MobiusParams;
use crate::matcore::{ComplexMatrix, C64};
use crate::par::map_indexed;
use crate::rng::{disk_point, ginibre, haar_unitary, trial_rng};

/// Disguised members are built with condition `r^SPREAD_EXPONENT`, leaving
/// the search some room inside the budget `r`.
const SPREAD_EXPONENT: f64 = 0.75;

/// Four properties of the spectral-disk search, per trial:
///
/// 1. a normal contraction is accepted with `s = I`;
/// 2. a point with spectral radius at least 1 is rejected;
/// 3. every accepted disguised member carries a certificate that re-verifies
///    from scratch;
/// 4. a Möbius image of an accepted member is certified by the same `s`.
///
/// The trial residual counts failed properties; tolerance is zero.
/// Undetermined verdicts in (3) are counted in the summary, not failed.
pub fn check_spectral_disk(
    spec: &DomainSpec,
    levels: &[usize],
    opts: &CheckOptions,
) -> CheckReport {
    let mut builder = ReportBuilder::start("spectral_disk", opts, opts.tolerance_or(0.0));
    if !matches!(spec.kind, DomainKind::SpectralDisk { .. }) {
        return builder.hard_failure(f64::INFINITY, "domain is not a spectral disk".into());
    }
    let (b, levels) = match admissible_levels(builder, spec, None, levels) {
        Ok(ok) => ok,
        Err(report) => return report,
    };
    builder = b;
    let outcomes = map_indexed(opts.exec, opts.trials, |t| {
        let mut rng = trial_rng(opts.seed, t as u64);
        let n = level_for(&levels, t);
        let r = spec.radius_at(n).expect("spectral disk has radii");
        TrialOutcome::from_result(spectral_trial(n, r, &mut rng))
    });
    let count = |key: &str| {
        outcomes
            .iter()
            .filter(|o| o.detail.get("disguised") == Some(&json!(key)))
            .count()
    };
    builder.summary(json!({
        "disguised_accepted": count("yes"),
        "disguised_undetermined": count("undetermined"),
        "disguised_norm_at_least_one": outcomes
            .iter()
            .filter(|o| o.detail.get("norm").and_then(serde_json::Value::as_f64).is_some_and(|v| v >= 1.0))
            .count(),
    }));
    builder.finish(outcomes)
}

fn spectral_trial(n: usize, r: f64, rng: &mut impl Rng) -> Result<(f64, serde_json::Value)> {
    let search = SpectralSearch::default();
    let identity = ComplexMatrix::identity(n);

    let u = haar_unitary(rng, n);
    let eig: Vec<C64> = (0..n).map(|_| disk_point(rng, 0.95)).collect();
    let normal = &(&u * &ComplexMatrix::from_diag(&eig)) * &u.adjoint();
    let normal_ok = matches!(
        search.search(&normal, r)?.certificate,
        Some(Certificate::Similarity { ref s, .. }) if *s == identity
    );

    let mut triangular = ginibre(rng, n, n);
    for i in 0..n {
        for j in 0..i {
            triangular[(i, j)] = C64::new(0.0, 0.0);
        }
        triangular[(i, i)] = disk_point(rng, 0.95);
    }
    triangular[(0, 0)] = C64::from_polar(
        1.0 + 0.5 * rng.random::<f64>(),
        rng.random::<f64>() * std::f64::consts::TAU,
    );
    let v = haar_unitary(rng, n);
    let outside = &(&v * &triangular) * &v.adjoint();
    let outside_ok = search.search(&outside, r)?.member == Membership::No;

    let (x, _) = disguised_spectral_member(rng, n, r.powf(SPREAD_EXPONENT), 0.9)?;
    let verdict = search.search(&x, r)?;
    let m = MobiusParams::new(
        rng.random::<f64>() * std::f64::consts::TAU,
        disk_point(rng, 0.9),
    )?;
    let (disguised, certificate_ok, mobius_ok) = match (&verdict.member, &verdict.certificate) {
        (Membership::Yes, Some(Certificate::Similarity { s, .. })) => {
            let image = m.apply(&x)?;
            (
                "yes",
                verify_certificate(&x, s, r),
                verify_certificate(&image, s, r),
            )
        }
        (Membership::Undetermined, _) => ("undetermined", true, true),
        _ => ("rejected", false, false),
    };
    let failures = [normal_ok, outside_ok, certificate_ok, mobius_ok]
        .iter()
        .filter(|ok| !**ok)
        .count();
    let detail = json!({
        "level": n,
        "normal_accepted_with_identity": normal_ok,
        "outside_rejected": outside_ok,
        "disguised": disguised,
        "certificate_reverified": certificate_ok,
        "mobius_image_certified": mobius_ok,
        "norm": x.operator_norm(),
        "x": x,
    });
    if disguised == "rejected" {
        return Err(Error::InvalidParameter(format!(
            "search rejected a member with spectral radius < 1: {verdict:?}"
        )));
    }
    Ok((failures as f64, detail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_disk_properties_hold() {
        let spec = DomainSpec::spectral_disk(vec![1.0, 2.0, 3.0]).unwrap();
        let r = check_spectral_disk(&spec, &[1, 2, 3], &CheckOptions::new(12, 5));
        assert!(r.passed, "{r:?}");
        assert!(r.witnesses[0]["disguised_accepted"].as_u64().unwrap() > 0);
    }

    #[test]
    fn requires_spectral_disk() {
        let r = check_spectral_disk(
            &DomainSpec::polydisk(1).unwrap(),
            &[1],
            &CheckOptions::new(1, 1),
        );
        assert!(!r.passed);
    }
}
