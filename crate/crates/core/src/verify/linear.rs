use serde_json::json;

use super::{
    admissible_levels, level_for, CheckOptions, CheckReport, ReportBuilder, TrialOutcome,
    DERIVATIVE_TOL,
};
use crate::domains::{near_identity, DomainSpec, Sampler};
use crate::error::{Error, Result};
use crate::maps::NcMapExpr;
use crate::matcore::{
    directional_derivative, relative_residual, ComplexMatrix, DiffScheme, NcPoint, C64,
};
use crate::par::map_indexed;
use crate::rng::{ginibre, trial_rng};

const LINEAR_TOL: f64 = 1e-10;
/// `|Phi(0)|` below this counts as fixing the origin.
pub(crate) const ORIGIN_TOL: f64 = 1e-12;
const MIN_SINGULAR_VALUE: f64 = 1e-10;
/// Scalar multiple of the identity used to probe each coordinate.
const PROBE_SCALE: f64 = 0.5;

pub(crate) fn origin_residual(expr: &NcMapExpr, level: usize) -> Result<f64> {
    Ok(expr.apply(&NcPoint::zeros(level, expr.arity()))?.max_norm())
}

/// The `d x d` matrix `F` read off from `Phi(t e_k ⊗ I_m) = t (F e_k) ⊗ I_m`.
pub fn fit_linear_part(expr: &NcMapExpr, base_level: usize) -> Result<ComplexMatrix> {
    let d = expr.arity();
    let probe = ComplexMatrix::identity(base_level).scale(C64::new(PROBE_SCALE, 0.0));
    let mut f = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        let image = expr.apply(&NcPoint::single(d, k, probe.clone())?)?;
        for i in 0..d {
            f[(i, k)] = image.var(i)[(0, 0)] / PROBE_SCALE;
        }
    }
    Ok(f)
}

/// `(F ⊗ id)(x)`: variable `i` of the result is `sum_k F[i, k] x^k`.
fn apply_entrywise(f: &ComplexMatrix, x: &NcPoint) -> Result<NcPoint> {
    let n = x.level();
    let vars = (0..f.rows())
        .map(|i| {
            x.vars()
                .iter()
                .enumerate()
                .fold(ComplexMatrix::zeros(n, n), |acc, (k, v)| {
                    &acc + &v.scale(f[(i, k)])
                })
        })
        .collect();
    NcPoint::new(vars)
}

/// Fits `F` at `base_level` and compares `Phi(x)` with `(F ⊗ id)(x)` on
/// members at each probe level. Requires a circular domain, `Phi(0) = 0`
/// and `F` invertible.
pub fn check_linear_structure(
    expr: &NcMapExpr,
    spec: &DomainSpec,
    base_level: usize,
    probe_levels: &[usize],
    opts: &CheckOptions,
) -> CheckReport {
    let builder = ReportBuilder::start("linear_structure", opts, opts.tolerance_or(LINEAR_TOL));
    let (mut builder, levels) = match admissible_levels(builder, spec, Some(expr), probe_levels) {
        Ok(ok) => ok,
        Err(report) => return report,
    };
    if !spec.is_circular() {
        return builder.hard_failure(f64::INFINITY, "domain is not circular".into());
    }
    if !spec.contains_origin(base_level) {
        return builder.hard_failure(
            f64::INFINITY,
            Error::OriginNotInDomain(base_level).to_string(),
        );
    }
    let fit = origin_residual(expr, base_level).and_then(|r0| {
        if r0 > ORIGIN_TOL {
            return Err(Error::InvalidParameter(format!(
                "hypothesis failure: |Phi(0)| = {r0}"
            )));
        }
        fit_linear_part(expr, base_level)
    });
    let f = match fit {
        Ok(f) => f,
        Err(e) => return builder.hard_failure(f64::INFINITY, e.to_string()),
    };
    let sigma_min = f.singular_values().last().copied().unwrap_or(0.0);
    builder.summary(json!({ "f": f, "min_singular_value": sigma_min }));
    if !(sigma_min > MIN_SINGULAR_VALUE) {
        return builder.hard_failure(
            f64::INFINITY,
            format!("F is singular: smallest singular value {sigma_min}"),
        );
    }

    let outcomes = map_indexed(opts.exec, opts.trials, |t| {
        let mut rng = trial_rng(opts.seed, t as u64);
        let n = level_for(&levels, t);
        TrialOutcome::from_result((|| {
            let x = Sampler::default().sample_member(spec, n, &mut rng)?;
            let residual = relative_residual(&expr.apply(&x)?, &apply_entrywise(&f, &x)?);
            Ok((residual, json!({ "level": n, "x": x })))
        })())
    });
    builder.finish(outcomes)
}

/// `DPhi(0)[s^-1 Z s] = s^-1 DPhi(0)[Z] s` with both sides by finite
/// differences, for random `Z` of unit norm and `s = I + 0.3 G`.
pub fn check_derivative_similarity_invariance(
    expr: &NcMapExpr,
    spec: &DomainSpec,
    level: usize,
    opts: &CheckOptions,
) -> CheckReport {
    let builder = ReportBuilder::start(
        "derivative_similarity_invariance",
        opts,
        opts.tolerance_or(DERIVATIVE_TOL),
    );
    let (builder, _) = match admissible_levels(builder, spec, Some(expr), &[level]) {
        Ok(ok) => ok,
        Err(report) => return report,
    };
    match origin_residual(expr, level) {
        Ok(r0) if r0 <= ORIGIN_TOL => {}
        Ok(r0) => {
            return builder.hard_failure(
                r0,
                format!("hypothesis failure: map does not fix 0, |Phi(0)| = {r0}"),
            )
        }
        Err(e) => return builder.hard_failure(f64::INFINITY, e.to_string()),
    }
    let origin = NcPoint::zeros(level, expr.arity());
    let derivative = |h: &NcPoint| -> Result<NcPoint> {
        Ok(directional_derivative(|x| expr.apply(x), &origin, h, &DiffScheme::default())?.value)
    };
    let outcomes = map_indexed(opts.exec, opts.trials, |t| {
        let mut rng = trial_rng(opts.seed, t as u64);
        TrialOutcome::from_result((|| {
            let raw = NcPoint::new(
                (0..expr.arity())
                    .map(|_| ginibre(&mut rng, level, level))
                    .collect(),
            )?;
            let z = raw.scale(C64::new(1.0 / raw.max_norm(), 0.0));
            let s = near_identity(&mut rng, level, 0.3);
            let (s_inv, _) = z.similarity_inverse(&s)?;
            let lhs = derivative(&z.conjugate_with(&s_inv, &s))?;
            let rhs = derivative(&z)?.conjugate_with(&s_inv, &s);
            Ok((relative_residual(&lhs, &rhs), json!({ "z": z, "s": s })))
        })())
    });
    builder.finish(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::MobiusParams;
    use crate::rng::haar_unitary;

    #[test]
    fn swap_permutation_fits_permutation_matrix() {
        let id = MobiusParams::rotation(0.0);
        let expr = NcMapExpr::mobius_tuple(vec![id, id], vec![1, 0]).unwrap();
        let f = fit_linear_part(&expr, 1).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(f, expected);
        let r = check_linear_structure(
            &expr,
            &DomainSpec::polydisk(2).unwrap(),
            1,
            &[1, 2, 3],
            &CheckOptions::new(30, 1),
        );
        assert!(r.passed, "{r:?}");
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn morita_fit_matches_basis_images() {
        let mut rng = trial_rng(14, 0);
        let (u, v) = (haar_unitary(&mut rng, 2), haar_unitary(&mut rng, 3));
        let expr = NcMapExpr::linear_isometry(u.clone(), v.clone()).unwrap();
        let f = fit_linear_part(&expr, 2).unwrap();
        // Column k of F is U E_k V in gamma coordinates.
        for k in 0..6 {
            let image = &(&u * &ComplexMatrix::unit(2, 3, k / 3, k % 3)) * &v;
            for i in 0..6 {
                assert!((f[(i, k)] - image[(i / 3, i % 3)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn nonzero_origin_image_is_a_hypothesis_failure() {
        let expr = NcMapExpr::mobius_tuple(
            vec![MobiusParams::new(0.0, C64::new(0.4, 0.0)).unwrap()],
            vec![0],
        )
        .unwrap();
        let spec = DomainSpec::polydisk(1).unwrap();
        let r = check_linear_structure(&expr, &spec, 1, &[1, 2], &CheckOptions::new(5, 1));
        assert!(!r.passed);
        assert!(r.witnesses[0]["error"]
            .as_str()
            .unwrap()
            .contains("hypothesis"));
        assert!(
            !check_derivative_similarity_invariance(&expr, &spec, 2, &CheckOptions::new(5, 1))
                .passed
        );
    }

    #[test]
    fn rotation_derivative_commutes_with_similarity() {
        let expr =
            NcMapExpr::mobius_tuple(vec![MobiusParams::rotation(0.9); 2], vec![0, 1]).unwrap();
        let r = check_derivative_similarity_invariance(
            &expr,
            &DomainSpec::polydisk(2).unwrap(),
            3,
            &CheckOptions::new(20, 4),
        );
        assert!(r.passed, "{r:?}");
        assert!(r.max_residual <= 1e-8);
    }
}
