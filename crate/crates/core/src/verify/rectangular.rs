use rand::Rng;
use serde_json::{json, Value};

use super::report::finite_or_null;
use super::{level_for, CheckOptions, CheckReport, ReportBuilder, TrialOutcome, DERIVATIVE_TOL};
use crate::error::Result;
use crate::maps::{ha_apply, kernel_sides, transpose_amplify, NcMapExpr};
use crate::matcore::{
    directional_derivative, relative_matrix_residual, BlockShape, ComplexMatrix, DiffScheme,
    NcPoint, SqrtPower, C64,
};
use crate::par::map_indexed;
use crate::rng::{ginibre, matrix_with_norm, trial_rng};

const KERNEL_TOL: f64 = 1e-10;
/// Lowest eigenvalue tolerated for `I - H_A(Z)^* H_A(Z)`.
const PSD_FLOOR: f64 = -1e-10;
const WITNESS_TOL: f64 = 1e-9;
/// `|T_n| = 1` is checked to this accuracy when `p = 1` or `n = 1`.
const DEGENERATE_TOL: f64 = 1e-12;
/// A lower bound above `1 + CB_GAP` counts as a violation of complete isometry.
const CB_GAP: f64 = 1e-6;

fn random_contraction(
    rng: &mut impl Rng,
    rows: usize,
    cols: usize,
    max_norm: f64,
) -> ComplexMatrix {
    let norm = max_norm * rng.random::<f64>();
    matrix_with_norm(rng, rows, cols, norm)
}

fn check_shape_arg(
    builder: ReportBuilder,
    a: Option<&ComplexMatrix>,
    shape: BlockShape,
    levels: &[usize],
) -> std::result::Result<ReportBuilder, CheckReport> {
    if let Some(a) = a {
        if a.shape() != (shape.p, shape.q) {
            let reason = format!(
                "A is {}x{}, shape is {}x{}",
                a.rows(),
                a.cols(),
                shape.p,
                shape.q
            );
            return Err(builder.hard_failure(f64::INFINITY, reason));
        }
        let norm = a.operator_norm();
        if !(norm < 1.0) {
            return Err(builder.hard_failure(f64::INFINITY, format!("|A| = {norm} is not < 1")));
        }
    }
    if levels.is_empty() || levels.contains(&0) {
        return Err(builder.hard_failure(f64::INFINITY, format!("invalid levels {levels:?}")));
    }
    Ok(builder)
}

/// Both sides of the `H_A` kernel identity on random packed `W`, `Z` with
/// norms below 1, plus positivity of `I - H_A(Z)^* H_A(Z)`. With `a = None`
/// every trial draws its own `A` with `|A| < 0.95`.
pub fn check_kernel_identity(
    a: Option<&ComplexMatrix>,
    shape: BlockShape,
    levels: &[usize],
    opts: &CheckOptions,
) -> CheckReport {
    let builder = ReportBuilder::start("kernel_identity", opts, opts.tolerance_or(KERNEL_TOL));
    let builder = match check_shape_arg(builder, a, shape, levels) {
        Ok(b) => b,
        Err(report) => return report,
    };
    let outcomes = map_indexed(opts.exec, opts.trials, |t| {
        let mut rng = trial_rng(opts.seed, t as u64);
        let n = level_for(levels, t);
        let a = match a {
            Some(a) => a.clone(),
            None => random_contraction(&mut rng, shape.p, shape.q, 0.95),
        };
        let w = random_contraction(&mut rng, n * shape.p, n * shape.q, 0.999);
        let z = random_contraction(&mut rng, n * shape.p, n * shape.q, 0.999);
        let detail = json!({ "level": n, "a": a, "w": w, "z": z });
        match kernel_trial(&a, &w, &z) {
            Ok((residual, min_eig)) if min_eig >= PSD_FLOOR => {
                let mut detail = detail;
                detail["min_eigenvalue"] = json!(min_eig);
                TrialOutcome::ok(residual, detail)
            }
            Ok((_, min_eig)) => TrialOutcome {
                residual: f64::INFINITY,
                detail,
                error: Some(format!("I - H_A(Z)^* H_A(Z) has eigenvalue {min_eig}")),
            },
            Err(e) => TrialOutcome::failed(&e, detail),
        }
    });
    builder.finish(outcomes)
}

fn kernel_trial(a: &ComplexMatrix, w: &ComplexMatrix, z: &ComplexMatrix) -> Result<(f64, f64)> {
    let (lhs, rhs) = kernel_sides(a, w, z)?;
    let hz = ha_apply(a, z)?;
    let defect = &ComplexMatrix::identity(z.cols()) - &(&hz.adjoint() * &hz);
    let hermitian = (&defect + &defect.adjoint()).scale(C64::new(0.5, 0.0));
    Ok((
        relative_matrix_residual(&lhs, &rhs),
        hermitian.min_hermitian_eigenvalue()?,
    ))
}

/// `sum_{i,j < k} E_ij ⊗ E_ji` in `M_p(M_n)` with `k = min(p, n)`: a partial
/// isometry whose block transpose has norm `k`.
pub fn swap_witness(p: usize, n: usize) -> ComplexMatrix {
    let k = p.min(n);
    let mut out = ComplexMatrix::zeros(n * p, n * p);
    for i in 0..k {
        for j in 0..k {
            out = &out + &ComplexMatrix::unit(p, p, i, j).kron(&ComplexMatrix::unit(n, n, j, i));
        }
    }
    out
}

fn amplification_ratio(p: usize, x: &ComplexMatrix) -> Result<f64> {
    Ok(transpose_amplify(p, x)?.operator_norm() / x.operator_norm())
}

/// Lower bound on the norm of the `n`-th amplification of the `p x p`
/// transpose, from the swap witness and `opts.trials` random samples.
///
/// For `p, n >= 2` the check demonstrates a violation: it passes when the
/// bound exceeds `1 + 1e-6` and the witness attains `min(p, n)` within
/// `1e-9`. For `p = 1` or `n = 1` it passes when every ratio equals 1.
pub fn check_cb_transpose(p: usize, n: usize, opts: &CheckOptions) -> CheckReport {
    let degenerate = p == 1 || n == 1;
    let tolerance = opts.tolerance_or(if degenerate { DEGENERATE_TOL } else { CB_GAP });
    let mut builder =
        ReportBuilder::start("cb_transpose", opts, tolerance).expect_violation(!degenerate);
    if p == 0 || n == 0 {
        return builder.hard_failure(f64::INFINITY, "p and n must be positive".into());
    }
    let residual_of = |ratio: f64| {
        if degenerate {
            (ratio - 1.0).abs()
        } else {
            ratio - 1.0
        }
    };

    let expected = if degenerate { 1.0 } else { p.min(n) as f64 };
    let witness = swap_witness(p, n);
    let witness_ratio = amplification_ratio(p, &witness).unwrap_or(f64::NAN);
    let witness_outcome = if (witness_ratio - expected).abs() <= WITNESS_TOL {
        TrialOutcome::ok(
            residual_of(witness_ratio),
            json!({ "witness": "swap", "ratio": witness_ratio }),
        )
    } else {
        TrialOutcome {
            residual: f64::INFINITY,
            detail: json!({ "witness": "swap", "ratio": finite_or_null::to_value(witness_ratio) }),
            error: Some(format!(
                "swap witness gives {witness_ratio}, expected {expected}"
            )),
        }
    };

    let samples = map_indexed(opts.exec, opts.trials, |t| {
        let mut rng = trial_rng(opts.seed, t as u64);
        let g = ginibre(&mut rng, n * p, n * p);
        let x = g.scale(C64::new(1.0 / g.frobenius_norm(), 0.0));
        match amplification_ratio(p, &x) {
            Ok(ratio) => TrialOutcome::ok(residual_of(ratio), json!({ "ratio": ratio })),
            Err(e) => TrialOutcome::failed(&e, Value::Null),
        }
    });
    let random_bound = samples
        .iter()
        .filter_map(|o| o.detail.get("ratio").and_then(Value::as_f64))
        .fold(0.0, f64::max);
    builder.summary(json!({
        "p": p,
        "level": n,
        "witness_norm": finite_or_null::to_value(witness_ratio),
        "expected_witness_norm": expected,
        "random_bound": random_bound,
        "lower_bound": finite_or_null::to_value(witness_ratio.max(random_bound)),
    }));
    let mut outcomes = vec![witness_outcome];
    outcomes.extend(samples);
    builder.finish(outcomes)
}

/// Finite-difference `D H_A(0)[H]` against
/// `((I - AA^*)^{1/2} ⊗ I) H ((I - A^*A)^{1/2} ⊗ I)` for random `H` of unit
/// norm.
pub fn check_derivative_closed_form(
    a: Option<&ComplexMatrix>,
    shape: BlockShape,
    levels: &[usize],
    opts: &CheckOptions,
) -> CheckReport {
    let builder = ReportBuilder::start(
        "derivative_closed_form",
        opts,
        opts.tolerance_or(DERIVATIVE_TOL),
    );
    let builder = match check_shape_arg(builder, a, shape, levels) {
        Ok(b) => b,
        Err(report) => return report,
    };
    let outcomes = map_indexed(opts.exec, opts.trials, |t| {
        let mut rng = trial_rng(opts.seed, t as u64);
        let n = level_for(levels, t);
        let a = match a {
            Some(a) => a.clone(),
            None => random_contraction(&mut rng, shape.p, shape.q, 0.9),
        };
        let g = ginibre(&mut rng, n * shape.p, n * shape.q);
        let h = g.scale(C64::new(1.0 / g.operator_norm(), 0.0));
        let detail = json!({ "level": n, "a": a, "h": h });
        match derivative_trial(&a, &h, shape, n) {
            Ok(residual) => TrialOutcome::ok(residual, detail),
            Err(e) => TrialOutcome::failed(&e, detail),
        }
    });
    builder.finish(outcomes)
}

fn derivative_trial(
    a: &ComplexMatrix,
    h: &ComplexMatrix,
    shape: BlockShape,
    n: usize,
) -> Result<f64> {
    let expr = NcMapExpr::ha(a.clone())?;
    let origin = NcPoint::zeros(n, shape.d());
    let dir = NcPoint::gamma_unpack(h, shape, n)?;
    let estimate =
        directional_derivative(|x| expr.apply(x), &origin, &dir, &DiffScheme::default())?;
    let numeric = estimate.value.gamma_pack(shape)?;

    let left =
        (&ComplexMatrix::identity(shape.p) - &(a * &a.adjoint())).herm_sqrt_inv(SqrtPower::Half)?;
    let right =
        (&ComplexMatrix::identity(shape.q) - &(&a.adjoint() * a)).herm_sqrt_inv(SqrtPower::Half)?;
    let closed = &(&left.amplify(n) * h) * &right.amplify(n);
    Ok(relative_matrix_residual(&numeric, &closed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_witness_is_a_partial_isometry() {
        for (p, n) in [(2, 2), (3, 3), (2, 4), (3, 2)] {
            let w = swap_witness(p, n);
            assert!((w.operator_norm() - 1.0).abs() < 1e-12);
            // The image is k times the projection onto sum_i e_i ⊗ e_i / sqrt(k).
            let k = p.min(n) as f64;
            let image = transpose_amplify(p, &w).unwrap();
            let (eig, _) = image.hermitian_eigen().unwrap();
            assert!((eig[eig.len() - 1] - k).abs() < 1e-12);
            assert!(eig[..eig.len() - 1].iter().all(|l| l.abs() < 1e-12));
        }
    }

    #[test]
    fn cb_transpose_cases() {
        let opts = CheckOptions::new(50, 3);
        let r = check_cb_transpose(2, 2, &opts);
        assert!(r.passed, "{r:?}");
        assert!((r.max_residual - 1.0).abs() < 1e-12);
        for (p, n) in [(1, 3), (3, 1)] {
            let r = check_cb_transpose(p, n, &opts);
            assert!(r.passed, "{r:?}");
            assert!(r.max_residual <= 1e-12);
        }
    }

    #[test]
    fn kernel_identity_with_zero_a() {
        let r = check_kernel_identity(
            Some(&ComplexMatrix::zeros(2, 3)),
            BlockShape::new(2, 3).unwrap(),
            &[1, 2],
            &CheckOptions::new(20, 8),
        );
        assert!(r.passed, "{r:?}");
        assert!(r.max_residual < 1e-14);
    }

    #[test]
    fn scalar_derivative_is_one_minus_modulus_squared() {
        // d/dz (z + a)/(1 + conj(a) z) at 0 is 1 - |a|^2.
        let a = ComplexMatrix::scalar(C64::new(0.3, 0.4));
        let shape = BlockShape::new(1, 1).unwrap();
        let h = ComplexMatrix::scalar(C64::new(1.0, 0.0));
        let expr = NcMapExpr::ha(a).unwrap();
        let d = directional_derivative(
            |x| expr.apply(x),
            &NcPoint::zeros(1, 1),
            &NcPoint::gamma_unpack(&h, shape, 1).unwrap(),
            &DiffScheme::default(),
        )
        .unwrap();
        assert!((d.value.var(0)[(0, 0)] - C64::new(0.75, 0.0)).norm() < 1e-9);
        let r = check_derivative_closed_form(
            None,
            BlockShape::new(2, 1).unwrap(),
            &[1, 2],
            &CheckOptions::new(10, 2),
        );
        assert!(r.passed, "{r:?}");
    }
}
