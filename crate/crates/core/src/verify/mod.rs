//! Seeded numerical experiments.
//!
//! Every check draws the randomness of trial `t` from
//! [`trial_rng(seed, t)`](crate::rng::trial_rng), so a report depends only on
//! its inputs and not on how trials were scheduled. Residuals are relative,
//! `|lhs - rhs|_F / (1 + |lhs|_F + |rhs|_F)`, unless a check says otherwise.

mod axioms;
mod levels;
mod linear;
mod rectangular;
mod report;
mod rigidity;
mod spectral;

pub use axioms::{check_inverse_law, check_nc_axioms, check_range_preservation, check_von_neumann};
pub use levels::check_level_restriction;
pub use linear::{check_derivative_similarity_invariance, check_linear_structure, fit_linear_part};
pub use rectangular::{
    check_cb_transpose, check_derivative_closed_form, check_kernel_identity, swap_witness,
};
pub use report::{CheckOptions, CheckReport};
pub use rigidity::{
    check_rigidity, rigidity_probe, RigidityConfig, RigidityExpectation, RigidityVerdict,
};
pub use spectral::check_spectral_disk;

pub(crate) use report::{ReportBuilder, TrialOutcome};

use crate::domains::DomainSpec;
use crate::maps::NcMapExpr;

/// Seed used when a configuration does not provide one.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-9;
/// Comparisons against finite-difference derivatives.
pub const DERIVATIVE_TOL: f64 = 1e-6;

/// Level used by trial `t` when cycling through `levels`.
pub(crate) fn level_for(levels: &[usize], t: usize) -> usize {
    levels[t % levels.len()]
}

/// Levels of `levels` admitted by `spec`, or a finished failing report.
pub(crate) fn admissible_levels(
    builder: ReportBuilder,
    spec: &DomainSpec,
    expr: Option<&NcMapExpr>,
    levels: &[usize],
) -> std::result::Result<(ReportBuilder, Vec<usize>), CheckReport> {
    if let Err(e) = spec.validate() {
        return Err(builder.hard_failure(f64::INFINITY, e.to_string()));
    }
    if let Some(expr) = expr {
        if let Err(e) = expr.validate() {
            return Err(builder.hard_failure(f64::INFINITY, e.to_string()));
        }
        if expr.arity() != spec.arity() {
            let reason = format!(
                "map has d = {}, domain has d = {}",
                expr.arity(),
                spec.arity()
            );
            return Err(builder.hard_failure(f64::INFINITY, reason));
        }
    }
    let admitted: Vec<usize> = levels
        .iter()
        .copied()
        .filter(|&n| n > 0 && spec.has_level(n))
        .collect();
    if admitted.is_empty() {
        return Err(builder.hard_failure(
            f64::INFINITY,
            format!("no admissible level among {levels:?}"),
        ));
    }
    Ok((builder, admitted))
}
