use std::panic::{catch_unwind, AssertUnwindSafe};

use ncauto_core::domains::nc_closure_check;
use ncauto_core::matcore::BlockShape;
use ncauto_core::par::Exec;
use ncauto_core::verify::{self, CheckOptions, CheckReport};
use serde_json::json;

use crate::config::{Check, CheckDescriptor, SuiteConfig};

/// Reports of one suite run, in suite order.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRun {
    pub reports: Vec<CheckReport>,
}

impl SuiteRun {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }
}

fn shape(p: usize, q: usize) -> Result<BlockShape, String> {
    BlockShape::new(p, q).map_err(|e| e.to_string())
}

fn dispatch(check: &Check, opts: &CheckOptions) -> Result<CheckReport, String> {
    Ok(match check {
        Check::NcAxioms {
            map,
            domain,
            levels,
        } => verify::check_nc_axioms(map, domain, levels, opts),
        Check::NcClosure { domain, levels } => nc_closure_check(domain, levels, opts),
        Check::KernelIdentity { a, p, q, levels } => {
            verify::check_kernel_identity(a.as_ref(), shape(*p, *q)?, levels, opts)
        }
        Check::InverseLaw {
            map,
            domain,
            levels,
        } => verify::check_inverse_law(map, domain, levels, opts),
        Check::RangePreservation {
            map,
            domain,
            levels,
        } => verify::check_range_preservation(map, domain, levels, opts),
        Check::VonNeumann { mobius, level } => verify::check_von_neumann(mobius, *level, opts),
        Check::CbTranspose { p, level } => verify::check_cb_transpose(*p, *level, opts),
        Check::Rigidity {
            map,
            domain,
            config,
            expectation,
        } => verify::check_rigidity(map, domain, config, *expectation, opts),
        Check::DerivativeSimilarityInvariance { map, domain, level } => {
            verify::check_derivative_similarity_invariance(map, domain, *level, opts)
        }
        Check::LinearStructure {
            map,
            domain,
            base_level,
            probe_levels,
        } => verify::check_linear_structure(map, domain, *base_level, probe_levels, opts),
        Check::DerivativeClosedForm { a, p, q, levels } => {
            verify::check_derivative_closed_form(a.as_ref(), shape(*p, *q)?, levels, opts)
        }
        Check::SpectralDisk { domain, levels } => verify::check_spectral_disk(domain, levels, opts),
        Check::LevelRestriction {
            p,
            q,
            generators,
            levels,
        } => verify::check_level_restriction(shape(*p, *q)?, generators, levels, opts),
    })
}

fn check_name(check: &Check) -> String {
    serde_json::to_value(check)
        .ok()
        .and_then(|v| v.get("check").and_then(|c| c.as_str().map(str::to_string)))
        .unwrap_or_else(|| "unknown".into())
}

fn failed_report(name: String, seed: u64, reason: String) -> CheckReport {
    CheckReport {
        check: name,
        seed,
        trials: 0,
        max_residual: f64::INFINITY,
        tolerance: 0.0,
        passed: false,
        expect_violation: false,
        witnesses: vec![json!({ "error": reason })],
        runtime_ms: 0.0,
    }
}

/// Run one descriptor. Errors and panics inside the check become failing
/// reports.
pub fn run_check(descriptor: &CheckDescriptor, seed: u64, exec: Exec) -> CheckReport {
    let mut opts = CheckOptions::new(
        descriptor
            .trials
            .unwrap_or_else(|| descriptor.check.default_trials()),
        seed,
    )
    .with_exec(exec);
    opts.tolerance = descriptor.tolerance;
    opts.expect_violation = descriptor.expect_violation;
    match catch_unwind(AssertUnwindSafe(|| dispatch(&descriptor.check, &opts))) {
        Ok(Ok(report)) => report,
        Ok(Err(reason)) => failed_report(check_name(&descriptor.check), seed, reason),
        Err(panic) => {
            let reason = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "check panicked".into());
            failed_report(
                check_name(&descriptor.check),
                seed,
                format!("panic: {reason}"),
            )
        }
    }
}

/// Run every check of `config` on a pool of `config.parallelism` workers
/// (all cores when unset). Trials inside a check share the same pool.
pub fn run_suite(config: &SuiteConfig) -> anyhow::Result<SuiteRun> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.parallelism.unwrap_or(0))
            .build()?;
        let exec = if config.parallelism == Some(1) {
            Exec::Sequential
        } else {
            Exec::Parallel
        };
        let reports = pool.install(|| {
            config
                .suite
                .par_iter()
                .map(|d| run_check(d, config.seed, exec))
                .collect::<Vec<_>>()
        });
        Ok(SuiteRun { reports })
    }
    #[cfg(not(feature = "parallel"))]
    {
        let reports = config
            .suite
            .iter()
            .map(|d| run_check(d, config.seed, Exec::Sequential))
            .collect();
        Ok(SuiteRun { reports })
    }
}
