//! Batch runner for `ncauto-core` checks: JSON suite configs in, JSON or CSV
//! reports out.

// `!(x >= t)` is used on purpose so that NaN fails the comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod paper;
pub mod run;

pub use config::{
    parse_config, Check, CheckDescriptor, ConfigError, OutputFormat, OutputSpec, SuiteConfig,
};
pub use output::{render_csv, render_json, summary, write_reports};
pub use paper::builtin_paper_suite;
pub use run::{run_check, run_suite, SuiteRun};

/// Exit status for a config that fails to parse or validate.
pub const EXIT_CONFIG_ERROR: i32 = 2;
/// Exit status when at least one check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
