use std::fs;
use std::path::Path;

use anyhow::Context;
use ncauto_core::verify::CheckReport;
use serde::Serialize;

use crate::config::OutputFormat;

#[derive(Serialize)]
struct CsvRow<'a> {
    check: &'a str,
    seed: u64,
    trials: usize,
    max_residual: f64,
    tolerance: f64,
    passed: bool,
    runtime_ms: f64,
}

/// JSON array of reports, pretty-printed, newline-terminated.
pub fn render_json(reports: &[CheckReport]) -> anyhow::Result<String> {
    let mut text = serde_json::to_string_pretty(reports)?;
    text.push('\n');
    Ok(text)
}

/// `check,seed,trials,max_residual,tolerance,passed,runtime_ms`, one row per
/// report. Non-finite residuals print as `inf`.
pub fn render_csv(reports: &[CheckReport]) -> anyhow::Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    if reports.is_empty() {
        writer.write_record([
            "check",
            "seed",
            "trials",
            "max_residual",
            "tolerance",
            "passed",
            "runtime_ms",
        ])?;
    }
    for r in reports {
        writer.serialize(CsvRow {
            check: &r.check,
            seed: r.seed,
            trials: r.trials,
            max_residual: r.max_residual,
            tolerance: r.tolerance,
            passed: r.passed,
            runtime_ms: r.runtime_ms,
        })?;
    }
    Ok(String::from_utf8(writer.into_inner()?)?)
}

pub fn write_reports(
    path: &Path,
    format: OutputFormat,
    reports: &[CheckReport],
) -> anyhow::Result<()> {
    let text = match format {
        OutputFormat::Json => render_json(reports)?,
        OutputFormat::Csv => render_csv(reports)?,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// One line per check, then a totals line.
pub fn summary(reports: &[CheckReport]) -> String {
    let width = reports.iter().map(|r| r.check.len()).max().unwrap_or(0);
    let mut out = String::new();
    let index_width = reports.len().to_string().len();
    for (i, r) in reports.iter().enumerate() {
        let status = if r.passed { "PASS" } else { "FAIL" };
        let mode = if r.expect_violation {
            " (expects violation)"
        } else {
            ""
        };
        out.push_str(&format!(
            "{:>index_width$}  {status}  {:<width$}  max_residual={:.3e}  tolerance={:.1e}  trials={}  {:.0} ms{mode}\n",
            i + 1,
            r.check,
            r.max_residual, r.tolerance, r.trials, r.runtime_ms
        ));
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed}/{} checks passed\n", reports.len()));
    out
}
