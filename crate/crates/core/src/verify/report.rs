use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::par::Exec;

/// At most this many failing trials are copied into `witnesses`.
const MAX_FAILURE_WITNESSES: usize = 8;

/// Outcome of one verification experiment.
///
/// `passed` holds exactly when no hard error occurred and
/// `max_residual <= tolerance`, or, for checks that demonstrate a
/// documented failure (`expect_violation`), `max_residual > tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub seed: u64,
    pub trials: usize,
    #[serde(with = "finite_or_null")]
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub expect_violation: bool,
    pub witnesses: Vec<Value>,
    pub runtime_ms: f64,
}

/// Trial count, seed, tolerance override and execution mode shared by every
/// check. `expect_violation` flips the verdict: the check then passes only
/// when the residual exceeds the tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub trials: usize,
    pub seed: u64,
    pub tolerance: Option<f64>,
    pub exec: Exec,
    pub expect_violation: bool,
}

impl CheckOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            tolerance: None,
            exec: Exec::default(),
            expect_violation: false,
        }
    }

    pub fn expecting_violation(mut self) -> Self {
        self.expect_violation = true;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = Some(tolerance);
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub(crate) fn tolerance_or(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self::new(100, crate::verify::DEFAULT_SEED)
    }
}

pub(crate) struct TrialOutcome {
    pub residual: f64,
    pub detail: Value,
    pub error: Option<String>,
}

impl TrialOutcome {
    pub fn ok(residual: f64, detail: Value) -> Self {
        Self {
            residual,
            detail,
            error: None,
        }
    }

    pub fn failed(error: &Error, detail: Value) -> Self {
        Self {
            residual: f64::INFINITY,
            detail,
            error: Some(error.to_string()),
        }
    }

    pub fn from_result(result: crate::Result<(f64, Value)>) -> Self {
        match result {
            Ok((residual, detail)) => Self::ok(residual, detail),
            Err(e) => Self::failed(&e, Value::Null),
        }
    }
}

pub(crate) struct ReportBuilder {
    name: String,
    seed: u64,
    tolerance: f64,
    expect_violation: bool,
    started: Instant,
    summary: Vec<Value>,
}

impl ReportBuilder {
    pub fn start(name: &str, opts: &CheckOptions, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            seed: opts.seed,
            tolerance,
            expect_violation: opts.expect_violation,
            started: Instant::now(),
            summary: Vec::new(),
        }
    }

    pub fn expect_violation(mut self, yes: bool) -> Self {
        self.expect_violation = yes;
        self
    }

    pub fn summary(&mut self, value: Value) {
        self.summary.push(value);
    }

    /// Report that fails before any trial ran.
    pub fn hard_failure(self, residual: f64, reason: String) -> CheckReport {
        let witnesses = vec![json!({ "error": reason })];
        CheckReport {
            check: self.name,
            seed: self.seed,
            trials: 0,
            max_residual: residual,
            tolerance: self.tolerance,
            passed: false,
            expect_violation: self.expect_violation,
            witnesses,
            runtime_ms: elapsed_ms(self.started),
        }
    }

    pub fn finish(self, outcomes: Vec<TrialOutcome>) -> CheckReport {
        let trials = outcomes.len();
        let mut max_residual = 0.0_f64;
        let mut argmax = None;
        for (i, o) in outcomes.iter().enumerate() {
            let r = if o.residual.is_nan() {
                f64::INFINITY
            } else {
                o.residual
            };
            if argmax.is_none() || r > max_residual {
                max_residual = r;
                argmax = Some(i);
            }
        }
        let hard_errors = outcomes.iter().filter(|o| o.error.is_some()).count();
        let within = max_residual <= self.tolerance;
        let passed = hard_errors == 0 && trials > 0 && (within != self.expect_violation);

        let mut witnesses = self.summary;
        let mut included = Vec::new();
        for (i, o) in outcomes.iter().enumerate() {
            if included.len() >= MAX_FAILURE_WITNESSES {
                break;
            }
            let bad = o.error.is_some() || (!self.expect_violation && o.residual > self.tolerance);
            if bad {
                included.push(i);
            }
        }
        if let Some(i) = argmax {
            if !included.contains(&i) {
                included.push(i);
            }
        }
        for i in included {
            let o = &outcomes[i];
            let mut w = json!({ "trial": i, "residual": finite_or_null::to_value(o.residual) });
            if let Some(e) = &o.error {
                w["error"] = json!(e);
            }
            if !o.detail.is_null() {
                w["detail"] = o.detail.clone();
            }
            witnesses.push(w);
        }
        if !passed && witnesses.is_empty() {
            witnesses.push(json!({ "error": "no trials were run" }));
        }

        CheckReport {
            check: self.name,
            seed: self.seed,
            trials,
            max_residual,
            tolerance: self.tolerance,
            passed,
            expect_violation: self.expect_violation,
            witnesses,
            runtime_ms: elapsed_ms(self.started),
        }
    }
}

fn elapsed_ms(started: Instant) -> f64 {
    started.elapsed().as_secs_f64() * 1e3
}

/// Non-finite residuals serialize as `null` and read back as infinity.
pub(crate) mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};
    use serde_json::Value;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }

    pub fn to_value(v: f64) -> Value {
        if v.is_finite() {
            Value::from(v)
        } else {
            Value::Null
        }
    }
}
