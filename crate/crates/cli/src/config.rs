use std::path::PathBuf;

use ncauto_core::domains::DomainSpec;
use ncauto_core::maps::{MobiusParams, NcMapExpr};
use ncauto_core::verify::{RigidityConfig, RigidityExpectation, DEFAULT_SEED};
use ncauto_core::ComplexMatrix;
use serde::{Deserialize, Serialize};

/// A batch of checks plus seed, output and worker settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub suite: Vec<CheckDescriptor>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
    /// Worker threads; `None` lets the pool pick.
    #[serde(default)]
    pub parallelism: Option<usize>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            suite: Vec::new(),
            seed: DEFAULT_SEED,
            output: OutputSpec::default(),
            parallelism: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }
}

/// One entry of a suite: `{"check": "<name>", "params": {...}, ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckDescriptor {
    #[serde(flatten)]
    pub check: Check,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// The check demonstrates a known failure and passes when it finds one.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub expect_violation: bool,
}

impl CheckDescriptor {
    pub fn new(check: Check) -> Self {
        Self {
            check,
            trials: None,
            tolerance: None,
            expect_violation: false,
        }
    }

    pub fn trials(mut self, trials: usize) -> Self {
        self.trials = Some(trials);
        self
    }

    pub fn expecting_violation(mut self) -> Self {
        self.expect_violation = true;
        self
    }
}

/// The checks a suite can run; names match the verification operations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "check",
    content = "params",
    rename_all = "snake_case",
    deny_unknown_fields
)]
pub enum Check {
    NcAxioms {
        map: NcMapExpr,
        domain: DomainSpec,
        levels: Vec<usize>,
    },
    NcClosure {
        domain: DomainSpec,
        levels: Vec<usize>,
    },
    KernelIdentity {
        #[serde(default)]
        a: Option<ComplexMatrix>,
        p: usize,
        q: usize,
        levels: Vec<usize>,
    },
    InverseLaw {
        map: NcMapExpr,
        domain: DomainSpec,
        levels: Vec<usize>,
    },
    RangePreservation {
        map: NcMapExpr,
        domain: DomainSpec,
        levels: Vec<usize>,
    },
    VonNeumann {
        mobius: MobiusParams,
        level: usize,
    },
    CbTranspose {
        p: usize,
        level: usize,
    },
    Rigidity {
        map: NcMapExpr,
        domain: DomainSpec,
        #[serde(default)]
        config: RigidityConfig,
        expectation: RigidityExpectation,
    },
    DerivativeSimilarityInvariance {
        map: NcMapExpr,
        domain: DomainSpec,
        level: usize,
    },
    LinearStructure {
        map: NcMapExpr,
        domain: DomainSpec,
        #[serde(default = "one")]
        base_level: usize,
        probe_levels: Vec<usize>,
    },
    DerivativeClosedForm {
        #[serde(default)]
        a: Option<ComplexMatrix>,
        p: usize,
        q: usize,
        levels: Vec<usize>,
    },
    SpectralDisk {
        domain: DomainSpec,
        levels: Vec<usize>,
    },
    LevelRestriction {
        p: usize,
        q: usize,
        generators: Vec<usize>,
        levels: Vec<usize>,
    },
}

fn one() -> usize {
    1
}

impl Check {
    /// Trials used when the descriptor does not set them.
    pub fn default_trials(&self) -> usize {
        match self {
            Check::CbTranspose { .. } => 1000,
            Check::DerivativeClosedForm { .. } => 50,
            Check::Rigidity { .. } => 20,
            _ => 100,
        }
    }
}

/// Config parse failure with the JSON path of the offending field.
#[derive(Debug)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "invalid config: {}", self.message)
        } else {
            write!(f, "invalid config at `{}`: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parse and validate a suite config.
pub fn parse_config(text: &str) -> Result<SuiteConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: SuiteConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    validate(&config)?;
    Ok(config)
}

fn validate(config: &SuiteConfig) -> Result<(), ConfigError> {
    if config.parallelism == Some(0) {
        return Err(ConfigError {
            path: "parallelism".into(),
            message: "must be at least 1".into(),
        });
    }
    for (i, d) in config.suite.iter().enumerate() {
        let invalid = |field: &str, message: String| ConfigError {
            path: format!("suite[{i}].{field}"),
            message,
        };
        if d.trials == Some(0) {
            return Err(invalid("trials", "must be at least 1".into()));
        }
        if let Some(t) = d.tolerance {
            if !(t >= 0.0) {
                return Err(invalid(
                    "tolerance",
                    format!("must be a non-negative number, got {t}"),
                ));
            }
        }
        let (map, domain) = match &d.check {
            Check::NcAxioms { map, domain, .. }
            | Check::InverseLaw { map, domain, .. }
            | Check::RangePreservation { map, domain, .. }
            | Check::Rigidity { map, domain, .. }
            | Check::DerivativeSimilarityInvariance { map, domain, .. }
            | Check::LinearStructure { map, domain, .. } => (Some(map), Some(domain)),
            Check::NcClosure { domain, .. } | Check::SpectralDisk { domain, .. } => {
                (None, Some(domain))
            }
            _ => (None, None),
        };
        if let Some(domain) = domain {
            domain
                .validate()
                .map_err(|e| invalid("params.domain", e.to_string()))?;
        }
        if let Some(map) = map {
            map.validate()
                .map_err(|e| invalid("params.map", e.to_string()))?;
        }
    }
    Ok(())
}
