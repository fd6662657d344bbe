//! Run configuration: parsing, default filling and validation.

use std::fs;
use std::path::Path;

use opphunt_core::{DeviationFamily, EngineError, GameParams, SimConfig, Strategy};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Version of every JSON document the CLI writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    /// CSV for `simulate`, text for `demo-zeno`, JSON for everything else.
    #[default]
    Auto,
    Csv,
    Json,
}

/// Everything a run depends on besides the command itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: GameParams,
    /// Player 1's strategy, then player 2's.
    pub strategies: [Strategy; 2],
    #[serde(default)]
    pub sim: SimConfig,
    /// Defaults to the standard family for `params.lambda`.
    #[serde(default)]
    pub family: Option<DeviationFamily>,
    /// Defaults to `1e-3·|v_finder|` (or `1e-9` when that is zero).
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub format: Format,
}

impl RunConfig {
    /// Parameters of the worked example: search is costly, finding pays 1.
    pub fn zeno_demo() -> Self {
        RunConfig {
            params: GameParams::new(0.1, 1.0, 0.1, 1.0, 0.0),
            strategies: [Strategy::zeno(), Strategy::Never],
            sim: SimConfig::default(),
            family: None,
            epsilon: None,
            format: Format::Auto,
        }
    }

    /// Parses `text` (JSON) without touching defaults or validating.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Parse {
                field: if path == "." { String::new() } else { path },
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        })
    }

    /// Fills optional fields with their defaults and checks every invariant.
    pub fn finalize(mut self) -> Result<Self, CliError> {
        self.params.validate().map_err(|e| field_error("params", e))?;
        self.sim.validate().map_err(|e| field_error("sim", e))?;
        for (i, s) in self.strategies.iter().enumerate() {
            s.validate().map_err(|e| CliError::Validation {
                field: format!("strategies[{i}]"),
                reason: e.to_string(),
            })?;
        }
        let family = self
            .family
            .take()
            .unwrap_or_else(|| DeviationFamily::default_for(self.params.lambda));
        family.validate().map_err(|e| CliError::Validation {
            field: "family".into(),
            reason: e.to_string(),
        })?;
        self.family = Some(family);
        let eps = self.epsilon.unwrap_or_else(|| default_epsilon(&self.params));
        if !(eps > 0.0) {
            return Err(CliError::Validation {
                field: "epsilon".into(),
                reason: format!("must be positive, got {eps}"),
            });
        }
        self.epsilon = Some(eps);
        Ok(self)
    }

    pub fn family(&self) -> DeviationFamily {
        self.family
            .clone()
            .unwrap_or_else(|| DeviationFamily::default_for(self.params.lambda))
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or_else(|| default_epsilon(&self.params))
    }

    /// Pretty JSON of the effective configuration.
    pub fn echo(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn default_epsilon(p: &GameParams) -> f64 {
    let e = 1e-3 * p.v_finder.abs();
    if e > 0.0 {
        e
    } else {
        1e-9
    }
}

fn field_error(section: &str, e: EngineError) -> CliError {
    match e {
        EngineError::InvalidConfig { field, reason } => CliError::Validation {
            field: format!("{section}.{field}"),
            reason,
        },
        other => CliError::Validation {
            field: section.into(),
            reason: other.to_string(),
        },
    }
}

/// Reads, parses, fills and validates the configuration at `path`.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::ConfigIo {
        path: path.display().to_string(),
        source,
    })?;
    RunConfig::parse(&text)?.finalize()
}
