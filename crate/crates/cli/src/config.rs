use std::collections::BTreeMap;

use autobid_core::AllocationRule;
use clap::ValueEnum;
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismKind {
    SecondPrice,
    Rand,
    UniformTopCluster,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MechanismSpec {
    pub kind: MechanismKind,
    pub alpha: Option<f64>,
    pub p: Option<f64>,
    pub reserve: Option<f64>,
}

impl MechanismSpec {
    pub fn build(&self) -> Result<AllocationRule> {
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| CliError::Usage(format!("{:?} needs --{flag}", self.kind)))
        };
        let rule = match self.kind {
            MechanismKind::SecondPrice => match self.reserve {
                Some(r) => AllocationRule::second_price_with_reserve(r)?,
                None => AllocationRule::second_price(),
            },
            MechanismKind::Rand => AllocationRule::rand(need(self.alpha, "alpha")?, need(self.p, "p")?)?,
            MechanismKind::UniformTopCluster => {
                AllocationRule::uniform_top_cluster(need(self.alpha, "alpha")?, need(self.p, "p")?)?
            }
        };
        Ok(rule)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InstanceSource {
    None,
    File { path: String },
    Builder { name: String, params: BTreeMap<String, f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

/// Everything that determines a run's output, echoed into JSON results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub mechanism: Option<MechanismSpec>,
    pub source: InstanceSource,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub seed: Option<u64>,
    pub output: Option<String>,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn new(command: &str, format: Format, output: Option<String>) -> Self {
        ExperimentConfig {
            command: command.to_string(),
            mechanism: None,
            source: InstanceSource::None,
            delta: None,
            gamma: None,
            seed: None,
            output,
            format,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("delta", self.delta), ("gamma", self.gamma)] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(CliError::Usage(format!("--{name} must be a nonnegative number, got {v}")));
                }
            }
        }
        Ok(())
    }
}

pub fn builder(name: &str, params: &[(&str, f64)]) -> InstanceSource {
    InstanceSource::Builder {
        name: name.to_string(),
        params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
    }
}
