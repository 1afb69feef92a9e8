//! Experiment configuration files. Every file is a JSON object with an
//! optional `"command"` field naming the subcommand it belongs to; all other
//! fields are command specific and unknown fields are rejected.

use std::path::{Path, PathBuf};

use qnoise_core::analysis::{check_grid, ChiSource, SplitSpec};
use qnoise_core::channel::Representation;
use qnoise_core::gate_sim::GateName;
use qnoise_core::noise::NoiseSpec;
use qnoise_core::ComplexMatrix;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, Result};

/// Reads `path`, checks its `command` field against `command` and parses the
/// remaining fields.
pub fn load<T: DeserializeOwned>(path: &Path, command: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text, command).map_err(|e| match e {
        CliError::Json { source, .. } => CliError::Json {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

pub fn parse<T: DeserializeOwned>(text: &str, command: &str) -> Result<T> {
    let json_err = |source| CliError::Json {
        path: PathBuf::new(),
        source,
    };
    let mut value: serde_json::Value = serde_json::from_str(text).map_err(json_err)?;
    let object = value
        .as_object_mut()
        .ok_or_else(|| CliError::Config("configuration must be a JSON object".into()))?;
    match object.remove("command") {
        None => {}
        Some(serde_json::Value::String(c)) if c == command => {}
        Some(other) => {
            return Err(CliError::Config(format!(
                "config is for command {other}, not {command:?}"
            )))
        }
    }
    serde_json::from_value(value).map_err(json_err)
}

/// A parameter grid: explicit points or `count` evenly spaced points from
/// `start` to `stop` inclusive.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Points(Vec<f64>),
    Range(Range),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let points = match self {
            Grid::Points(p) => p.clone(),
            Grid::Range(r) => match r.count {
                0 => Vec::new(),
                1 => vec![r.start],
                n => (0..n)
                    .map(|k| {
                        if k == n - 1 {
                            r.stop
                        } else {
                            r.start + (r.stop - r.start) * k as f64 / (n - 1) as f64
                        }
                    })
                    .collect(),
            },
        };
        check_grid(&points)?;
        Ok(points)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvertConfig {
    /// Channel file, relative to the config file.
    pub input: PathBuf,
    pub to: Representation,
    /// Output file name inside the output directory.
    #[serde(default)]
    pub output: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Dephasing,
    PhaseFlip,
    Amplitude,
    Depolarizing,
    Relaxation,
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::Dephasing => "dephasing",
            Family::PhaseFlip => "phase_flip",
            Family::Amplitude => "amplitude",
            Family::Depolarizing => "depolarizing",
            Family::Relaxation => "relaxation",
        }
    }

    /// Name of the swept parameter.
    pub fn parameter(&self) -> &'static str {
        match self {
            Family::Dephasing | Family::Amplitude => "gamma",
            Family::PhaseFlip | Family::Depolarizing => "p",
            Family::Relaxation => "t",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Fidelity,
    Negativity,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSweepConfig {
    pub family: Family,
    pub grid: Grid,
    /// Hilbert space dimensions, depolarizing only.
    #[serde(default)]
    pub dims: Option<Vec<usize>>,
    /// Number of qubits the noise acts on independently; other families.
    #[serde(default)]
    pub carriers: Option<Vec<usize>>,
    #[serde(rename = "T1", default)]
    pub t1: Option<f64>,
    #[serde(rename = "T2", default)]
    pub t2: Option<f64>,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::Fidelity, Metric::Negativity]
}

impl NoiseSweepConfig {
    pub fn validate(&self) -> Result<()> {
        let relaxation = self.family == Family::Relaxation;
        if relaxation != (self.t1.is_some() && self.t2.is_some())
            || (!relaxation && (self.t1.is_some() || self.t2.is_some()))
        {
            return Err(CliError::Config(
                "T1 and T2 are required for relaxation sweeps and only allowed there".into(),
            ));
        }
        if self.family == Family::Depolarizing {
            if self.carriers.is_some() {
                return Err(CliError::Config("depolarizing sweeps take dims, not carriers".into()));
            }
        } else if self.dims.is_some() {
            return Err(CliError::Config(format!(
                "{} sweeps take carriers, not dims",
                self.family.label()
            )));
        }
        if self.metrics.is_empty() {
            return Err(CliError::Config("no metrics requested".into()));
        }
        if let Some(c) = &self.carriers {
            if c.is_empty() || c.iter().any(|&n| n == 0 || n > 3) {
                return Err(CliError::Config("carriers must be between 1 and 3".into()));
            }
        }
        if let Some(d) = &self.dims {
            if d.is_empty() || d.iter().any(|s| !(2..=10).contains(s)) {
                return Err(CliError::Config("dims must lie in 2..=10".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EccConfig {
    pub grid: Grid,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSimConfig {
    pub gate: GateName,
    #[serde(default = "default_t_oper")]
    pub t_oper: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    /// Relaxation or depolarizing noise; absent means noiseless.
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub sample_times: Option<Grid>,
    /// Generator of a custom gate.
    #[serde(default)]
    pub hamiltonian: Option<ComplexMatrix>,
    /// Carrier dimensions of a custom gate.
    #[serde(default)]
    pub sys_dims: Option<Vec<usize>>,
}

fn default_t_oper() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gate: GateName,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NegativityConfig {
    #[serde(default = "default_t_oper")]
    pub t_oper: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    pub sample_times: Grid,
    #[serde(default = "default_splits")]
    pub splits: Vec<SplitSpec>,
    #[serde(default = "default_sources")]
    pub sources: Vec<ChiSource>,
    pub runs: Vec<RunConfig>,
}

fn default_splits() -> Vec<SplitSpec> {
    vec![SplitSpec::AncillaVsPhysical, SplitSpec::ChannelVsChannel]
}

fn default_sources() -> Vec<ChiSource> {
    vec![ChiSource::Chi]
}

impl NegativityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs.is_empty() {
            return Err(CliError::Config("no runs".into()));
        }
        if self.splits.is_empty() || self.sources.is_empty() {
            return Err(CliError::Config("splits and sources must not be empty".into()));
        }
        if self.runs.iter().any(|r| r.gate == GateName::Custom) {
            return Err(CliError::Config(
                "negativity runs use built-in gates; simulate custom gates with gate-sim".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_field_is_checked_and_stripped() {
        let cfg: EccConfig = parse(r#"{"command":"ecc","grid":[0,0.5]}"#, "ecc").unwrap();
        assert_eq!(cfg.grid.points().unwrap(), vec![0.0, 0.5]);
        assert!(parse::<EccConfig>(r#"{"command":"convert","grid":[0]}"#, "ecc").is_err());
        assert!(parse::<EccConfig>(r#"{"grid":[0],"extra":1}"#, "ecc").is_err());
    }

    #[test]
    fn ranges_hit_both_ends() {
        let g = Grid::Range(Range {
            start: 0.0,
            stop: 1.0,
            count: 11,
        });
        let p = g.points().unwrap();
        assert_eq!(p.len(), 11);
        assert_eq!(p[10], 1.0);
        assert!((p[3] - 0.3).abs() < 1e-15);
        assert!(Grid::Points(vec![]).points().is_err());
        assert!(Grid::Points(vec![0.2, 0.1]).points().is_err());
    }
}
