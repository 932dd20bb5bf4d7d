//! Named, seeded experiments with strict JSON configuration, CSV artifacts
//! and a JSON summary.

mod runs;
mod schema;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub use runs::{
    random_grad_case, BpSweepParams, Cor2Params, DepthRule, GradCheckParams, KernelDlpParams,
    SimilarityParams, TildeUParams,
};
pub use schema::{validate_csv, CsvKind};

/// A registry row: experiment name, description and the result it reproduces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExperimentInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub anchor: &'static str,
}

pub const REGISTRY: [ExperimentInfo; 7] = [
    ExperimentInfo {
        name: "tilde_u_check",
        description: "adder gadget telescoping on random data unitaries",
        anchor: "Corollary 2",
    },
    ExperimentInfo {
        name: "cor2_train",
        description: "gradient training of the layered model on a planted task",
        anchor: "Corollary 2",
    },
    ExperimentInfo {
        name: "bp_sweep",
        description: "variance of brickwork outputs across register widths",
        anchor: "Definition 2",
    },
    ExperimentInfo {
        name: "vanishing_similarity",
        description: "variance of discrete-log kernel values over random pairs",
        anchor: "Appendix C",
    },
    ExperimentInfo {
        name: "kernel_dlp",
        description: "ridge kernel classifier on the discrete-log task with a linear baseline",
        anchor: "Appendix B",
    },
    ExperimentInfo {
        name: "prop1_lcu",
        description: "kernel model compiled to an ancilla circuit and a brickwork family",
        anchor: "Proposition 1",
    },
    ExperimentInfo {
        name: "grad_check",
        description: "parameter-shift against central differences on random models",
        anchor: "Algorithm 1",
    },
];

pub fn list_experiments() -> &'static [ExperimentInfo] {
    &REGISTRY
}

/// One `name → anchor  description` row per experiment.
pub fn list_table() -> String {
    REGISTRY
        .iter()
        .map(|e| format!("{} → {:<16}{}\n", e.name, e.anchor, e.description))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        ExperimentConfig {
            experiment: experiment.to_string(),
            parameters: Map::new(),
            seed: 0,
            out_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("config: {e}")))
    }

    /// Applies `key=value`. `seed`, `experiment` and `out_dir` address the
    /// top level; any other key is a dotted path into `parameters`. Values
    /// parse as JSON, falling back to a plain string.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Validation(format!("override {assignment:?} is not key=value")))?;
        let key = key.trim();
        let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        match key {
            "seed" => {
                self.seed = value
                    .as_u64()
                    .ok_or_else(|| Error::Validation(format!("seed {raw:?} is not an unsigned integer")))?
            }
            "experiment" => self.experiment = raw.to_string(),
            "out_dir" => self.out_dir = Some(PathBuf::from(raw)),
            _ => {
                let path: Vec<&str> = key.strip_prefix("parameters.").unwrap_or(key).split('.').collect();
                if path.iter().any(|p| p.is_empty()) {
                    return Err(Error::Validation(format!("empty path segment in {key:?}")));
                }
                let mut node = &mut self.parameters;
                for seg in &path[..path.len() - 1] {
                    let entry = node
                        .entry(seg.to_string())
                        .or_insert_with(|| Value::Object(Map::new()));
                    node = entry
                        .as_object_mut()
                        .ok_or_else(|| Error::Validation(format!("{seg:?} in {key:?} is not an object")))?;
                }
                node.insert(path[path.len() - 1].to_string(), value);
            }
        }
        Ok(())
    }
}

/// In-memory result of an experiment: the resolved parameters, headline
/// metrics and named CSV or JSON artifacts.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub resolved: Value,
    pub metrics: Value,
    pub artifacts: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub experiment: String,
    pub seed: u64,
    pub resolved_config: Value,
    pub metrics: Value,
    pub seconds: f64,
    pub files: Vec<String>,
}

pub(crate) fn parse_params<P: serde::de::DeserializeOwned>(cfg: &ExperimentConfig) -> Result<P> {
    serde_json::from_value(Value::Object(cfg.parameters.clone()))
        .map_err(|e| Error::Validation(format!("{} parameters: {e}", cfg.experiment)))
}

/// Runs the named experiment without touching the filesystem.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.experiment.as_str() {
        "tilde_u_check" => runs::tilde_u_check(cfg),
        "cor2_train" => runs::cor2_train(cfg),
        "bp_sweep" => runs::bp_sweep(cfg),
        "vanishing_similarity" => runs::vanishing_similarity(cfg),
        "kernel_dlp" => runs::kernel_dlp(cfg),
        "prop1_lcu" => runs::prop1_lcu(cfg),
        "grad_check" => runs::grad_check(cfg),
        other => Err(Error::Validation(format!("unknown experiment {other:?}"))),
    }
}

fn write_artifacts(dir: &Path, artifacts: &[(String, String)]) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for (name, contents) in artifacts {
        std::fs::write(dir.join(name), contents)?;
        files.push(name.clone());
    }
    Ok(files)
}

/// Runs the experiment and writes its artifacts plus `summary.json` into
/// `out_dir`. A numerical abort during training still writes the partial
/// trace before the error is returned.
pub fn run_to_dir(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentSummary> {
    let start = Instant::now();
    let output = match run_experiment(cfg) {
        Ok(o) => o,
        Err(e) => {
            if let Error::NumericalAbort { trace: Some(t), .. } = &e {
                write_artifacts(out_dir, &[("trace.csv".to_string(), t.to_csv())])?;
            }
            return Err(e);
        }
    };
    let mut files = write_artifacts(out_dir, &output.artifacts)?;
    files.insert(0, "summary.json".to_string());
    let summary = ExperimentSummary {
        experiment: cfg.experiment.clone(),
        seed: cfg.seed,
        resolved_config: output.resolved,
        metrics: output.metrics,
        seconds: start.elapsed().as_secs_f64(),
        files,
    };
    std::fs::write(out_dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(summary)
}

/// Exit status for an error: 3 for numerical failures, 2 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

/// `error kind=<kind> message=<text>` on one line.
pub fn error_line(err: &Error) -> String {
    let msg = err.to_string().replace(['\n', '\r'], " ");
    format!("error kind={} message={msg}", err.kind())
}
