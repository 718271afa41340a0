use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use condtest_core::edgelist::parse_edgelist;
use condtest_core::generate::{generate, GraphKind};
use condtest_core::protocols::TesterConfig;
use condtest_core::Graph;
use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// Where an experiment's graph comes from: a generator spec such as
/// `barbell:8`, or a path to an edge-list file.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Generator(GraphKind),
    File(PathBuf),
}

impl GraphSource {
    /// Generator specs win; anything else is taken as a file path, which
    /// must exist.
    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        if let Ok(kind) = s.parse::<GraphKind>() {
            return Ok(GraphSource::Generator(kind));
        }
        let path = PathBuf::from(s);
        if path.is_file() {
            Ok(GraphSource::File(path))
        } else {
            Err(HarnessError::Spec(format!("`{s}` is neither a generator spec nor an existing file")))
        }
    }

    pub fn load(&self, seed: u64) -> Result<Graph, HarnessError> {
        match self {
            GraphSource::Generator(kind) => Ok(generate(kind, seed)?),
            GraphSource::File(path) => {
                let text = fs::read_to_string(path).map_err(|e| HarnessError::Io { path: path.clone(), source: e })?;
                Ok(parse_edgelist(&text)?)
            }
        }
    }
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::Generator(kind) => write!(f, "{kind}"),
            GraphSource::File(path) => write!(f, "{}", path.display()),
        }
    }
}

/// One experiment: a graph, a tester configuration and a repetition count.
/// Repetition `i` runs the tester with seed `seed + i` on the same graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub graph: String,
    /// Seed for random graph generators.
    #[serde(default)]
    pub graph_seed: u64,
    #[serde(default = "one")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tester: TesterConfig,
}

fn one() -> usize {
    1
}

impl ExperimentSpec {
    pub fn new(graph: impl Into<String>, tester: TesterConfig) -> Self {
        ExperimentSpec { graph: graph.into(), graph_seed: 0, reps: 1, seed: 0, out: None, tester }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| HarnessError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::Io { path: path.to_path_buf(), source: e })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.reps == 0 {
            return Err(HarnessError::Spec("reps must be at least 1".into()));
        }
        self.source()?;
        self.tester.validate()?;
        Ok(())
    }

    pub fn source(&self) -> Result<GraphSource, HarnessError> {
        GraphSource::parse(&self.graph)
    }

    /// Sets one tester field from its textual value, e.g. `("phi", "0.3")`.
    pub fn set_tester_field(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let mut table = toml::Table::try_from(&self.tester).expect("config serializes");
        let parsed: toml::Value = format!("v = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        table.insert(key.to_string(), parsed);
        self.tester = table.try_into().map_err(|e: toml::de::Error| HarnessError::Spec(e.to_string()))?;
        Ok(())
    }
}
