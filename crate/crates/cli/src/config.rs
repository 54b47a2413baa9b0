use bandedge::floquet::OperatorKind;
use bandedge::graph::{graph_gamma, graph_lambda, square_lattice, square_lattice_pair, PeriodicGraph};
use clap::ValueEnum;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Library(#[from] bandedge::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Library(e) if e.is_input_error() => 2,
            CliError::Library(_) => 3,
        }
    }
}

pub fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpArg {
    Delta,
    Laplace,
}

impl From<OpArg> for OperatorKind {
    fn from(op: OpArg) -> Self {
        match op {
            OpArg::Delta => OperatorKind::Adjacency,
            OpArg::Laplace => OperatorKind::NormalizedLaplacian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    JsonLike,
}

/// Everything that determines a run's output. Embedded in every document
/// written, so outputs describe how they were made.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub graph: String,
    pub op: OpArg,
    pub resolution: usize,
    /// Not embedded: it does not affect any computed value.
    #[serde(skip)]
    pub out: PathBuf,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub g: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<(f64, f64)>,
}

/// `builtin:gamma`, `builtin:lambda`, `builtin:square`, `builtin:square-pair`,
/// or a path to a graph document.
pub fn load_graph(source: &str) -> Result<PeriodicGraph, CliError> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return match name {
            "gamma" => Ok(graph_gamma()),
            "lambda" => Ok(graph_lambda()),
            "square" => Ok(square_lattice()),
            "square-pair" => Ok(square_lattice_pair()),
            _ => Err(CliError::Config(format!(
                "unknown builtin graph {name:?} (expected gamma, lambda, square or square-pair)"
            ))),
        };
    }
    let path = Path::new(source);
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(PeriodicGraph::from_json(&text).map_err(bandedge::Error::from)?)
}
