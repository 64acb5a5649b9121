//! Experiment recipes, the invariant-suite runner and their CSV tables.

mod recipes;
mod table;
mod verify;

use std::fmt;
use std::str::FromStr;

pub use recipes::run_experiment;
pub use table::{config_hash, Cell, Table};
pub use verify::{run_verify, Status, Suite};

use crate::error::{Error, Result};
use crate::graph::format::{parse_graph_file, GraphFile};
use crate::graph::{standard_graph, Family, Graph, Validation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    EscapeRose,
    EscapeSeparating,
    ThinPart,
    Shortcut,
    Rank2Bounds,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::EscapeRose,
        Experiment::EscapeSeparating,
        Experiment::ThinPart,
        Experiment::Shortcut,
        Experiment::Rank2Bounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::EscapeRose => "escape-rose",
            Experiment::EscapeSeparating => "escape-separating",
            Experiment::ThinPart => "thin-part",
            Experiment::Shortcut => "shortcut",
            Experiment::Rank2Bounds => "rank2-bounds",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// Where the graph comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Family(Family),
    /// Contents of a graph file.
    File(String),
}

impl GraphSource {
    pub fn load(&self) -> Result<GraphFile> {
        match self {
            GraphSource::Family(f) => Ok(GraphFile { graph: standard_graph(f)?, lengths: None }),
            GraphSource::File(text) => parse_graph_file(text, Validation::Connected),
        }
    }

    fn canonical(&self) -> String {
        match self {
            GraphSource::Family(f) => f.to_string(),
            GraphSource::File(text) => format!("file:{}", config_hash(text)),
        }
    }
}

/// User-facing settings shared by the experiment and verify commands.
///
/// Unset fields take per-recipe defaults. The output path is not part of the
/// configuration hash.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentConfig {
    pub graph: Option<GraphSource>,
    pub lengths: Option<Vec<f64>>,
    pub seed: u64,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub r: Option<usize>,
    /// 1-based edge index, matching the edge ids `e1 … er`.
    pub i: Option<usize>,
    pub eps: Option<Vec<f64>>,
    pub delta: Option<Vec<f64>>,
    pub tmax: Option<f64>,
    pub lift: Option<f64>,
    pub from: Option<Vec<f64>>,
    pub to: Option<Vec<f64>>,
}

/// Builder for the canonical `key=value` text that is hashed into every CSV.
#[derive(Debug, Clone)]
pub(crate) struct Canonical(String);

impl Canonical {
    pub(crate) fn new(command: &str) -> Self {
        Canonical(format!("command={command}\n"))
    }

    pub(crate) fn field(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.0.push_str(&format!("{key}={value}\n"));
        self
    }

    /// `{:?}` prints the shortest string that round-trips.
    pub(crate) fn num(self, key: &str, x: f64) -> Self {
        self.field(key, format!("{x:?}"))
    }

    pub(crate) fn nums(self, key: &str, xs: &[f64]) -> Self {
        let s: Vec<String> = xs.iter().map(|x| format!("{x:?}")).collect();
        self.field(key, s.join(","))
    }

    pub(crate) fn graph(self, g: &GraphSource) -> Self {
        let c = g.canonical();
        self.field("graph", c)
    }

    pub(crate) fn hash(&self) -> String {
        config_hash(&self.0)
    }
}

/// Parses a number, or a difference `a-b` such as `1-1e-8`.
pub fn parse_tmax(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Config(format!("bad number `{s}`"));
    if let Ok(x) = s.parse::<f64>() {
        return Ok(x);
    }
    let bytes = s.as_bytes();
    let k = (1..bytes.len()).find(|&k| bytes[k] == b'-' && !matches!(bytes[k - 1], b'e' | b'E')).ok_or_else(bad)?;
    let a = s[..k].trim().parse::<f64>().map_err(|_| bad())?;
    let b = s[k + 1..].trim().parse::<f64>().map_err(|_| bad())?;
    Ok(a - b)
}

/// Parses a comma-separated list of finite numbers.
pub fn parse_number_list(s: &str) -> Result<Vec<f64>> {
    let xs = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Config(format!("bad number `{}` in `{s}`", t.trim())))
        })
        .collect::<Result<Vec<f64>>>()?;
    if xs.is_empty() {
        return Err(Error::Config("empty list".into()));
    }
    Ok(xs)
}

pub(crate) fn load_graph(cfg: &ExperimentConfig) -> Result<Option<(Graph, String)>> {
    match &cfg.graph {
        None => Ok(None),
        Some(src) => {
            let g = src.load()?.graph;
            let name = match src {
                GraphSource::Family(f) => f.to_string(),
                GraphSource::File(_) => g.name().to_owned(),
            };
            Ok(Some((g, name)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tmax_forms() {
        assert_eq!(parse_tmax("0.5").unwrap(), 0.5);
        assert_eq!(parse_tmax("1-1e-8").unwrap(), 1.0 - 1e-8);
        assert_eq!(parse_tmax("1e-3").unwrap(), 1e-3);
        assert_eq!(parse_tmax("2 - 0.5").unwrap(), 1.5);
        assert!(parse_tmax("1-").is_err());
        assert!(parse_tmax("-").is_err());
    }

    #[test]
    fn number_lists() {
        assert_eq!(parse_number_list("0.25, 0.125").unwrap(), vec![0.25, 0.125]);
        assert!(parse_number_list("0.1,,0.2").is_err());
        assert!(parse_number_list("nan").is_err());
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("escape".parse::<Experiment>().is_err());
    }

    #[test]
    fn canonical_text_is_stable() {
        let a = Canonical::new("x").num("t", 0.1).nums("d", &[1.0, 1e-3]);
        assert_eq!(a.0, "command=x\nt=0.1\nd=1.0,0.001\n");
        assert_eq!(a.hash(), Canonical::new("x").num("t", 0.1).nums("d", &[1.0, 1e-3]).hash());
    }
}
