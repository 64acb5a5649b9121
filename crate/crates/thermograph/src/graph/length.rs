use super::Graph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthMode {
    /// Every value finite and positive.
    Strict,
    /// Values in `[0, ∞]`.
    Extended,
}

/// Edge lengths stored once per undirected edge.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthFunction {
    values: Vec<f64>,
    mode: LengthMode,
}

impl LengthFunction {
    pub fn strict(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidLength(format!("strict lengths must be finite and positive, got {v}")));
        }
        Ok(LengthFunction { values, mode: LengthMode::Strict })
    }

    pub fn extended(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| v.is_nan() || **v < 0.0) {
            return Err(Error::InvalidLength(format!("extended lengths must lie in [0, inf], got {v}")));
        }
        Ok(LengthFunction { values, mode: LengthMode::Extended })
    }

    /// The constant function `c` on every edge of `graph`.
    pub fn constant(graph: &Graph, c: f64) -> Result<Self> {
        Self::strict(vec![c; graph.num_edges()])
    }

    pub fn check_graph(&self, graph: &Graph) -> Result<()> {
        if self.values.len() != graph.num_edges() {
            return Err(Error::InvalidLength(format!(
                "{} lengths given for a graph with {} edges",
                self.values.len(),
                graph.num_edges()
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mode(&self) -> LengthMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Length of directed edge `d`.
    pub fn directed(&self, d: usize) -> f64 {
        self.values[d / 2]
    }

    /// `u_e = exp(-ℓ_e)` per undirected edge, with `∞ ↦ 0`.
    pub fn u(&self) -> Vec<f64> {
        self.values.iter().map(|&l| (-l).exp()).collect()
    }

    /// Indices of edges with finite positive length.
    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&k| self.values[k].is_finite() && self.values[k] > 0.0).collect()
    }

    pub fn volume(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Length of an edge path given as directed edges; `∞` absorbs.
    pub fn path_length(&self, path: &[usize]) -> f64 {
        path.iter().map(|&d| self.directed(d)).sum()
    }

    pub fn scaled(&self, a: f64) -> Result<Self> {
        let values = self.values.iter().map(|v| a * v).collect();
        match self.mode {
            LengthMode::Strict => Self::strict(values),
            LengthMode::Extended => Self::extended(values),
        }
    }
}
