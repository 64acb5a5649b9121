//! Serre graphs, length functions, standard families and forest collapses.
//!
//! Directed edges are numbered so that the positive edge `e_k` has index
//! `2k` and its reverse `ē_k` has index `2k + 1`; the involution is `d ^ 1`.

mod collapse;
mod families;
pub mod format;
mod length;

pub use collapse::{collapse, pullback_length, CollapseMap, EdgeImage};
pub use families::{parse_family, standard_graph, Family};
pub use length::{LengthFunction, LengthMode};

use crate::error::{Error, Result};

/// Validation level applied by [`build_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validation {
    /// Connected, every valence at least 3, Euler characteristic negative.
    Strict,
    /// Connected only.
    Connected,
    /// Structural checks only; used for subgraphs and stratum pieces.
    Relaxed,
}

/// Vertex and undirected-edge description consumed by [`build_graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSpec {
    pub name: String,
    pub vertices: Vec<String>,
    /// `(edge id, origin id, terminus id)`, one entry per undirected edge.
    pub edges: Vec<(String, String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    name: String,
    vertex_ids: Vec<String>,
    edge_ids: Vec<String>,
    ends: Vec<(usize, usize)>,
}

pub fn build_graph(spec: &GraphSpec, validation: Validation) -> Result<Graph> {
    let mut vertex_ids: Vec<String> = Vec::with_capacity(spec.vertices.len());
    for v in &spec.vertices {
        if vertex_ids.contains(v) {
            return Err(Error::InvalidGraph(format!("duplicate vertex id `{v}`")));
        }
        vertex_ids.push(v.clone());
    }
    let lookup = |id: &str| -> Result<usize> {
        vertex_ids.iter().position(|v| v == id).ok_or_else(|| Error::InvalidGraph(format!("unknown vertex `{id}`")))
    };
    let mut edge_ids: Vec<String> = Vec::with_capacity(spec.edges.len());
    let mut ends = Vec::with_capacity(spec.edges.len());
    for (id, o, t) in &spec.edges {
        if edge_ids.contains(id) {
            return Err(Error::InvalidGraph(format!("duplicate edge id `{id}`")));
        }
        edge_ids.push(id.clone());
        ends.push((lookup(o)?, lookup(t)?));
    }
    let g = Graph { name: spec.name.clone(), vertex_ids, edge_ids, ends };
    g.validate(validation)?;
    Ok(g)
}

impl Graph {
    pub(crate) fn from_parts(
        name: String,
        vertex_ids: Vec<String>,
        edge_ids: Vec<String>,
        ends: Vec<(usize, usize)>,
    ) -> Self {
        Graph { name, vertex_ids, edge_ids, ends }
    }

    pub fn validate(&self, validation: Validation) -> Result<()> {
        if self.vertex_ids.is_empty() {
            return Err(Error::InvalidGraph("no vertices".into()));
        }
        if 2 * self.edge_ids.len() > crate::MAX_DIRECTED_EDGES {
            return Err(Error::InvalidGraph(format!(
                "{} directed edges exceed the supported maximum of {}",
                2 * self.edge_ids.len(),
                crate::MAX_DIRECTED_EDGES
            )));
        }
        if validation == Validation::Relaxed {
            return Ok(());
        }
        if !self.is_connected() {
            return Err(Error::InvalidGraph(format!("`{}` is not connected", self.name)));
        }
        if validation == Validation::Strict {
            for v in 0..self.num_vertices() {
                if self.valence(v) < 3 {
                    return Err(Error::InvalidGraph(format!(
                        "vertex `{}` has valence {}",
                        self.vertex_ids[v],
                        self.valence(v)
                    )));
                }
            }
            if self.euler_characteristic() >= 0 {
                return Err(Error::InvalidGraph(format!(
                    "Euler characteristic {} is not negative",
                    self.euler_characteristic()
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertex_ids
    }

    pub fn edge_ids(&self) -> &[String] {
        &self.edge_ids
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_ids.len()
    }

    /// Number of undirected edges, i.e. `|E₊|`.
    pub fn num_edges(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn num_directed(&self) -> usize {
        2 * self.edge_ids.len()
    }

    /// Endpoints `(origin, terminus)` of the positive edge `k`.
    pub fn ends(&self, k: usize) -> (usize, usize) {
        self.ends[k]
    }

    pub fn origin(&self, d: usize) -> usize {
        let (o, t) = self.ends[d / 2];
        if d.is_multiple_of(2) {
            o
        } else {
            t
        }
    }

    pub fn terminus(&self, d: usize) -> usize {
        self.origin(d ^ 1)
    }

    pub fn bar(&self, d: usize) -> usize {
        d ^ 1
    }

    /// The undirected edge carrying directed edge `d`.
    pub fn pair(&self, d: usize) -> usize {
        d / 2
    }

    pub fn is_loop(&self, k: usize) -> bool {
        self.ends[k].0 == self.ends[k].1
    }

    /// Valence of `v`; a loop counts twice.
    pub fn valence(&self, v: usize) -> usize {
        self.ends.iter().map(|&(o, t)| (o == v) as usize + (t == v) as usize).sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64
    }

    /// First Betti number; assumes the graph is connected.
    pub fn rank(&self) -> i64 {
        1 - self.euler_characteristic()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_ids.iter().position(|e| e == id)
    }

    pub fn is_connected(&self) -> bool {
        self.components() == 1
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        let mut uf = UnionFind::new(self.num_vertices());
        for &(o, t) in &self.ends {
            uf.union(o, t);
        }
        (0..self.num_vertices()).filter(|&v| uf.find(v) == v).count()
    }

    /// Whether removing edge `k` disconnects its endpoints.
    pub fn is_separating(&self, k: usize) -> bool {
        let mut uf = UnionFind::new(self.num_vertices());
        for (j, &(o, t)) in self.ends.iter().enumerate() {
            if j != k {
                uf.union(o, t);
            }
        }
        let (o, t) = self.ends[k];
        uf.find(o) != uf.find(t)
    }

    /// The subgraph spanned by the given positive edges, keeping only incident vertices.
    pub fn subgraph(&self, edges: &[usize], name: &str) -> Graph {
        let mut keep: Vec<usize> = edges.iter().flat_map(|&k| [self.ends[k].0, self.ends[k].1]).collect();
        keep.sort_unstable();
        keep.dedup();
        let remap = |v: usize| keep.binary_search(&v).expect("incident vertex");
        Graph {
            name: name.to_string(),
            vertex_ids: keep.iter().map(|&v| self.vertex_ids[v].clone()).collect(),
            edge_ids: edges.iter().map(|&k| self.edge_ids[k].clone()).collect(),
            ends: edges.iter().map(|&k| (remap(self.ends[k].0), remap(self.ends[k].1))).collect(),
        }
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            name: self.name.clone(),
            vertices: self.vertex_ids.clone(),
            edges: self
                .edge_ids
                .iter()
                .zip(&self.ends)
                .map(|(id, &(o, t))| (id.clone(), self.vertex_ids[o].clone(), self.vertex_ids[t].clone()))
                .collect(),
        }
    }

    /// Vertex permutation realizing `e ↦ ē` as a graph automorphism, if one exists.
    pub fn reversal_automorphism(&self) -> Option<Vec<usize>> {
        let n = self.num_vertices();
        let mut pi = vec![usize::MAX; n];
        let assign = |a: usize, b: usize, pi: &mut Vec<usize>| -> bool {
            if pi[a] == usize::MAX {
                pi[a] = b;
                true
            } else {
                pi[a] == b
            }
        };
        for &(o, t) in &self.ends {
            if !assign(o, t, &mut pi) || !assign(t, o, &mut pi) {
                return None;
            }
        }
        let mut seen = vec![false; n];
        for &p in &pi {
            if p == usize::MAX || seen[p] {
                return None;
            }
            seen[p] = true;
        }
        Some(pi)
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}
