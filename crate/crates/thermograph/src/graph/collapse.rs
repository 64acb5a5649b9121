use super::{Graph, LengthFunction, UnionFind};
use crate::error::{Error, Result};

/// Where a positive edge of the source lands in the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeImage {
    Edge(usize),
    Vertex(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapseMap {
    pub source: Graph,
    pub target: Graph,
    /// One entry per positive edge of `source`.
    pub edge_image: Vec<EdgeImage>,
}

/// Collapses every edge of `forest` to a point.
pub fn collapse(graph: &Graph, forest: &[usize]) -> Result<(Graph, CollapseMap)> {
    let mut in_forest = vec![false; graph.num_edges()];
    let mut uf = UnionFind::new(graph.num_vertices());
    for &k in forest {
        if k >= graph.num_edges() {
            return Err(Error::Config(format!("edge index {k} out of range")));
        }
        if in_forest[k] {
            continue;
        }
        in_forest[k] = true;
        let (o, t) = graph.ends(k);
        if !uf.union(o, t) {
            return Err(Error::InvalidGraph(format!(
                "collapsed edges contain a cycle through `{}`",
                graph.edge_ids()[k]
            )));
        }
    }
    // Target vertex for each class, numbered by first member.
    let mut class_of = vec![usize::MAX; graph.num_vertices()];
    let mut vertex_ids = Vec::new();
    for v in 0..graph.num_vertices() {
        let root = uf.find(v);
        if class_of[root] == usize::MAX {
            class_of[root] = vertex_ids.len();
            vertex_ids.push(graph.vertex_ids()[v].clone());
        }
        class_of[v] = class_of[root];
    }
    let mut edge_ids = Vec::new();
    let mut ends = Vec::new();
    let mut edge_image = Vec::with_capacity(graph.num_edges());
    for (k, &collapsed) in in_forest.iter().enumerate() {
        let (o, t) = graph.ends(k);
        if collapsed {
            edge_image.push(EdgeImage::Vertex(class_of[o]));
        } else {
            edge_image.push(EdgeImage::Edge(edge_ids.len()));
            edge_ids.push(graph.edge_ids()[k].clone());
            ends.push((class_of[o], class_of[t]));
        }
    }
    let target = Graph::from_parts(format!("{}/collapsed", graph.name()), vertex_ids, edge_ids, ends);
    let map = CollapseMap { source: graph.clone(), target: target.clone(), edge_image };
    Ok((target, map))
}

/// The degenerate length function `c*(ℓ₀)` on the source graph.
pub fn pullback_length(cmap: &CollapseMap, l0: &LengthFunction) -> Result<LengthFunction> {
    l0.check_graph(&cmap.target)?;
    let values = cmap
        .edge_image
        .iter()
        .map(|im| match *im {
            EdgeImage::Edge(k) => l0.get(k),
            EdgeImage::Vertex(_) => 0.0,
        })
        .collect();
    LengthFunction::extended(values)
}
