//! Line-oriented text format for graphs with optional lengths.
//!
//! ```text
//! graph barbell
//! v v1
//! v v2
//! e a v1 v1
//! e b v2 v2
//! e c v1 v2
//! len a 1.0986122886681098
//! len b 1.0986122886681098
//! len c inf
//! ```
//!
//! `#` starts a comment. `len` lines must cover every edge or none.

use super::{build_graph, Graph, GraphSpec, LengthFunction, Validation};
use crate::error::{Error, Result};

/// A parsed graph file.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFile {
    pub graph: Graph,
    pub lengths: Option<LengthFunction>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses a length token: a decimal, or `inf`.
pub fn parse_length_value(tok: &str) -> std::result::Result<f64, String> {
    let v = match tok {
        "inf" | "Inf" | "INF" | "infinity" => f64::INFINITY,
        _ => tok.parse::<f64>().map_err(|_| format!("bad length `{tok}`"))?,
    };
    if v.is_nan() || v < 0.0 {
        return Err(format!("length `{tok}` must lie in [0, inf]"));
    }
    Ok(v)
}

/// Parses a comma-separated length list such as `1,1,inf`.
pub fn parse_length_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Err(Error::Config("empty length list".into()));
    }
    s.split(',').map(|t| parse_length_value(t.trim()).map_err(Error::Config)).collect()
}

pub fn parse_graph_file(text: &str, validation: Validation) -> Result<GraphFile> {
    let mut name: Option<String> = None;
    let mut spec = GraphSpec { name: String::new(), vertices: Vec::new(), edges: Vec::new() };
    let mut lens: Vec<(usize, String, f64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "graph" => {
                if toks.len() != 2 {
                    return Err(parse_err(lineno, "expected `graph <name>`"));
                }
                if name.is_some() {
                    return Err(parse_err(lineno, "duplicate `graph` header"));
                }
                name = Some(toks[1].to_string());
            }
            _ if name.is_none() => return Err(parse_err(lineno, "missing `graph` header")),
            "v" => {
                if toks.len() != 2 {
                    return Err(parse_err(lineno, "expected `v <id>`"));
                }
                spec.vertices.push(toks[1].to_string());
            }
            "e" => {
                if toks.len() != 4 {
                    return Err(parse_err(lineno, "expected `e <id> <origin> <terminus>`"));
                }
                spec.edges.push((toks[1].to_string(), toks[2].to_string(), toks[3].to_string()));
            }
            "len" => {
                if toks.len() != 3 {
                    return Err(parse_err(lineno, "expected `len <edge> <value>`"));
                }
                let v = parse_length_value(toks[2]).map_err(|m| parse_err(lineno, m))?;
                lens.push((lineno, toks[1].to_string(), v));
            }
            other => return Err(parse_err(lineno, format!("unknown directive `{other}`"))),
        }
    }
    spec.name = name.ok_or_else(|| parse_err(0, "missing `graph` header"))?;
    let graph = build_graph(&spec, validation)?;
    let lengths = if lens.is_empty() {
        None
    } else {
        let mut values = vec![None; graph.num_edges()];
        for (lineno, id, v) in lens {
            let k = graph.edge_index(&id).ok_or_else(|| parse_err(lineno, format!("unknown edge `{id}`")))?;
            if values[k].replace(v).is_some() {
                return Err(parse_err(lineno, format!("duplicate length for `{id}`")));
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(k, v)| {
                v.ok_or_else(|| Error::InvalidLength(format!("no length for edge `{}`", graph.edge_ids()[k])))
            })
            .collect::<Result<Vec<f64>>>()?;
        Some(LengthFunction::extended(values)?)
    };
    Ok(GraphFile { graph, lengths })
}

/// Emits a file that [`parse_graph_file`] reads back bit-exactly.
pub fn emit_graph_file(graph: &Graph, lengths: Option<&LengthFunction>) -> String {
    let mut out = format!("graph {}\n", graph.name());
    for v in graph.vertex_ids() {
        out.push_str(&format!("v {v}\n"));
    }
    for (id, o, t) in graph.to_spec().edges {
        out.push_str(&format!("e {id} {o} {t}\n"));
    }
    if let Some(l) = lengths {
        for (id, v) in graph.edge_ids().iter().zip(l.values()) {
            if v.is_infinite() {
                out.push_str(&format!("len {id} inf\n"));
            } else {
                out.push_str(&format!("len {id} {v:?}\n"));
            }
        }
    }
    out
}
