use std::fmt;

use super::{build_graph, Graph, GraphSpec, Validation};
use crate::error::{Error, Result};

/// The standard graph families.
///
/// Canonical edge orderings:
///
/// | family | vertices | edges (in order) |
/// |---|---|---|
/// | `rose r` | `v` | loops `e1 … er` |
/// | `theta r` | `v`, `w` | `e1 … e(r+1)`, all `v → w` |
/// | `barbell` | `v1`, `v2` | loop `a` at `v1`, loop `b` at `v2`, bridge `c: v1 → v2` |
/// | `G(n1,n2)` | `v1`, `v2` | loops `a1 … an1` at `v1`, loops `b1 … bn2` at `v2`, bridge `c` |
/// | `rose_theta r` | `v`, `w` | loops `a1 … a(r-2)` at `v`, then `f1`, `f2`, `f3: v → w` |
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Rose(usize),
    Theta(usize),
    Barbell,
    Separated(usize, usize),
    RoseTheta(usize),
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Rose(r) => write!(f, "rose:{r}"),
            Family::Theta(r) => write!(f, "theta:{r}"),
            Family::Barbell => write!(f, "barbell"),
            Family::Separated(a, b) => write!(f, "g:{a},{b}"),
            Family::RoseTheta(r) => write!(f, "rose_theta:{r}"),
        }
    }
}

/// Parses `rose:R`, `theta:R`, `barbell`, `g:N1,N2` or `rose_theta:R`.
pub fn parse_family(s: &str) -> Result<Family> {
    let s = s.trim();
    let (kind, arg) = match s.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (s, None),
    };
    let num = |a: &str| -> Result<usize> {
        a.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad family parameter `{a}` in `{s}`")))
    };
    fn need<'a>(arg: Option<&'a str>, s: &str) -> Result<&'a str> {
        arg.ok_or_else(|| Error::Config(format!("family `{s}` needs a parameter")))
    }
    let family = match kind.to_ascii_lowercase().as_str() {
        "rose" => Family::Rose(num(need(arg, s)?)?),
        "theta" => Family::Theta(num(need(arg, s)?)?),
        "barbell" if arg.is_none() => Family::Barbell,
        "g" => {
            let arg = need(arg, s)?;
            let (a, b) =
                arg.split_once(',').ok_or_else(|| Error::Config(format!("family `{s}` needs two parameters")))?;
            Family::Separated(num(a)?, num(b)?)
        }
        "rose_theta" => Family::RoseTheta(num(need(arg, s)?)?),
        _ => return Err(Error::Config(format!("unknown graph family `{s}`"))),
    };
    check_range(&family)?;
    Ok(family)
}

fn check_range(family: &Family) -> Result<()> {
    let ok = match *family {
        Family::Rose(r) => (2..=32).contains(&r),
        Family::Theta(r) => (2..=31).contains(&r),
        Family::Barbell => true,
        Family::Separated(a, b) => a >= 1 && b >= 1 && a + b < 32,
        Family::RoseTheta(r) => (3..=31).contains(&r),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("family parameters out of range: {family}")))
    }
}

pub fn standard_graph(family: &Family) -> Result<Graph> {
    check_range(family)?;
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut edge = |id: String, o: &str, t: &str| edges.push((id, o.to_string(), t.to_string()));
    match *family {
        Family::Rose(r) => {
            vertices.push("v");
            for i in 1..=r {
                edge(format!("e{i}"), "v", "v");
            }
        }
        Family::Theta(r) => {
            vertices.extend(["v", "w"]);
            for i in 1..=r + 1 {
                edge(format!("e{i}"), "v", "w");
            }
        }
        Family::Barbell => {
            vertices.extend(["v1", "v2"]);
            edge("a".into(), "v1", "v1");
            edge("b".into(), "v2", "v2");
            edge("c".into(), "v1", "v2");
        }
        Family::Separated(n1, n2) => {
            vertices.extend(["v1", "v2"]);
            for i in 1..=n1 {
                edge(format!("a{i}"), "v1", "v1");
            }
            for i in 1..=n2 {
                edge(format!("b{i}"), "v2", "v2");
            }
            edge("c".into(), "v1", "v2");
        }
        Family::RoseTheta(r) => {
            vertices.extend(["v", "w"]);
            for i in 1..=r - 2 {
                edge(format!("a{i}"), "v", "v");
            }
            for i in 1..=3 {
                edge(format!("f{i}"), "v", "w");
            }
        }
    }
    let spec =
        GraphSpec { name: family.to_string(), vertices: vertices.into_iter().map(String::from).collect(), edges };
    build_graph(&spec, Validation::Strict)
}
