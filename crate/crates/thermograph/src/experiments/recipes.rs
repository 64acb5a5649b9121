use rayon::prelude::*;

use super::{Canonical, Cell, Experiment, ExperimentConfig, GraphSource, Table};
use crate::bounds::{rank2_samples, sqrt_bound_samples, BoundSample, Rank2};
use crate::error::{Error, Result};
use crate::graph::Family;
use crate::metrics::{path_length, Metric};
use crate::rose::{escape_closed_form, escape_envelope, escape_path, fit_decay, slice_diameter, RoseSurface};
use crate::separating::{escape_path_separating, extrapolate_to_zero, shortcut_loop, SeparatedGraph};
use crate::spectral::MatrixKind;

const DEFAULT_TMAX: f64 = 1.0 - 1e-8;

pub fn run_experiment(exp: Experiment, cfg: &ExperimentConfig) -> Result<Table> {
    match exp {
        Experiment::EscapeRose => escape_rose(cfg),
        Experiment::EscapeSeparating => escape_separating(cfg),
        Experiment::ThinPart => thin_part(cfg),
        Experiment::Shortcut => shortcut(cfg),
        Experiment::Rank2Bounds => rank2_bounds(cfg),
    }
}

/// `1 − 10⁻ᵏ` below `t_max`, then `t_max`.
fn checkpoints(t_max: f64) -> Vec<f64> {
    let mut ts: Vec<f64> = (1..=15).map(|k| 1.0 - 10f64.powi(-k)).take_while(|&t| t < t_max).collect();
    ts.push(t_max);
    ts
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Config(format!("{name} must be positive, got {x}")))
    }
}

/// Columns: `r, t, length, last_edge, envelope`. `length` is the entropy
/// length of the escape path over `[0, t]`, so the last row is the total.
fn escape_rose(cfg: &ExperimentConfig) -> Result<Table> {
    let r = cfg.r.unwrap_or(3);
    let t_max = cfg.tmax.unwrap_or(DEFAULT_TMAX);
    let tol = positive("tol", cfg.tol.unwrap_or(1e-9))?;
    escape_path(r, t_max)?;
    let surface = RoseSurface::new(r)?;
    let canon = Canonical::new("escape-rose").field("r", r).num("tmax", t_max).num("tol", tol);
    let ts = checkpoints(t_max);
    let lengths = ts
        .par_iter()
        .map(|&t| path_length(&surface, &escape_path(r, t)?, Metric::Entropy, tol))
        .collect::<Result<Vec<f64>>>()?;
    let mut table = Table::new(&["r", "t", "length", "last_edge", "envelope"], canon.hash());
    for (t, len) in ts.into_iter().zip(lengths) {
        table.push(vec![r.into(), t.into(), len.into(), escape_closed_form(r, t).into(), escape_envelope(r).into()]);
    }
    Ok(table)
}

fn separated_family(cfg: &ExperimentConfig) -> Result<(Family, usize, usize)> {
    match &cfg.graph {
        None => Ok((Family::Separated(2, 2), 2, 2)),
        Some(GraphSource::Family(f @ Family::Separated(a, b))) if *a >= 2 && *b >= 2 => Ok((*f, *a, *b)),
        Some(other) => Err(Error::Config(format!(
            "this experiment needs a family g:N1,N2 with both sides of rank at least 2, got {}",
            other.canonical()
        ))),
    }
}

/// Columns: `t, length, length_refined, difference, bridge`. The refined
/// length uses a tolerance 100 times tighter.
fn escape_separating(cfg: &ExperimentConfig) -> Result<Table> {
    let (fam, n1, n2) = separated_family(cfg)?;
    let t_max = cfg.tmax.unwrap_or(DEFAULT_TMAX);
    let tol = positive("tol", cfg.tol.unwrap_or(1e-8))?;
    let sg = SeparatedGraph::from_family(&fam, MatrixKind::Quotient)?;
    // Side 1 heads to its unit-entropy point; side 2 sits where its entropy is below 1.
    let target = vec![(2.0 * n1 as f64 - 1.0).ln(); n1];
    let side2 = vec![(2.0 * n2 as f64).ln(); n2];
    escape_path_separating(&sg, &target, &side2, t_max)?;
    let canon = Canonical::new("escape-separating").field("graph", fam).num("tmax", t_max).num("tol", tol);
    let ts = checkpoints(t_max);
    let rows = ts
        .par_iter()
        .map(|&t| {
            let p = escape_path_separating(&sg, &target, &side2, t)?;
            let a = path_length(&sg, &p, Metric::Entropy, tol)?;
            let b = path_length(&sg, &p, Metric::Entropy, tol / 100.0)?;
            let bridge = p.point(&sg, t)?[sg.bridge()];
            Ok((a, b, bridge))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["t", "length", "length_refined", "difference", "bridge"], canon.hash());
    for (t, (a, b, bridge)) in ts.into_iter().zip(rows) {
        table.push(vec![t.into(), a.into(), b.into(), (a - b).abs().into(), bridge.into()]);
    }
    Ok(table)
}

/// Columns: `r, i, eps, upper, max_leg, sym_leg, bound_form, fitted, ratio,
/// samples, rejected`. `fitted = C·bound_form` with `C` fitted over all rows,
/// and `ratio = upper/fitted`.
fn thin_part(cfg: &ExperimentConfig) -> Result<Table> {
    let r = cfg.r.unwrap_or(3);
    let i = cfg.i.unwrap_or(1);
    if i == 0 || i > r {
        return Err(Error::Config(format!("edge index i must lie in 1..={r}, got {i}")));
    }
    let eps = cfg.eps.clone().unwrap_or_else(|| (2..=8).map(|k| 0.5f64.powi(k)).collect());
    let samples = cfg.samples.unwrap_or(32);
    let tol = positive("tol", cfg.tol.unwrap_or(1e-8))?;
    let canon = Canonical::new("thin-part")
        .field("r", r)
        .field("i", i)
        .nums("eps", &eps)
        .field("samples", samples)
        .field("seed", cfg.seed)
        .num("tol", tol);
    let est =
        eps.par_iter().map(|&e| slice_diameter(r, i - 1, e, samples, cfg.seed, tol)).collect::<Result<Vec<_>>>()?;
    let (c, _) = fit_decay(&est);
    let mut table = Table::new(
        &["r", "i", "eps", "upper", "max_leg", "sym_leg", "bound_form", "fitted", "ratio", "samples", "rejected"],
        canon.hash(),
    );
    for e in &est {
        let fitted = c * e.bound_form;
        table.push(vec![
            r.into(),
            i.into(),
            e.eps.into(),
            e.upper.into(),
            e.max_leg.into(),
            e.sym_leg.into(),
            e.bound_form.into(),
            fitted.into(),
            (e.upper / fitted).into(),
            e.samples.into(),
            e.rejected.into(),
        ]);
    }
    Ok(table)
}

/// Columns: `delta, max_bridge, up, across, down, total, extrapolated`. The
/// extrapolated `δ → 0` total is filled in when at least three distinct `δ`
/// are given.
fn shortcut(cfg: &ExperimentConfig) -> Result<Table> {
    let (fam, n1, n2) = separated_family(cfg)?;
    let deltas = cfg.delta.clone().unwrap_or_else(|| vec![0.1, 0.01, 0.001]);
    let lift = cfg.lift.unwrap_or(1.0);
    // The default corners are chosen for a rank-2 side 2.
    let (from, to) = match (cfg.from.clone(), cfg.to.clone()) {
        (Some(a), Some(b)) => (a, b),
        (a, b) if n2 == 2 => (a.unwrap_or_else(|| vec![1.2, 1.2]), b.unwrap_or_else(|| vec![1.5, 1.3])),
        _ => return Err(Error::Config(format!("side 2 has rank {n2}: give --from and --to"))),
    };
    if from.len() != n2 || to.len() != n2 {
        return Err(Error::Config(format!("--from and --to need {n2} side-2 lengths")));
    }
    let tol = positive("tol", cfg.tol.unwrap_or(1e-9))?;
    let sg = SeparatedGraph::from_family(&fam, MatrixKind::Quotient)?;
    let unit = vec![(2.0 * n1 as f64 - 1.0).ln(); n1];
    let canon = Canonical::new("shortcut")
        .field("graph", fam)
        .nums("delta", &deltas)
        .num("lift", lift)
        .nums("from", &from)
        .nums("to", &to)
        .num("tol", tol);
    let rows =
        deltas.par_iter().map(|&d| shortcut_loop(&sg, &unit, &from, &to, lift, d, tol)).collect::<Result<Vec<_>>>()?;
    let extrapolated = extrapolate_to_zero(&rows).ok();
    let mut table = Table::new(&["delta", "max_bridge", "up", "across", "down", "total", "extrapolated"], canon.hash());
    for row in &rows {
        table.push(vec![
            row.delta.into(),
            row.max_bridge.into(),
            row.up.into(),
            row.across.into(),
            row.down.into(),
            row.total().into(),
            extrapolated.into(),
        ]);
    }
    Ok(table)
}

/// Columns: `graph, kind, sample, q0, q1, length, bound, slack`. Rank-2
/// rows use volumes for `q`; square-root rows use the shortest free edge.
/// `samples` paths per rank-2 graph and half as many square-root paths.
fn rank2_bounds(cfg: &ExperimentConfig) -> Result<Table> {
    let n = cfg.samples.unwrap_or(100);
    let r = cfg.r.unwrap_or(4);
    let tol = positive("tol", cfg.tol.unwrap_or(1e-8))?;
    let n_sqrt = n.div_ceil(2);
    let canon =
        Canonical::new("rank2-bounds").field("samples", n).field("r", r).field("seed", cfg.seed).num("tol", tol);
    let mut groups = Rank2::ALL
        .par_iter()
        .map(|&g| Ok((g.name().to_owned(), "rank2", rank2_samples(g, n, cfg.seed, tol)?)))
        .collect::<Result<Vec<(String, &str, Vec<BoundSample>)>>>()?;
    groups.push((format!("rose:{r}"), "sqrt", sqrt_bound_samples(r, n_sqrt, cfg.seed, tol)?));
    let mut table = Table::new(&["graph", "kind", "sample", "q0", "q1", "length", "bound", "slack"], canon.hash());
    for (graph, kind, samples) in groups {
        for (k, s) in samples.iter().enumerate() {
            table.push(vec![
                Cell::Text(graph.clone()),
                kind.into(),
                k.into(),
                s.q0.into(),
                s.q1.into(),
                s.length.into(),
                s.bound.into(),
                s.slack().into(),
            ]);
        }
    }
    Ok(table)
}
