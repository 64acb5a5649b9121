use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{load_graph, Canonical, Cell, ExperimentConfig, Table};
use crate::bounds::{infinite_length_samples, rank2_samples, sqrt_bound_samples, Rank2};
use crate::cycles::{f_via_cycles, f_via_det, CycleComplex};
use crate::error::{Error, Result};
use crate::graph::format::{emit_graph_file, parse_graph_file};
use crate::graph::{
    collapse, parse_family, pullback_length, standard_graph, Family, Graph, LengthFunction, Validation,
};
use crate::metrics::{entropy_norm, path_length, pressure_norm, tangent_project, Metric};
use crate::rose::{escape_closed_form, escape_envelope, escape_path, f_rose, solve_edge, x_i, y_i, y_ij, RoseSurface};
use crate::separating::{bridge_multiplicities_even, escape_path_separating, SeparatedGraph};
use crate::spectral::{
    entropy, grad_pressure, normalize_unit_entropy, pressure, pressure_and_gradient, quotient_matrix, spectral_radius,
    transition_matrix, MatrixKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Graph,
    Spectral,
    Cycles,
    Metrics,
    Rose,
    Separating,
    Bounds,
    All,
}

impl Suite {
    const EACH: [Suite; 7] =
        [Suite::Graph, Suite::Spectral, Suite::Cycles, Suite::Metrics, Suite::Rose, Suite::Separating, Suite::Bounds];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Graph => "graph",
            Suite::Spectral => "spectral",
            Suite::Cycles => "cycles",
            Suite::Metrics => "metrics",
            Suite::Rose => "rose",
            Suite::Separating => "separating",
            Suite::Bounds => "bounds",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }
}

const STANDARD: [Family; 13] = [
    Family::Rose(2),
    Family::Rose(3),
    Family::Rose(4),
    Family::Rose(5),
    Family::Theta(2),
    Family::Theta(3),
    Family::Theta(4),
    Family::Theta(5),
    Family::Barbell,
    Family::Separated(2, 2),
    Family::Separated(3, 3),
    Family::RoseTheta(4),
    Family::RoseTheta(5),
];

struct Runner {
    suite: Suite,
    seed: u64,
    stream: u64,
    n: usize,
    tol: f64,
    graphs: Vec<(String, Graph, Option<Family>)>,
    table: Table,
}

impl Runner {
    /// A fresh generator per check, so checks do not perturb each other.
    fn rng(&mut self) -> ChaCha8Rng {
        self.stream += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Passes when `measured ≤ tolerance`. Budget errors skip the check.
    fn record(&mut self, check: &str, graph: &str, tolerance: f64, measured: Result<f64>) {
        let (status, value, note) = match measured {
            Ok(m) if m <= tolerance => (Status::Pass, Cell::Num(m), String::new()),
            Ok(m) => (Status::Fail, Cell::Num(m), "exceeds tolerance".into()),
            Err(e @ Error::Budget(_)) => (Status::Skip, Cell::Empty, e.to_string()),
            Err(e) => (Status::Fail, Cell::Empty, e.to_string()),
        };
        let suite = self.suite.name();
        self.table.push(vec![
            suite.into(),
            check.into(),
            graph.into(),
            status.name().into(),
            value,
            tolerance.into(),
            note.into(),
        ]);
    }

    fn complex(&self, g: &Graph, kind: MatrixKind) -> Result<CycleComplex> {
        CycleComplex::build(g, kind)
    }
}

fn lengths(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

fn strict(v: Vec<f64>) -> Result<LengthFunction> {
    LengthFunction::strict(v)
}

fn max_over<I: IntoIterator<Item = Result<f64>>>(it: I) -> Result<f64> {
    it.into_iter().try_fold(0.0f64, |m, x| {
        let x = x?;
        // NaN must not pass as "small".
        Ok(if x.is_nan() { f64::NAN } else { m.max(x) })
    })
}

fn count(b: bool) -> f64 {
    if b {
        0.0
    } else {
        1.0
    }
}

fn expected_rank(f: &Family) -> i64 {
    match *f {
        Family::Rose(r) | Family::Theta(r) | Family::RoseTheta(r) => r as i64,
        Family::Barbell => 2,
        Family::Separated(a, b) => (a + b) as i64,
    }
}

fn graph_suite(run: &mut Runner) {
    for (name, g, fam) in run.graphs.clone() {
        if let Some(f) = fam {
            let ok = parse_family(&f.to_string()).map(|p| count(p == f));
            run.record("family_round_trip", &name, 0.0, ok);
            run.record("rank", &name, 0.0, Ok((g.rank() - expected_rank(&f)).abs() as f64));
        }
        let involution = (0..g.num_directed())
            .filter(|&d| g.bar(g.bar(d)) != d || g.bar(d) == d || g.origin(g.bar(d)) != g.terminus(d))
            .count();
        run.record("involution", &name, 0.0, Ok(involution as f64));
        let mut rng = run.rng();
        let l = strict(lengths(&mut rng, g.num_edges(), 0.1, 5.0));
        let round = l.and_then(|l| {
            let back = parse_graph_file(&emit_graph_file(&g, Some(&l)), Validation::Relaxed)?;
            Ok(count(
                back.graph.to_spec() == g.to_spec()
                    && back.lengths.map(|b| b.into_values()) == Some(l.values().to_vec()),
            ))
        });
        run.record("file_round_trip", &name, 0.0, round);
    }
    let rose = standard_graph(&Family::Rose(2)).and_then(|g| Ok((run.complex(&g, MatrixKind::Full)?, g)));
    for fam in [Family::Theta(2), Family::Barbell] {
        let mut rng = run.rng();
        let n = 20 * run.n;
        let res = rose.clone().and_then(|(rose_cx, _)| {
            let g = standard_graph(&fam)?;
            let c = run.complex(&g, MatrixKind::Full)?;
            let (_, map) = collapse(&g, &[2])?;
            max_over((0..n).map(|_| {
                let l0 = strict(lengths(&mut rng, 2, 0.05, 4.0))?;
                let pulled = pullback_length(&map, &l0)?;
                Ok((f_via_cycles(&c, &pulled) - f_via_cycles(&rose_cx, &l0)).abs())
            }))
        });
        run.record("collapse_identity", &fam.to_string(), 1e-12, res);
    }
}

fn spectral_suite(run: &mut Runner) {
    for r in 2..=6 {
        let res = standard_graph(&Family::Rose(r)).and_then(|g| {
            let h = entropy(&g, &LengthFunction::constant(&g, 1.0)?)?;
            Ok((h - (2.0 * r as f64 - 1.0).ln()).abs())
        });
        run.record("unit_rose_entropy", &format!("rose:{r}"), 1e-10, res);
    }
    let res = standard_graph(&Family::Theta(2))
        .and_then(|g| Ok((entropy(&g, &LengthFunction::constant(&g, 1.0)?)? - 2f64.ln()).abs()));
    run.record("unit_theta_entropy", "theta:2", 1e-10, res);
    let n = run.n;
    for (name, g, _) in run.graphs.clone() {
        let e = g.num_edges();
        let mut rng = run.rng();
        let res = max_over((0..n).map(|_| {
            let f = lengths(&mut rng, e, 0.05, 3.0);
            let a = spectral_radius(&transition_matrix(&g, Some(&f)))?;
            let b = spectral_radius(&quotient_matrix(&g, Some(&f)))?;
            Ok((a - b).abs() / a)
        }));
        run.record("quotient_spectral_radius", &name, 1e-10, res);

        let mut rng = run.rng();
        let mut positive = Ok(0.0);
        let res = max_over((0..n).map(|_| {
            let f: Vec<f64> = lengths(&mut rng, e, 0.2, 2.0).iter().map(|x| -x).collect();
            let (_, grad) = pressure_and_gradient(&g, &f)?;
            if grad.iter().any(|&x| !(x > 0.0)) {
                positive = Ok(1.0);
            }
            Ok((grad.iter().sum::<f64>() - 1.0).abs())
        }));
        run.record("grad_pressure_l1", &name, 1e-8, res);
        run.record("grad_pressure_positive", &name, 0.0, positive);

        let mut rng = run.rng();
        let res = max_over((0..3).map(|_| {
            let f: Vec<f64> = lengths(&mut rng, e, 0.2, 2.0).iter().map(|x| -x).collect();
            let (_, grad) = pressure_and_gradient(&g, &f)?;
            let h = 1e-5;
            max_over((0..e).map(|k| {
                let (mut p, mut m) = (f.clone(), f.clone());
                p[k] += h;
                m[k] -= h;
                Ok(((pressure(&g, &p)? - pressure(&g, &m)?) / (2.0 * h) - grad[k]).abs())
            }))
        }));
        run.record("grad_pressure_fd", &name, 1e-6, res);

        let mut rng = run.rng();
        let res = max_over((0..n).map(|_| {
            let l = strict(lengths(&mut rng, e, 0.05, 5.0))?;
            let a = rng.random_range(0.1..10.0);
            let h = entropy(&g, &l)?;
            Ok((entropy(&g, &l.scaled(a)?)? * a - h).abs() / h)
        }));
        run.record("entropy_homogeneity", &name, 1e-9, res);

        let mut rng = run.rng();
        let res = max_over((0..n).map(|_| {
            let l = normalize_unit_entropy(&g, &strict(lengths(&mut rng, e, 0.1, 3.0))?)?;
            let neg: Vec<f64> = l.values().iter().map(|x| -x).collect();
            Ok(pressure(&g, &neg)?.abs())
        }));
        run.record("unit_entropy_pressure", &name, 1e-10, res);
    }
}

fn cycles_suite(run: &mut Runner) {
    let n = run.n;
    for (name, g, _) in run.graphs.clone() {
        let e = g.num_edges();
        for (kind, label) in
            [(MatrixKind::Full, "cycles_vs_det_full"), (MatrixKind::Quotient, "cycles_vs_det_quotient")]
        {
            let mut rng = run.rng();
            let res = run.complex(&g, kind).and_then(|c| {
                max_over((0..n).map(|_| {
                    let l = strict(lengths(&mut rng, e, 0.05, 4.0))?;
                    Ok((f_via_cycles(&c, &l) - f_via_det(&g, &l, kind)).abs())
                }))
            });
            run.record(label, &name, 1e-12, res);
        }
        let mut rng = run.rng();
        let mut hess_res = Ok(0.0);
        let res = run.complex(&g, MatrixKind::Quotient).and_then(|c| {
            let mut worst_h = 0.0f64;
            let worst = max_over((0..5).map(|_| {
                let l = lengths(&mut rng, e, 0.2, 3.0);
                let grad = c.gradient(&l);
                let hess = c.hessian(&l);
                let h = 1e-5;
                max_over((0..e).map(|k| {
                    let (mut p, mut m) = (l.clone(), l.clone());
                    p[k] += h;
                    m[k] -= h;
                    let (gp, gm) = (c.gradient(&p), c.gradient(&m));
                    for j in 0..e {
                        worst_h = worst_h.max(((gp[j] - gm[j]) / (2.0 * h) - hess[k][j]).abs());
                    }
                    Ok(((c.value(&p) - c.value(&m)) / (2.0 * h) - grad[k]).abs())
                }))
            }));
            hess_res = Ok(worst_h);
            worst
        });
        if let Err(err) = &res {
            hess_res = Err(err.clone());
        }
        run.record("gradient_fd", &name, 1e-6, res);
        run.record("hessian_fd", &name, 1e-6, hess_res);
    }

    let m = 20 * n;
    let mut rng = run.rng();
    let res = (|| {
        let c2 = run.complex(&standard_graph(&Family::Rose(2))?, MatrixKind::Quotient)?;
        let c3 = run.complex(&standard_graph(&Family::Rose(3))?, MatrixKind::Quotient)?;
        max_over((0..m).map(|_| {
            let l = lengths(&mut rng, 3, 0.01, 4.0);
            let (x, y, z) = ((-l[0]).exp(), (-l[1]).exp(), (-l[2]).exp());
            let p2 = 1.0 - x - y - 3.0 * x * y;
            let p3 = 1.0 - x - y - z - 3.0 * (x * y + x * z + y * z) - 5.0 * x * y * z;
            let errs = [c2.value(&l[..2]) - p2, f_rose(&l[..2]) - p2, c3.value(&l) - p3, f_rose(&l) - p3];
            Ok(errs.iter().fold(0.0f64, |a, b| a.max(b.abs())))
        }))
    })();
    run.record("rose_polynomials", "rose:2,rose:3", 1e-12, res);
    let mut rng = run.rng();
    let res = (|| {
        let c = run.complex(&standard_graph(&Family::Barbell)?, MatrixKind::Quotient)?;
        max_over((0..m).map(|_| {
            let l = lengths(&mut rng, 3, 0.01, 4.0);
            let (x, y, z) = ((-l[0]).exp(), (-l[1]).exp(), (-l[2]).exp());
            Ok((c.value(&l) - (1.0 - (x + y + 4.0 * x * y * z * z) + x * y)).abs())
        }))
    })();
    run.record("barbell_polynomial", "barbell", 1e-12, res);
}

fn metrics_suite(run: &mut Runner) {
    let n = run.n;
    for (name, g, _) in run.graphs.clone() {
        let e = g.num_edges();
        let mut rng = run.rng();
        let res = max_over((0..3).map(|_| {
            let raw = lengths(&mut rng, e, 0.3, 2.0);
            let h = entropy(&g, &strict(raw.clone())?)?;
            let step = 1e-5;
            let mut dot = 0.0;
            for k in 0..e {
                let (mut p, mut m) = (raw.clone(), raw.clone());
                p[k] += step;
                m[k] -= step;
                dot += raw[k] * (entropy(&g, &strict(p)?)? - entropy(&g, &strict(m)?)?) / (2.0 * step);
            }
            Ok((dot + h).abs())
        }));
        run.record("euler_relation", &name, 1e-6, res);

        let mut rng = run.rng();
        let mut tangent = Ok(0.0);
        let res = run.complex(&g, MatrixKind::Quotient).and_then(|c| {
            let mut worst_t = 0.0f64;
            let worst = max_over((0..n).map(|_| {
                let l = normalize_unit_entropy(&g, &strict(lengths(&mut rng, e, 0.2, 3.0))?)?;
                let w = lengths(&mut rng, e, -1.0, 1.0);
                let v = tangent_project(&c, l.values(), &w)?;
                let grad = c.gradient(l.values());
                let dot: f64 = v.components.iter().zip(&grad).map(|(a, b)| a * b).sum();
                let scale = grad.iter().map(|x| x.abs()).sum::<f64>() * w.iter().map(|x| x.abs()).sum::<f64>();
                worst_t = worst_t.max(dot.abs() / scale);
                let eh = entropy_norm(&c, &v)?;
                let ep = pressure_norm(&c, &v)?;
                let gp = grad_pressure(&g, &l)?;
                let lp: f64 = l.values().iter().zip(&gp).map(|(a, b)| a * b).sum();
                Ok((eh * eh * lp - ep * ep).abs() / (ep * ep))
            }));
            tangent = Ok(worst_t);
            worst
        });
        if let Err(err) = &res {
            tangent = Err(err.clone());
        }
        run.record("conformal_relation", &name, 1e-6, res);
        run.record("tangent_projection", &name, 1e-12, tangent);
    }
}

fn rose_suite(run: &mut Runner) {
    let m = 20 * run.n;
    for r in 2..=6 {
        let graph = format!("rose:{r}");
        let mut rng = run.rng();
        let res = max_over((0..m).map(|_| {
            let l = lengths(&mut rng, r, 0.05, 5.0);
            let f = f_rose(&l);
            Ok((0..r).map(|i| (f - (x_i(&l, i) - (-l[i]).exp() * y_i(&l, i))).abs()).fold(0.0, f64::max))
        }));
        run.record("x_y_decomposition", &graph, 1e-12, res);

        let mut rng = run.rng();
        let res = max_over((0..m).map(|_| {
            let mut l = lengths(&mut rng, r, (2.0 * r as f64 - 1.0).ln(), 6.0);
            let i = rng.random_range(0..r);
            l[i] = solve_edge(&l, i)?;
            Ok(f_rose(&l).abs())
        }));
        run.record("solve_edge_on_surface", &graph, 1e-12, res);

        if r >= 3 {
            let mut rng = run.rng();
            let low = (0..m)
                .filter(|_| {
                    let l = lengths(&mut rng, r, 0.01, 8.0);
                    let (i, j) = (rng.random_range(0..r), rng.random_range(0..r - 1));
                    let j = if j >= i { j + 1 } else { j };
                    !(y_ij(&l, i, j) > 3.0)
                })
                .count();
            run.record("y_ij_above_three", &graph, 0.0, Ok(low as f64));

            let res = escape_path(r, 0.99).and_then(|p| {
                let s = RoseSurface::new(r)?;
                max_over((0..=99).map(|k| {
                    let t = 0.01 * k as f64;
                    Ok((p.point(&s, t)?[r - 1] - escape_closed_form(r, t)).abs())
                }))
            });
            run.record("escape_closed_form", &graph, 1e-10, res);
        }
    }
    let res = escape_path(3, 1.0 - 1e-8).and_then(|p| {
        let len = path_length(&RoseSurface::new(3)?, &p, Metric::Entropy, 1e-9)?;
        Ok(len - escape_envelope(3))
    });
    run.record("escape_length_envelope", "rose:3", 1e-3, res);
}

fn separating_suite(run: &mut Runner) {
    let m = 20 * run.n;
    for fam in [Family::Barbell, Family::Separated(2, 2), Family::Separated(3, 2)] {
        let name = fam.to_string();
        let sg = SeparatedGraph::from_family(&fam, MatrixKind::Quotient);
        let mut rng = run.rng();
        let res = sg.clone().and_then(|sg| {
            let e = sg.graph().num_edges();
            max_over((0..m).map(|_| sg.factorization_residual(&lengths(&mut rng, e, 0.05, 4.0))))
        });
        run.record("factorization_residual", &name, 1e-11, res);
        run.record("bridge_multiplicity_even", &name, 0.0, sg.map(|sg| count(bridge_multiplicities_even(&sg))));
    }
    let res = SeparatedGraph::from_family(&Family::Separated(2, 2), MatrixKind::Quotient).and_then(|sg| {
        let p = escape_path_separating(&sg, &[3f64.ln(); 2], &[4f64.ln(); 2], 1.0 - 1e-8)?;
        let a = path_length(&sg, &p, Metric::Entropy, 1e-8)?;
        let b = path_length(&sg, &p, Metric::Entropy, 1e-10)?;
        if !a.is_finite() {
            return Err(Error::Numeric(format!("escape length {a}")));
        }
        Ok((a - b).abs())
    });
    run.record("escape_quadrature_stability", "g:2,2", 1e-4, res);
}

fn bounds_suite(run: &mut Runner) {
    let (seed, tol, n) = (run.seed, run.tol, run.n);
    for g in Rank2::ALL {
        let res = rank2_samples(g, 2 * n, seed, tol).and_then(|s| max_over(s.iter().map(|b| Ok(-b.slack()))));
        run.record("rank2_lower_bound", g.name(), 1e-6, res);
    }
    let res = sqrt_bound_samples(4, n, seed, tol).and_then(|s| max_over(s.iter().map(|b| Ok(-b.slack()))));
    run.record("sqrt_lower_bound", "rose:4", 1e-6, res);
    let res = infinite_length_samples(3, 1.0, n.div_ceil(10), seed, tol)
        .and_then(|s| max_over(s.iter().map(|b| Ok(b.bound - b.length))));
    run.record("thin_points_are_far", "rose:3", 0.0, res);
}

/// Runs the selected invariant suites. Columns: `suite, check, graph, status,
/// measured, tolerance, note`; a check passes when `measured ≤ tolerance`.
/// `samples` (default 50) sets the random points per check: rank-2 bounds use
/// twice as many and closed-form identities twenty times as many.
pub fn run_verify(suite: Suite, cfg: &ExperimentConfig) -> Result<Table> {
    let n = cfg.samples.unwrap_or(50);
    if n == 0 {
        return Err(Error::Config("samples must be positive".into()));
    }
    let tol = cfg.tol.unwrap_or(1e-8);
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tol must be positive, got {tol}")));
    }
    let mut canon =
        Canonical::new("verify").field("suite", suite).field("samples", n).field("seed", cfg.seed).num("tol", tol);
    let graphs = match load_graph(cfg)? {
        Some((g, name)) => {
            canon = canon.graph(cfg.graph.as_ref().expect("graph was loaded"));
            let fam = parse_family(&name).ok();
            vec![(name, g, fam)]
        }
        None => {
            STANDARD.iter().map(|f| Ok((f.to_string(), standard_graph(f)?, Some(*f)))).collect::<Result<Vec<_>>>()?
        }
    };
    let table = Table::new(&["suite", "check", "graph", "status", "measured", "tolerance", "note"], canon.hash());
    let mut run = Runner { suite, seed: cfg.seed, stream: 0, n, tol, graphs, table };
    let suites: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
    for s in suites {
        run.suite = s;
        match s {
            Suite::Graph => graph_suite(&mut run),
            Suite::Spectral => spectral_suite(&mut run),
            Suite::Cycles => cycles_suite(&mut run),
            Suite::Metrics => metrics_suite(&mut run),
            Suite::Rose => rose_suite(&mut run),
            Suite::Separating => separating_suite(&mut run),
            Suite::Bounds => bounds_suite(&mut run),
            Suite::All => unreachable!("expanded above"),
        }
    }
    Ok(run.table)
}
