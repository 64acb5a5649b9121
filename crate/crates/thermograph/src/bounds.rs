//! Lower bounds on path lengths and the random admissible paths that test them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cycles::CycleComplex;
use crate::error::{Error, Result};
use crate::graph::{standard_graph, Family};
use crate::metrics::{path_length, Metric, MetricPath, Profile, Surface};
use crate::rose::{self, RoseSurface};
use crate::spectral::MatrixKind;

/// The three rank-2 graphs carrying a volume lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rank2 {
    Rose,
    Barbell,
    Theta,
}

impl Rank2 {
    pub const ALL: [Rank2; 3] = [Rank2::Rose, Rank2::Barbell, Rank2::Theta];

    pub fn name(self) -> &'static str {
        match self {
            Rank2::Rose => "rose:2",
            Rank2::Barbell => "barbell",
            Rank2::Theta => "theta:2",
        }
    }

    /// Volume `m`: `a + b` on the rose, `a + b + 2c` on the barbell (bridge
    /// counted twice), `ℓ₁ + ℓ₂ + ℓ₃` on the theta.
    pub fn volume(self, l: &[f64]) -> f64 {
        match self {
            Rank2::Rose => l[0] + l[1],
            Rank2::Barbell => l[0] + l[1] + 2.0 * l[2],
            Rank2::Theta => l[0] + l[1] + l[2],
        }
    }

    pub fn coefficient(self) -> f64 {
        match self {
            Rank2::Rose => 1.0,
            Rank2::Barbell => 0.5f64.sqrt(),
            Rank2::Theta => 0.2f64.sqrt(),
        }
    }

    /// `c·(√m₁ − √m₀)`, valid for paths with increasing volume from `m₀ ≥ 4`.
    pub fn lower_bound(self, m0: f64, m1: f64) -> Result<f64> {
        if !(m0 >= 4.0) || m1 < m0 {
            return Err(Error::Config(format!("need 4 ≤ m₀ ≤ m₁, got m₀ = {m0}, m₁ = {m1}")));
        }
        Ok(self.coefficient() * (m1.sqrt() - m0.sqrt()))
    }

    pub fn surface(self) -> Result<Box<dyn Surface>> {
        Ok(match self {
            Rank2::Rose => Box::new(RoseSurface::new(2)?),
            Rank2::Barbell => Box::new(CycleComplex::build(&standard_graph(&Family::Barbell)?, MatrixKind::Quotient)?),
            Rank2::Theta => Box::new(CycleComplex::build(&standard_graph(&Family::Theta(2))?, MatrixKind::Quotient)?),
        })
    }

    /// The solved edge: the second loop, the bridge, the middle theta edge.
    pub fn dependent(self) -> usize {
        match self {
            Rank2::Rose => 1,
            Rank2::Barbell => 2,
            Rank2::Theta => 1,
        }
    }
}

/// One sampled path with its measured length and the bound it must respect.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSample {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    /// Monotone quantity at the endpoints (volume, or the shortest edge).
    pub q0: f64,
    pub q1: f64,
    pub length: f64,
    pub bound: f64,
}

impl BoundSample {
    pub fn slack(&self) -> f64 {
        self.length - self.bound
    }
}

/// Polyline through `nodes` (free coordinates linear per segment), returned
/// as one path per segment.
fn polyline(nodes: &[Vec<f64>], dep: usize) -> Result<Vec<MetricPath>> {
    nodes
        .windows(2)
        .map(|w| {
            let profiles =
                (0..w[0].len()).map(|k| (k != dep).then(|| Profile::segment(w[0][k], w[1][k], 0.0, 1.0))).collect();
            MetricPath::new(profiles, 0.0, 1.0)
        })
        .collect()
}

/// `q` evaluated along every segment on a grid, strictly increasing.
fn strictly_increasing(s: &dyn Surface, paths: &[MetricPath], q: impl Fn(&[f64]) -> f64, grid: usize) -> Result<bool> {
    let mut prev = f64::NEG_INFINITY;
    for p in paths {
        for k in 0..=grid {
            let x = q(&p.point(s, k as f64 / grid as f64)?);
            if x < prev || (k > 0 && x <= prev) {
                return Ok(false);
            }
            prev = x;
        }
    }
    Ok(true)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

/// Free coordinates of start, interior node and end, with volume increasing
/// from the start.
fn rank2_nodes(g: Rank2, rng: &mut ChaCha8Rng) -> [Vec<f64>; 3] {
    match g {
        Rank2::Rose => {
            // Past the symmetric point the volume grows with the free loop.
            let a0 = rng.random_range(3.0..8.0);
            let a2 = a0 + rng.random_range(0.1..15.0);
            let a1 = a0 + rng.random_range(0.0..1.0) * (a2 - a0);
            [vec![a0, 0.0], vec![a1, 0.0], vec![a2, 0.0]]
        }
        Rank2::Barbell | Rank2::Theta => {
            // The volume decreases in both free coordinates.
            let x0 = log_uniform(rng, 1e-2, 1.0);
            let y0 = log_uniform(rng, 1e-2, 3.0);
            let x2 = (x0 * rng.random_range(0.05..1.0)).max(1e-3);
            let y2 = (y0 * rng.random_range(0.3..1.0)).max(1e-3);
            let x1 = x2 + rng.random_range(0.0..1.0) * (x0 - x2);
            let y1 = y2 + rng.random_range(0.0..1.0) * (y0 - y2);
            let place = |x: f64, y: f64| match g {
                Rank2::Barbell => vec![x, y, 0.0],
                _ => vec![x, 0.0, y],
            };
            [place(x0, y0), place(x1, y1), place(x2, y2)]
        }
    }
}

/// `n` random volume-increasing paths on `g` starting at volume `≥ 4`, each
/// measured against the volume bound.
pub fn rank2_samples(g: Rank2, n: usize, seed: u64, tol: f64) -> Result<Vec<BoundSample>> {
    let s = g.surface()?;
    let dep = g.dependent();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut draws = 0usize;
    while out.len() < n {
        draws += 1;
        if draws > 1000 * n.max(1) {
            return Err(Error::NoCompletion(format!("could not sample monotone paths on {}", g.name())));
        }
        let nodes = rank2_nodes(g, &mut rng);
        let Ok(paths) = polyline(&nodes, dep) else { continue };
        let (Ok(a), Ok(b)) = (paths[0].point(s.as_ref(), 0.0), paths[1].point(s.as_ref(), 1.0)) else { continue };
        let (m0, m1) = (g.volume(&a), g.volume(&b));
        if m0 < 4.0 {
            continue;
        }
        if !matches!(strictly_increasing(s.as_ref(), &paths, |l| g.volume(l), 64), Ok(true)) {
            continue;
        }
        let mut length = 0.0;
        for p in &paths {
            length += path_length(s.as_ref(), p, Metric::Entropy, tol)?;
        }
        out.push(BoundSample { bound: g.lower_bound(m0, m1)?, start: a, end: b, q0: m0, q1: m1, length });
    }
    Ok(out)
}

/// `n` random paths on `M¹(R_r)` meeting the hypotheses of the square-root
/// bound: edge 0 is the shortest of the first `r − 1`, starts at `≥ L_r`,
/// and grows; the last edge is solved.
pub fn sqrt_bound_samples(r: usize, n: usize, seed: u64, tol: f64) -> Result<Vec<BoundSample>> {
    if r < 3 {
        return Err(Error::Config(format!("the square-root bound sampler needs r ≥ 3, got {r}")));
    }
    let s = RoseSurface::new(r)?;
    let lr = rose::l_r(r);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let s0 = lr + rng.random_range(0.0..5.0);
        let s2 = s0 + rng.random_range(0.5..30.0);
        let s1 = s0 + rng.random_range(0.0..1.0) * (s2 - s0);
        // Other free edges stay above edge 0 at every node, hence on every segment.
        let node = |first: f64, rng: &mut ChaCha8Rng| {
            let mut v: Vec<f64> = (0..r).map(|_| first + rng.random_range(0.0..5.0)).collect();
            v[0] = first;
            v
        };
        let nodes = [node(s0, &mut rng), node(s1, &mut rng), node(s2, &mut rng)];
        let paths = polyline(&nodes, r - 1)?;
        let mut length = 0.0;
        for p in &paths {
            length += path_length(&s, p, Metric::Entropy, tol)?;
        }
        let mut a = nodes[0].clone();
        a[r - 1] = s.solve(&a, r - 1)?;
        let mut b = nodes[2].clone();
        b[r - 1] = s.solve(&b, r - 1)?;
        out.push(BoundSample { bound: rose::lower_bound(r, s0, s2)?, start: a, end: b, q0: s0, q1: s2, length });
    }
    Ok(out)
}

/// Random polyline paths on `M¹(R_r)` from `log(2r−1)·𝟙` to points whose last
/// edge is at most the `ε` that [`rose::infinite_length_epsilon`] returns for
/// `d`. Each must measure at least `d`.
pub fn infinite_length_samples(r: usize, d: f64, n: usize, seed: u64, tol: f64) -> Result<Vec<BoundSample>> {
    let (eps, x) = rose::infinite_length_epsilon(r, d)?;
    let s = RoseSurface::new(r)?;
    let base = (2.0 * r as f64 - 1.0).ln();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        // Free edges at least X + 2.1 push the solved edge below ε.
        let mut end: Vec<f64> = (0..r).map(|_| x + 2.1 + rng.random_range(0.0..20.0)).collect();
        end[r - 1] = 0.0;
        let mut nodes = vec![vec![base; r]];
        for _ in 0..rng.random_range(0..3usize) {
            let mut v: Vec<f64> = (0..r).map(|_| rng.random_range(base..x + 25.0)).collect();
            v[r - 1] = 0.0;
            nodes.push(v);
        }
        nodes.push(end);
        let paths = polyline(&nodes, r - 1)?;
        let last = paths.last().expect("two nodes").point(&s, 1.0)?;
        if !(last[r - 1] <= eps) {
            return Err(Error::Numeric(format!("endpoint edge {} exceeds ε = {eps:e}", last[r - 1])));
        }
        let mut length = 0.0;
        for p in &paths {
            length += path_length(&s, p, Metric::Entropy, tol)?;
        }
        out.push(BoundSample { start: vec![base; r], end: last, q0: base, q1: eps, length, bound: d });
    }
    Ok(out)
}
