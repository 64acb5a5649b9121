use super::norms::Metric;
use super::path::{path_length, MetricPath, Profile};
use super::surface::barycentric_point;
use super::Surface;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Interior nodes of the polygonal path.
    pub nodes: usize,
    /// Maximum number of candidate-path evaluations.
    pub budget: usize,
    pub initial_step: f64,
    pub min_step: f64,
    pub tol: f64,
    pub metric: Metric,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { nodes: 3, budget: 120, initial_step: 0.25, min_step: 1e-3, tol: 1e-9, metric: Metric::Entropy }
    }
}

/// Length of the piecewise path through `nodes`, each segment linear in the
/// free coordinates with `dep` solved; `∞` when a segment leaves the chart.
pub fn polyline_length(s: &dyn Surface, nodes: &[Vec<f64>], dep: usize, metric: Metric, tol: f64) -> f64 {
    let mut total = 0.0;
    for w in nodes.windows(2) {
        match segment_length(s, &w[0], &w[1], dep, metric, tol) {
            Ok(x) => total += x,
            Err(_) => return f64::INFINITY,
        }
    }
    total
}

fn segment_length(s: &dyn Surface, a: &[f64], b: &[f64], dep: usize, metric: Metric, tol: f64) -> Result<f64> {
    let profiles = (0..a.len()).map(|k| (k != dep).then(|| Profile::segment(a[k], b[k], 0.0, 1.0))).collect();
    path_length(s, &MetricPath::new(profiles, 0.0, 1.0)?, metric, tol)
}

fn solved(s: &dyn Surface, mut l: Vec<f64>, dep: usize) -> Result<Vec<f64>> {
    l[dep] = s.solve(&l, dep)?;
    Ok(l)
}

/// Upper bound on the distance between two surface points: the length of the
/// best polygonal path found by coordinate descent on its interior nodes.
pub fn distance_upper_bound(s: &dyn Surface, la: &[f64], lb: &[f64], dep: usize, opts: &SearchOptions) -> Result<f64> {
    if la == lb {
        return Ok(0.0);
    }
    let a = solved(s, la.to_vec(), dep)?;
    let b = solved(s, lb.to_vec(), dep)?;
    let n = opts.nodes;
    // Interior nodes interpolate the free coordinates linearly in u = exp(-ℓ).
    let mut nodes = vec![a.clone()];
    let mut ok = true;
    for k in 1..=n {
        let tau = k as f64 / (n + 1) as f64;
        let l: Vec<f64> = a.iter().zip(&b).map(|(x, y)| -((1.0 - tau) * (-x).exp() + tau * (-y).exp()).ln()).collect();
        match solved(s, l, dep) {
            Ok(l) => nodes.push(l),
            Err(_) => {
                ok = false;
                break;
            }
        }
    }
    nodes.push(b.clone());
    let mut best = if ok { polyline_length(s, &nodes, dep, opts.metric, opts.tol) } else { f64::INFINITY };
    if !best.is_finite() {
        let mid = solved(s, barycentric_point(s)?, dep)?;
        nodes = vec![a, mid, b];
        best = polyline_length(s, &nodes, dep, opts.metric, opts.tol);
        if !best.is_finite() {
            return Err(Error::Numeric("no admissible path between the points".into()));
        }
    }
    let mut evals = 1;
    let mut h = opts.initial_step;
    let interior = nodes.len() - 2;
    while h >= opts.min_step && evals < opts.budget && interior > 0 {
        let mut improved = false;
        'sweep: for i in 1..=interior {
            for e in (0..nodes[i].len()).filter(|&e| e != dep) {
                for sign in [1.0, -1.0] {
                    if evals >= opts.budget {
                        break 'sweep;
                    }
                    let mut cand = nodes[i].clone();
                    cand[e] += sign * h;
                    if !(cand[e] > 0.0) {
                        continue;
                    }
                    let Ok(cand) = solved(s, cand, dep) else { continue };
                    let old = std::mem::replace(&mut nodes[i], cand);
                    evals += 1;
                    let len = polyline_length(s, &nodes, dep, opts.metric, opts.tol);
                    if len < best {
                        best = len;
                        improved = true;
                        break;
                    }
                    nodes[i] = old;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    Ok(best)
}
