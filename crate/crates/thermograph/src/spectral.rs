//! Transition matrices, Perron roots, pressure and entropy.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Graph, LengthFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixKind {
    Full,
    Quotient,
}

/// Unweighted transition data: rows are classes of directed edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionPattern {
    pub kind: MatrixKind,
    /// Directed edges merged into each row, ascending.
    pub classes: Vec<Vec<usize>>,
    /// Undirected edge carried by each row.
    pub labels: Vec<usize>,
    /// Row-major transition counts.
    pub counts: Vec<Vec<u32>>,
}

impl TransitionPattern {
    pub fn new(graph: &Graph, kind: MatrixKind) -> Self {
        let n = graph.num_directed();
        let legal = |d: usize, d2: usize| graph.terminus(d) == graph.origin(d2) && d2 != graph.bar(d);
        let classes: Vec<Vec<usize>> = match kind {
            MatrixKind::Full => (0..n).map(|d| vec![d]).collect(),
            MatrixKind::Quotient => {
                let full = graph.reversal_automorphism().is_some();
                let mut out = Vec::new();
                for k in 0..graph.num_edges() {
                    if full || graph.is_loop(k) {
                        out.push(vec![2 * k, 2 * k + 1]);
                    } else {
                        out.push(vec![2 * k]);
                        out.push(vec![2 * k + 1]);
                    }
                }
                out
            }
        };
        let counts = classes
            .iter()
            .map(|c| {
                let rep = c[0];
                classes.iter().map(|dcls| dcls.iter().filter(|&&d2| legal(rep, d2)).count() as u32).collect()
            })
            .collect();
        let labels = classes.iter().map(|c| c[0] / 2).collect();
        TransitionPattern { kind, classes, labels, counts }
    }

    pub fn size(&self) -> usize {
        self.classes.len()
    }

    /// Whether every row reaches every other row.
    pub fn is_irreducible(&self) -> bool {
        let n = self.size();
        (0..n).all(|s| {
            let mut seen = vec![false; n];
            let mut stack = vec![s];
            let mut count = 0;
            while let Some(i) = stack.pop() {
                for (j, &c) in self.counts[i].iter().enumerate() {
                    if c > 0 && !seen[j] {
                        seen[j] = true;
                        count += 1;
                        stack.push(j);
                    }
                }
            }
            count == n
        })
    }

    /// Weighted matrix with row `i` scaled by `row_weight[labels[i]]`.
    /// `D⁻¹ M D` for `M` weighted by `exp(f)` on rows and `D = diag(exp(f/2))`,
    /// divided by `exp(max f)`. Similar to the row-weighted matrix up to that
    /// factor, with far less spread in its Perron vectors.
    fn balanced(&self, f: &[f64]) -> (WeightedTransitionMatrix, f64) {
        let n = self.size();
        let top = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let half: Vec<f64> = self.labels.iter().map(|&e| 0.5 * (f[e] - top)).collect();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if self.counts[i][j] != 0 {
                    entries[i * n + j] = self.counts[i][j] as f64 * (half[i] + half[j]).exp();
                }
            }
        }
        let m = WeightedTransitionMatrix { kind: self.kind, labels: self.labels.clone(), n, entries };
        (m, top)
    }

    pub fn weighted(&self, row_weight: &[f64]) -> WeightedTransitionMatrix {
        let n = self.size();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            let w = row_weight[self.labels[i]];
            for j in 0..n {
                entries[i * n + j] = self.counts[i][j] as f64 * w;
            }
        }
        WeightedTransitionMatrix { kind: self.kind, labels: self.labels.clone(), n, entries }
    }
}

/// Dense nonnegative matrix with a row-to-edge labelling.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTransitionMatrix {
    pub kind: MatrixKind,
    pub labels: Vec<usize>,
    n: usize,
    entries: Vec<f64>,
}

impl WeightedTransitionMatrix {
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<usize>, kind: MatrixKind) -> Self {
        let n = rows.len();
        WeightedTransitionMatrix { kind, labels, n, entries: rows.iter().flat_map(|r| r.iter().copied()).collect() }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.entries)
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j];
            }
        }
        WeightedTransitionMatrix { kind: self.kind, labels: self.labels.clone(), n, entries }
    }

    /// Row-major text dump, one row per line, values in shortest round-trip form.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format!("{:?}", self.get(i, j))).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    fn mul(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.entries[i * self.n..(i + 1) * self.n];
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }
}

/// `A_{G,f}`: the full matrix with rows weighted by `exp(-f(e))`.
pub fn transition_matrix(graph: &Graph, f: Option<&[f64]>) -> WeightedTransitionMatrix {
    TransitionPattern::new(graph, MatrixKind::Full).weighted(&row_weights(graph, f))
}

/// `Ā_{G,f}`: the quotient matrix with rows weighted by `exp(-f(e))`.
pub fn quotient_matrix(graph: &Graph, f: Option<&[f64]>) -> WeightedTransitionMatrix {
    TransitionPattern::new(graph, MatrixKind::Quotient).weighted(&row_weights(graph, f))
}

fn row_weights(graph: &Graph, f: Option<&[f64]>) -> Vec<f64> {
    match f {
        Some(f) => f.iter().map(|x| (-x).exp()).collect(),
        None => vec![1.0; graph.num_edges()],
    }
}

const MAX_ITER: usize = 5_000;
const REL_TOL: f64 = 1e-13;
/// Relative size below which a Perron vector entry no longer has full
/// precision in its Collatz–Wielandt ratio.
pub const NEGLIGIBLE: f64 = 1e-150;
/// Accepted bracket width once progress has stalled at roundoff level.
const STALL_TOL: f64 = 1e-11;

/// Perron root with a strictly positive eigenvector.
#[derive(Debug, Clone)]
pub struct Perron {
    pub rho: f64,
    pub vector: Vec<f64>,
}

/// Power iteration on `M + σI`, stopped when the Collatz–Wielandt bracket
/// `[min (Mv)_i/v_i, max (Mv)_i/v_i]` is relatively tighter than `1e-13`.
/// The shift tracks half the lower bracket end, which breaks periodicity
/// without swamping a spectral radius far below the largest row sum. States
/// that can no longer reach a weighted cycle (weights underflowed to zero)
/// are left out of the bracket, as are states whose vector entry drops below
/// [`NEGLIGIBLE`] of the largest one.
pub fn perron(m: &WeightedTransitionMatrix) -> Result<Perron> {
    let n = m.size();
    if n == 0 {
        return Err(Error::Numeric("empty matrix".into()));
    }
    let max_row = (0..n).map(|i| (0..n).map(|j| m.get(i, j)).sum::<f64>()).fold(0.0, f64::max);
    if !(max_row > 0.0 && max_row.is_finite()) {
        return Err(Error::Numeric(format!("matrix has row sums {max_row}")));
    }
    let live = live_states(m);
    if !live.iter().any(|&x| x) {
        return Err(Error::Numeric("no cycle carries positive weight".into()));
    }
    let mut v = vec![1.0; n];
    let mut mv = vec![0.0; n];
    let mut best = f64::INFINITY;
    let mut since_best = 0usize;
    for _ in 0..MAX_ITER {
        m.mul(&v, &mut mv);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in (0..n).filter(|&i| live[i] && v[i] > NEGLIGIBLE) {
            let q = mv[i] / v[i];
            lo = lo.min(q);
            hi = hi.max(q);
        }
        let rho = 0.5 * (lo + hi);
        let width = (hi - lo) / rho.abs();
        if !width.is_finite() {
            return Err(Error::Numeric("power iteration produced a non-finite ratio".into()));
        }
        if width < REL_TOL {
            return Ok(Perron { rho, vector: v });
        }
        if width < best * 0.999 {
            best = width;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > 2000 && best < STALL_TOL {
                return Ok(Perron { rho, vector: v });
            }
        }
        let sigma = 0.5 * lo;
        let mut norm = 0.0f64;
        for i in 0..n {
            v[i] = mv[i] + sigma * v[i];
            norm = norm.max(v[i]);
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    perron_dense(m, &live)
}

/// Fallback for nearly reducible matrices, whose blocks have close Perron
/// roots and power iteration crawls: `ρ` from the Schur form, the vector by
/// inverse iteration.
fn perron_dense(m: &WeightedTransitionMatrix, live: &[bool]) -> Result<Perron> {
    let n = m.size();
    let a = m.to_dmatrix();
    let rho = a.clone().complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::NoConvergence(MAX_ITER));
    }
    let shifted = &a - DMatrix::identity(n, n) * (rho * (1.0 + 1e-12));
    let lu = shifted.lu();
    let mut v = DVector::from_element(n, 1.0);
    for _ in 0..50 {
        let Some(x) = lu.solve(&v) else { break };
        let top = x.amax();
        if !(top > 0.0 && top.is_finite()) {
            break;
        }
        let next = x.map(|c| c.abs() / top);
        let done = (&next - &v).amax() < 1e-15;
        v = next;
        if done {
            break;
        }
    }
    let mv = &a * &v;
    let k = v.iamax();
    let refined = mv[k] / v[k];
    // Entries far below the largest carry only absolute accuracy.
    let resid = (0..n).filter(|&i| live[i]).map(|i| (mv[i] - refined * v[i]).abs()).fold(0.0, f64::max);
    if !(resid <= 1e-12 * refined) {
        return Err(Error::NoConvergence(MAX_ITER));
    }
    Ok(Perron { rho: refined, vector: v.iter().copied().collect() })
}

/// States with a positive-weight path into a cycle.
fn live_states(m: &WeightedTransitionMatrix) -> Vec<bool> {
    let n = m.size();
    let mut live = vec![true; n];
    loop {
        let mut changed = false;
        for i in 0..n {
            if live[i] && !(0..n).any(|j| live[j] && m.get(i, j) > 0.0) {
                live[i] = false;
                changed = true;
            }
        }
        if !changed {
            return live;
        }
    }
}

pub fn spectral_radius(m: &WeightedTransitionMatrix) -> Result<f64> {
    perron(m).map(|p| p.rho)
}

/// `𝔓_G(f) = log spec(A_{G,-f})`, evaluated on the quotient matrix.
pub fn pressure(graph: &Graph, f: &[f64]) -> Result<f64> {
    pressure_with(graph, f, MatrixKind::Quotient)
}

pub fn pressure_with(graph: &Graph, f: &[f64], kind: MatrixKind) -> Result<f64> {
    check_finite(graph, f)?;
    let (m, shift) = TransitionPattern::new(graph, kind).balanced(f);
    Ok(spectral_radius(&m)?.ln() + shift)
}

fn check_finite(graph: &Graph, f: &[f64]) -> Result<()> {
    if f.len() != graph.num_edges() {
        return Err(Error::InvalidLength(format!("{} values for {} edges", f.len(), graph.num_edges())));
    }
    if f.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidLength("pressure needs finite values".into()));
    }
    Ok(())
}

/// Pressure and its gradient at `f`, from left and right Perron vectors:
/// `∂𝔓/∂f_e = Σ_{rows k of e} y_k v_k / ⟨y, v⟩`.
pub fn pressure_and_gradient(graph: &Graph, f: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_finite(graph, f)?;
    // Left-right products are unchanged by the balancing similarity.
    let (m, shift) = TransitionPattern::new(graph, MatrixKind::Quotient).balanced(f);
    let right = perron(&m)?;
    let left = perron(&m.transpose())?;
    let dot: f64 = left.vector.iter().zip(&right.vector).map(|(a, b)| a * b).sum();
    if !(dot > 0.0) {
        return Err(Error::Numeric("degenerate Perron vectors".into()));
    }
    let mut grad = vec![0.0; graph.num_edges()];
    for (k, &e) in m.labels.iter().enumerate() {
        grad[e] += left.vector[k] * right.vector[k] / dot;
    }
    Ok((right.rho.ln() + shift, grad))
}

/// `∇𝔓_G` at `f = -ℓ`.
pub fn grad_pressure(graph: &Graph, l: &LengthFunction) -> Result<Vec<f64>> {
    let f: Vec<f64> = l.values().iter().map(|x| -x).collect();
    pressure_and_gradient(graph, &f).map(|(_, g)| g)
}

/// The unique `h > 0` with `𝔓_G(-hℓ) = 0`.
pub fn entropy(graph: &Graph, l: &LengthFunction) -> Result<f64> {
    l.check_graph(graph)?;
    if l.values().iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidLength("entropy needs strict lengths".into()));
    }
    if graph.euler_characteristic() >= 0 {
        return Err(Error::InvalidGraph("entropy needs negative Euler characteristic".into()));
    }
    let lv = l.values();
    let g = |t: f64| -> Result<f64> {
        let f: Vec<f64> = lv.iter().map(|x| -t * x).collect();
        pressure(graph, &f)
    };
    // At t = 1/mean every weight is at least e^{-n}, so nothing underflows.
    let t0 = lv.len() as f64 / lv.iter().sum::<f64>();
    let (mut lo, mut hi) = (t0, t0);
    let g1 = g(t0)?;
    if g1 == 0.0 {
        return Ok(t0);
    }
    let mut steps = 0;
    if g1 > 0.0 {
        while g(hi)? > 0.0 {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if steps > 1100 {
                return Err(Error::Bracket("pressure stays positive".into()));
            }
        }
    } else {
        while g(lo)? < 0.0 {
            hi = lo;
            lo *= 0.5;
            steps += 1;
            if steps > 1100 {
                return Err(Error::Bracket("pressure stays negative".into()));
            }
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..5 {
        let f: Vec<f64> = lv.iter().map(|x| -t * x).collect();
        let (p, grad) = pressure_and_gradient(graph, &f)?;
        if p == 0.0 {
            break;
        }
        let dp: f64 = -grad.iter().zip(lv).map(|(a, b)| a * b).sum::<f64>();
        let next = t - p / dp;
        // Polishing continues below 1e-15 so exact cases land on the rounded root.
        if next == t || !(next > lo * 0.999_999 && next < hi * 1.000_001) {
            break;
        }
        t = next;
    }
    let resid = g(t)?;
    if resid.abs() >= 1e-10 {
        return Err(Error::Bracket(format!("pressure residual {resid:e} at h = {t}")));
    }
    Ok(t)
}

/// `h·ℓ`, which has unit entropy.
pub fn normalize_unit_entropy(graph: &Graph, l: &LengthFunction) -> Result<LengthFunction> {
    let h = entropy(graph, l)?;
    l.scaled(h)
}
