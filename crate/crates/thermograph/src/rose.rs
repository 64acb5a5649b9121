//! Closed forms on the unit-entropy moduli space of the rose `R_r`.
//!
//! With `u_k = exp(-ℓ^k)`, `P = Π(1+u_k)` and `w_k = u_k/(1+u_k)`,
//! `F̄_r = Σ_S (1 − 2|S|) u^S = P(1 − 2W)` where `W = Σ w_k`, and likewise
//! `X_i`, `Y_i`, `X_ij`, `Y_ij` are products times affine functions of partial
//! sums of the `w_k`. Each `1 − 2w_k = tanh(ℓ^k/2)`, so `1 − 2W` is evaluated
//! as `tanh(ℓ^p/2) − 2Σ_{k≠p} w_k` with `p` the shortest edge, which keeps
//! full relative precision when one edge is very short.
//!
//! Lengths may be `∞` (a term containing an infinite edge is 0). Indices are
//! 0-based.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{standard_graph, Family, LengthFunction};
use crate::metrics::{path_length, Metric, MetricPath, Profile, Surface};
use crate::spectral::entropy;

fn u(l: f64) -> f64 {
    (-l).exp()
}

fn w(l: f64) -> f64 {
    1.0 / (1.0 + l.exp())
}

fn product(l: &[f64], skip: &[usize]) -> f64 {
    (0..l.len()).filter(|k| !skip.contains(k)).map(|k| 1.0 + u(l[k])).product()
}

fn w_sum(l: &[f64], skip: &[usize]) -> f64 {
    (0..l.len()).filter(|k| !skip.contains(k)).map(|k| w(l[k])).sum()
}

/// `1 − 2Σ_{k∉skip} w_k`, pivoting on the shortest edge.
fn one_minus_2w(l: &[f64], skip: &[usize]) -> f64 {
    let idx = (0..l.len()).filter(|k| !skip.contains(k));
    let Some(p) = idx.clone().min_by(|&a, &b| l[a].total_cmp(&l[b])) else {
        return 1.0;
    };
    (0.5 * l[p]).tanh() - 2.0 * idx.filter(|&k| k != p).map(|k| w(l[k])).sum::<f64>()
}

/// `F̄_r(ℓ) = Σ_{S⊆[r]} (1 − 2|S|) exp(−ℓ^S)`.
pub fn f_rose(l: &[f64]) -> f64 {
    product(l, &[]) * one_minus_2w(l, &[])
}

/// `Σ_{S⊆[r]−{i}} (1 − 2|S|) exp(−ℓ^S)`.
pub fn x_i(l: &[f64], i: usize) -> f64 {
    product(l, &[i]) * one_minus_2w(l, &[i])
}

/// `Σ_{S⊆[r]−{i}} (1 + 2|S|) exp(−ℓ^S)`.
pub fn y_i(l: &[f64], i: usize) -> f64 {
    product(l, &[i]) * (1.0 + 2.0 * w_sum(l, &[i]))
}

/// `Σ_{S⊆[r]−{i,j}} (1 + 2|S|) exp(−ℓ^S)`.
pub fn x_ij(l: &[f64], i: usize, j: usize) -> f64 {
    product(l, &[i, j]) * (1.0 + 2.0 * w_sum(l, &[i, j]))
}

/// `Σ_{S⊆[r]−{i,j}} (3 + 2|S|) exp(−ℓ^S)`.
pub fn y_ij(l: &[f64], i: usize, j: usize) -> f64 {
    product(l, &[i, j]) * (3.0 + 2.0 * w_sum(l, &[i, j]))
}

/// The length of edge `i` completing `ℓ` to unit entropy, `log(Y_i/X_i)`;
/// `ℓ[i]` is ignored.
pub fn solve_edge(l: &[f64], i: usize) -> Result<f64> {
    if i >= l.len() {
        return Err(Error::Config(format!("edge {i} out of range for rank {}", l.len())));
    }
    let d = one_minus_2w(l, &[i]);
    if !(d > 0.0) {
        return Err(Error::NoCompletion(format!("the other edges already have entropy at least 1 (X_{i} ∝ {d:e})")));
    }
    // Y_i/X_i = 1 + 4W/(1 − 2W) with W over the other edges.
    let x = (4.0 * w_sum(l, &[i]) / d).ln_1p();
    if !(x > 0.0) {
        return Err(Error::NoCompletion(format!("edge {i} would need length {x}")));
    }
    Ok(x)
}

/// `log((L + 2r − 1)/(L − (2r − 3)))`: the last length when the other
/// `r − 1` lengths all equal `log L`.
pub fn symmetric_completion(r: usize, big_l: f64) -> Result<f64> {
    let (lo, hi) = (2.0 * r as f64 - 3.0, 2.0 * r as f64 - 1.0);
    if r < 2 || !(big_l > lo) {
        return Err(Error::NoCompletion(format!("need L > {lo}, got {big_l}")));
    }
    Ok(((big_l + hi) / (big_l - lo)).ln())
}

/// The unit-entropy hypersurface of `R_r` through its closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoseSurface {
    r: usize,
}

impl RoseSurface {
    pub fn new(r: usize) -> Result<Self> {
        if !(1..=32).contains(&r) {
            return Err(Error::Config(format!("rose rank {r} outside 1..=32")));
        }
        Ok(RoseSurface { r })
    }

    pub fn rank(&self) -> usize {
        self.r
    }
}

impl Surface for RoseSurface {
    fn dim(&self) -> usize {
        self.r
    }

    fn value(&self, l: &[f64]) -> f64 {
        f_rose(l)
    }

    fn gradient(&self, l: &[f64]) -> Vec<f64> {
        (0..self.r).map(|i| u(l[i]) * y_i(l, i)).collect()
    }

    fn hessian(&self, l: &[f64]) -> Vec<Vec<f64>> {
        let r = self.r;
        let mut h = vec![vec![0.0; r]; r];
        for i in 0..r {
            h[i][i] = -u(l[i]) * y_i(l, i);
            for j in i + 1..r {
                let x = -u(l[i]) * u(l[j]) * y_ij(l, i, j);
                h[i][j] = x;
                h[j][i] = x;
            }
        }
        h
    }

    fn solve(&self, l: &[f64], dep: usize) -> Result<f64> {
        solve_edge(l, dep)
    }
}

/// The path `ℓ^i_t = log(2(r − t) − 1)` for `i < r`, last edge dependent,
/// on `[0, t_max]` with the speed singular at `t = 1`.
pub fn escape_path(r: usize, t_max: f64) -> Result<MetricPath> {
    if r < 3 {
        return Err(Error::Config("the escape path needs rank at least 3".into()));
    }
    if !(0.0..1.0).contains(&t_max) {
        return Err(Error::Config(format!("t_max must lie in [0, 1), got {t_max}")));
    }
    let n = 2.0 * r as f64 - 1.0;
    let mut profiles = vec![Some(Profile::LogAffine { c: 0.0, k: 1.0, a: n, b: -2.0 }); r];
    profiles[r - 1] = None;
    Ok(MetricPath::new(profiles, 0.0, t_max)?.with_singular_end(1.0))
}

/// `ℓ^r_t = log((2r − 1 − t)/(1 − t))` along [`escape_path`].
pub fn escape_closed_form(r: usize, t: f64) -> f64 {
    ((2.0 * r as f64 - 1.0 - t) / (1.0 - t)).ln()
}

/// `2√C` with `C = 2(2r−1)/((r−1)² log(2r−3))`, bounding the escape path length.
pub fn escape_envelope(r: usize) -> f64 {
    let rf = r as f64;
    let c = 2.0 * (2.0 * rf - 1.0) / ((rf - 1.0).powi(2) * (2.0 * rf - 3.0).ln());
    2.0 * c.sqrt()
}

/// `(B₁, B₂) = (4(r−1), 2^{r+3}(2r−1))`.
pub fn sqrt_bound_constants(r: usize) -> (f64, f64) {
    let rf = r as f64;
    (4.0 * (rf - 1.0), 2f64.powi(r as i32 + 3) * (2.0 * rf - 1.0))
}

/// Smallest `L` (rounded up to 1e−6) with `max{2^r(2r−3), 288r}·exp(−L) ≤ 1`.
pub fn l_r(r: usize) -> f64 {
    let rf = r as f64;
    let m = (2f64.powi(r as i32) * (2.0 * rf - 3.0)).max(288.0 * rf);
    (m.ln() * 1e6).ceil() / 1e6
}

/// Lower bound on the length of a path whose shortest non-last edge grows
/// monotonically from `start ≥ L_r` to `end`.
pub fn lower_bound(r: usize, start: f64, end: f64) -> Result<f64> {
    if end < start {
        return Err(Error::Config(format!("end {end} precedes start {start}")));
    }
    let (b1, b2) = sqrt_bound_constants(r);
    Ok(((b1 * end + b2).sqrt() - (b1 * start + b2).sqrt()) / (2.0 * 2f64.sqrt() * b1))
}

/// An `ε` such that every unit-entropy point with an edge of length `≤ ε`
/// lies at distance at least `d` from `log(2r−1)·𝟙`.
///
/// Returns `(ε, X)` with `X = −log(exp(ε) − 1)`, which can exceed the range
/// where `ε` itself is informative.
pub fn infinite_length_epsilon(r: usize, d: f64) -> Result<(f64, f64)> {
    if r < 2 || !(d > 0.0) {
        return Err(Error::Config(format!("need r ≥ 2 and D > 0, got r = {r}, D = {d}")));
    }
    let (b1, b2) = sqrt_bound_constants(r);
    let l0 = (4.0 * r as f64 - 5.0).ln().max(l_r(r));
    let s = 2.0 * 2f64.sqrt() * b1 * d + (b1 * l0 + b2).sqrt();
    let x = (s * s - b2) / b1;
    Ok(((-x).exp().ln_1p(), x))
}

/// `ℓ^j` of the two-edge stratum point with `ℓ^i = ε`:
/// `log((exp(ε) + 3)/(exp(ε) − 1))`.
pub fn two_edge_partner(eps: f64) -> f64 {
    let m = eps.exp_m1();
    ((m + 4.0) / m).ln()
}

/// A point of the extended moduli space: unit entropy on its finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct RosePoint {
    lengths: Vec<f64>,
}

impl RosePoint {
    pub fn new(lengths: Vec<f64>) -> Result<Self> {
        if lengths.iter().any(|x| x.is_nan() || *x <= 0.0) {
            return Err(Error::InvalidLength("rose point lengths must lie in (0, ∞]".into()));
        }
        let p = RosePoint { lengths };
        if p.support().len() < 2 {
            return Err(Error::InvalidLength("support has fewer than two edges".into()));
        }
        let f = f_rose(&p.lengths);
        if f.abs() >= 1e-9 {
            return Err(Error::InvalidLength(format!("F̄ = {f:e} off the extended surface")));
        }
        Ok(p)
    }

    pub fn rank(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.lengths.len()).filter(|&k| self.lengths[k].is_finite()).collect()
    }
}

/// Places a unit-entropy point of `R_|S|` on the stratum where exactly the
/// edges of `S` are finite.
pub fn strata_embed(r: usize, s: &[usize], l_s: &[f64]) -> Result<RosePoint> {
    let mut sorted = s.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != s.len() || s.iter().any(|&k| k >= r) {
        return Err(Error::Config(format!("bad support {s:?} for rank {r}")));
    }
    if s.len() < 2 {
        return Err(Error::InvalidLength("strata with fewer than two edges are empty".into()));
    }
    if l_s.len() != s.len() || l_s.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::InvalidLength("stratum lengths must be finite and positive".into()));
    }
    let mut lengths = vec![f64::INFINITY; r];
    for (&k, &x) in s.iter().zip(l_s) {
        lengths[k] = x;
    }
    RosePoint::new(lengths)
}

/// Entropy of the finite part, computed on the supported subrose; 0 when at
/// most one edge is finite.
pub fn extended_entropy(lengths: &[f64]) -> Result<f64> {
    let finite: Vec<f64> = lengths.iter().copied().filter(|x| x.is_finite()).collect();
    if finite.len() <= 1 {
        return Ok(0.0);
    }
    let g = standard_graph(&Family::Rose(finite.len()))?;
    entropy(&g, &LengthFunction::strict(finite)?)
}

/// The slice path from `ℓ` inside `{ℓ^i = ε}`: every edge other than `i` and
/// the shortest remaining edge `j` grows at unit rate; `j` is dependent.
pub fn slice_path(l: &[f64], i: usize, t_end: f64) -> Result<MetricPath> {
    let r = l.len();
    if r < 3 || i >= r {
        return Err(Error::Config(format!("slice path needs r ≥ 3 and i < r, got r = {r}, i = {i}")));
    }
    let j = (0..r).filter(|&k| k != i).min_by(|&a, &b| l[a].total_cmp(&l[b])).expect("r ≥ 3");
    let profiles = (0..r)
        .map(|k| match k {
            _ if k == i => Some(Profile::Constant(l[i])),
            _ if k == j => None,
            _ => Some(Profile::Linear { a: l[k], b: 1.0 }),
        })
        .collect();
    MetricPath::new(profiles, 0.0, t_end)
}

/// Parameter span of slice paths; the speed decays like `exp(−t/2)`.
pub const SLICE_SPAN: f64 = 60.0;

/// Length of the slice path from `ℓ` to its limit on a two-edge stratum.
pub fn slice_leg(l: &[f64], i: usize, tol: f64) -> Result<f64> {
    let s = RoseSurface::new(l.len())?;
    path_length(&s, &slice_path(l, i, SLICE_SPAN)?, Metric::Entropy, tol)
}

/// The slice point with `ℓ^i = ε` and all other lengths equal.
pub fn symmetric_slice_point(r: usize, i: usize, eps: f64) -> Result<Vec<f64>> {
    let f = |c: f64| {
        let mut l = vec![c; r];
        l[i] = eps;
        f_rose(&l)
    };
    let (mut lo, mut hi) = (1e-9, 800.0);
    if !(f(lo) < 0.0 && f(hi) > 0.0) {
        return Err(Error::Bracket(format!("no symmetric slice point at ε = {eps}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut l = vec![0.5 * (lo + hi); r];
    l[i] = eps;
    Ok(l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceEstimate {
    pub eps: f64,
    /// `2·max_a L_a + 2·L_sym`, bounding the slice diameter.
    pub upper: f64,
    /// Largest slice-path length over the sampled points and the symmetric point.
    pub max_leg: f64,
    pub sym_leg: f64,
    /// `1/(−log(exp(ε) − 1))`.
    pub bound_form: f64,
    pub samples: usize,
    /// Rejected draws with no completion.
    pub rejected: usize,
}

/// Upper bound on the diameter of the slice `{ℓ^i = ε}` of `M¹(R_r)`.
///
/// Each sampled slice point is joined to its two-edge stratum limit by a slice
/// path, and the stratum limits are all joined through the symmetric slice
/// point, so the diameter is at most `2·max_a L_a + 2·L_sym`.
pub fn slice_diameter(r: usize, i: usize, eps: f64, samples: usize, seed: u64, tol: f64) -> Result<SliceEstimate> {
    if !(eps > 0.0 && eps < 2f64.ln()) {
        return Err(Error::Config(format!("ε must lie in (0, log 2), got {eps}")));
    }
    if r < 2 || i >= r {
        return Err(Error::Config(format!("need r ≥ 2 and i < r, got r = {r}, i = {i}")));
    }
    let bound_form = 1.0 / -(eps.exp_m1().ln());
    if r == 2 {
        return Ok(SliceEstimate { eps, upper: 0.0, max_leg: 0.0, sym_leg: 0.0, bound_form, samples: 0, rejected: 0 });
    }
    let sym = symmetric_slice_point(r, i, eps)?;
    let sym_leg = slice_leg(&sym, i, tol)?;
    let solved = (0..r).rev().find(|&k| k != i).expect("r ≥ 2");
    let lo = ((2.0 * r as f64 - 3.0).ln() + 1e-3).ln();
    let hi = 20f64.ln();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // The symmetric point is itself a slice point.
    let mut max_leg = sym_leg;
    let mut rejected = 0;
    for _ in 0..samples {
        let mut tries = 0;
        let l = loop {
            tries += 1;
            if tries > 100_000 {
                return Err(Error::NoCompletion(format!("could not sample the slice at ε = {eps}")));
            }
            let mut l: Vec<f64> = (0..r).map(|_| rng.random_range(lo..hi).exp()).collect();
            l[i] = eps;
            match solve_edge(&l, solved) {
                Ok(x) => {
                    l[solved] = x;
                    break l;
                }
                Err(_) => rejected += 1,
            }
        };
        max_leg = max_leg.max(slice_leg(&l, i, tol)?);
    }
    Ok(SliceEstimate { eps, upper: 2.0 * max_leg + 2.0 * sym_leg, max_leg, sym_leg, bound_form, samples, rejected })
}

/// Fits `U(ε) ≈ C·bound_form(ε)` by the geometric mean of the ratios and
/// returns `C` with the worst ratio deviation factor.
pub fn fit_decay(estimates: &[SliceEstimate]) -> (f64, f64) {
    let logs: Vec<f64> = estimates.iter().map(|e| (e.upper / e.bound_form).ln()).collect();
    let c = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
    let worst = estimates
        .iter()
        .map(|e| {
            let q = e.upper / (c * e.bound_form);
            q.max(1.0 / q)
        })
        .fold(1.0, f64::max);
    (c, worst)
}
