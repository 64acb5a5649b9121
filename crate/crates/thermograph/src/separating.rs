//! Graphs with a separating edge `e₀` joining subgraphs `G₁` and `G₂`, where
//! `F_G = F_{G₁}F_{G₂} − exp(−2ℓ⁰)Y`.

use crate::cycles::{delta_get, f_via_det, CycleComplex};
use crate::error::{Error, Result};
use crate::graph::{standard_graph, Family, Graph, LengthFunction, UnionFind};
use crate::metrics::{path_length, Metric, MetricPath, Profile, Surface};
use crate::spectral::MatrixKind;

/// Side values at or below this are treated as zero.
pub const SIDE_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct SeparatedGraph {
    graph: Graph,
    complex: CycleComplex,
    bridge: usize,
    side1: Vec<usize>,
    side2: Vec<usize>,
}

impl SeparatedGraph {
    /// Splits `graph` along `bridge`; side 1 contains the origin of the bridge.
    pub fn new(graph: Graph, bridge: usize, kind: MatrixKind) -> Result<Self> {
        if bridge >= graph.num_edges() {
            return Err(Error::Config(format!("bridge {bridge} out of range")));
        }
        if !graph.is_connected() || !graph.is_separating(bridge) {
            return Err(Error::InvalidGraph(format!(
                "edge {} does not separate {}",
                graph.edge_ids()[bridge],
                graph.name()
            )));
        }
        let mut uf = UnionFind::new(graph.num_vertices());
        for k in (0..graph.num_edges()).filter(|&k| k != bridge) {
            let (a, b) = graph.ends(k);
            uf.union(a, b);
        }
        let root1 = uf.find(graph.ends(bridge).0);
        let (side1, side2): (Vec<usize>, Vec<usize>) =
            (0..graph.num_edges()).filter(|&k| k != bridge).partition(|&k| uf.find(graph.ends(k).0) == root1);
        if side1.is_empty() || side2.is_empty() {
            return Err(Error::InvalidGraph("both sides of the bridge need edges".into()));
        }
        let complex = CycleComplex::build(&graph, kind)?;
        Ok(SeparatedGraph { graph, complex, bridge, side1, side2 })
    }

    /// The standard graphs with a separating edge: barbell and `g:n1,n2`.
    pub fn from_family(family: &Family, kind: MatrixKind) -> Result<Self> {
        let g = standard_graph(family)?;
        match family {
            Family::Barbell | Family::Separated(..) => {
                let bridge = g.num_edges() - 1;
                SeparatedGraph::new(g, bridge, kind)
            }
            _ => Err(Error::Config(format!("{family} has no separating edge"))),
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn complex(&self) -> &CycleComplex {
        &self.complex
    }

    pub fn bridge(&self) -> usize {
        self.bridge
    }

    pub fn side1(&self) -> &[usize] {
        &self.side1
    }

    pub fn side2(&self) -> &[usize] {
        &self.side2
    }

    /// Ranks of the two sides.
    pub fn side_ranks(&self) -> (i64, i64) {
        let rank = |edges: &[usize]| self.graph.subgraph(edges, "side").rank();
        (rank(&self.side1), rank(&self.side2))
    }

    /// `F_{G_s}` of one side (1 or 2), read off the complex of `G` with the
    /// rest of the graph at infinite length.
    pub fn side_value(&self, side: u8, l: &[f64]) -> f64 {
        let keep = if side == 1 { &self.side1 } else { &self.side2 };
        let mut m = vec![f64::INFINITY; l.len()];
        for &k in keep {
            m[k] = l[k];
        }
        self.complex.value(&m)
    }

    /// `Y(ℓ) = −Σ_{Δ(e₀)=2} (−1)^{|Δ|} exp(−ℓ(Δ) + 2ℓ⁰)`, independent of `ℓ⁰`.
    pub fn y(&self, l: &[f64]) -> f64 {
        -self.complex.dependent_coefficients(l, self.bridge).2
    }

    /// `F_G` minus its factorization, with `F_G` from the determinant.
    pub fn factorization_residual(&self, l: &[f64]) -> Result<f64> {
        let lf = LengthFunction::strict(l.to_vec())?;
        let det = f_via_det(&self.graph, &lf, self.complex.kind());
        let u0 = (-l[self.bridge]).exp();
        let fact = self.side_value(1, l) * self.side_value(2, l) - u0 * u0 * self.y(l);
        Ok((det - fact).abs())
    }

    /// `ℓ⁰ = ½ log(Y/(F_{G₁}F_{G₂}))`; `ℓ[bridge]` is ignored.
    ///
    /// A side with `F_{G_s} ≤ SIDE_TOL` counts as unit entropy: at that level
    /// the sign of `F_{G_s}` is roundoff.
    pub fn solve_bridge(&self, l: &[f64]) -> Result<f64> {
        let (f1, f2) = (self.side_value(1, l), self.side_value(2, l));
        if !(f1 > SIDE_TOL && f2 > SIDE_TOL) {
            return Err(Error::NoCompletion(format!(
                "a side already has entropy at least 1 (F₁ = {f1:e}, F₂ = {f2:e})"
            )));
        }
        let f12 = f1 * f2;
        let y = self.y(l);
        let x = 0.5 * (y / f12).ln();
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::NoCompletion(format!("the bridge would need length {x}")));
        }
        Ok(x)
    }
}

impl Surface for SeparatedGraph {
    fn dim(&self) -> usize {
        self.complex.num_edges()
    }

    fn value(&self, l: &[f64]) -> f64 {
        self.complex.value(l)
    }

    fn gradient(&self, l: &[f64]) -> Vec<f64> {
        self.complex.gradient(l)
    }

    fn hessian(&self, l: &[f64]) -> Vec<Vec<f64>> {
        self.complex.hessian(l)
    }

    fn pairing_volume(&self, l: &[f64]) -> f64 {
        self.complex.pairing_volume(l)
    }

    fn pairing_hessian(&self, l: &[f64], v: &[f64]) -> f64 {
        self.complex.pairing_hessian(l, v)
    }

    fn solve(&self, l: &[f64], dep: usize) -> Result<f64> {
        if dep == self.bridge {
            self.solve_bridge(l)
        } else {
            self.complex.solve_dependent(l, dep)
        }
    }
}

/// `Δ(e₀) ∈ {0, 2}` on every monomial.
pub fn bridge_multiplicities_even(sg: &SeparatedGraph) -> bool {
    sg.complex().monomials().iter().all(|m| delta_get(m.delta, sg.bridge()) != 1)
}

/// The path sending side 1 to the unit-entropy point `target` (lengths
/// `log x_i`) along `log(x_i + 1 − t)`, side 2 fixed, bridge solved; the bridge
/// length diverges as `t → 1`.
pub fn escape_path_separating(sg: &SeparatedGraph, target: &[f64], side2: &[f64], t_max: f64) -> Result<MetricPath> {
    if target.len() != sg.side1().len() || side2.len() != sg.side2().len() {
        return Err(Error::Config("side length vectors do not match the graph".into()));
    }
    if !(0.0..1.0).contains(&t_max) {
        return Err(Error::Config(format!("t_max must lie in [0, 1), got {t_max}")));
    }
    if target.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidLength("target lengths must be finite and positive".into()));
    }
    let mut profiles = vec![None; sg.dim()];
    for (&k, &x) in sg.side1().iter().zip(target) {
        profiles[k] = Some(Profile::LogAffine { c: 0.0, k: 1.0, a: x.exp() + 1.0, b: -1.0 });
    }
    for (&k, &x) in sg.side2().iter().zip(side2) {
        profiles[k] = Some(Profile::Constant(x));
    }
    Ok(MetricPath::new(profiles, 0.0, t_max)?.with_singular_end(1.0))
}

/// Largest bridge length used to stand in for the stratum `ℓ⁰ = ∞`.
pub const BRIDGE_CAP: f64 = 40.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ShortcutRow {
    pub delta: f64,
    /// Largest bridge length met at the loop corners.
    pub max_bridge: f64,
    pub up: f64,
    pub across: f64,
    pub down: f64,
}

impl ShortcutRow {
    pub fn total(&self) -> f64 {
        self.up + self.across + self.down
    }
}

/// One shortcut loop: side 1 fixed at `(1 + δ)·side1_unit` (entropy just
/// below 1), side-2 lengths grow linearly by `lift` starting from `from`,
/// change shape to `to + lift`, and come back down to `to`. The bridge is
/// solved throughout and must stay within [`BRIDGE_CAP`].
pub fn shortcut_loop(
    sg: &SeparatedGraph,
    side1_unit: &[f64],
    from: &[f64],
    to: &[f64],
    lift: f64,
    delta: f64,
    tol: f64,
) -> Result<ShortcutRow> {
    if !(delta > 0.0) {
        return Err(Error::Config(format!("δ must be positive, got {delta}")));
    }
    if !(lift >= 0.0) {
        return Err(Error::Config(format!("lift must be nonnegative, got {lift}")));
    }
    let n = sg.dim();
    let mut base = vec![1.0; n];
    for (&k, &x) in sg.side1().iter().zip(side1_unit) {
        base[k] = (1.0 + delta) * x;
    }
    let at = |side2: &[f64], lift: f64| {
        let mut l = base.clone();
        for (&k, &x) in sg.side2().iter().zip(side2) {
            l[k] = x + lift;
        }
        l
    };
    let corners = [at(from, 0.0), at(from, lift), at(to, lift), at(to, 0.0)];
    let mut max_bridge: f64 = 0.0;
    for c in &corners {
        max_bridge = max_bridge.max(sg.solve_bridge(c)?);
    }
    if max_bridge > BRIDGE_CAP {
        return Err(Error::Numeric(format!("bridge length {max_bridge} exceeds the cap {BRIDGE_CAP}")));
    }
    let leg = |a: &[f64], b: &[f64]| -> Result<f64> {
        let mut profiles = vec![None; n];
        for k in (0..n).filter(|&k| k != sg.bridge()) {
            profiles[k] = Some(Profile::segment(a[k], b[k], 0.0, 1.0));
        }
        path_length(sg, &MetricPath::new(profiles, 0.0, 1.0)?, Metric::Entropy, tol)
    };
    Ok(ShortcutRow {
        delta,
        max_bridge,
        up: leg(&corners[0], &corners[1])?,
        across: leg(&corners[1], &corners[2])?,
        down: leg(&corners[2], &corners[3])?,
    })
}

/// Least-squares fit of `L(δ) ≈ L₀ + A√δ + Bδ` to the loop totals; returns
/// `L₀`, the extrapolated length at `δ = 0`. Needs three distinct `δ`.
pub fn extrapolate_to_zero(rows: &[ShortcutRow]) -> Result<f64> {
    let mut ds: Vec<f64> = rows.iter().map(|r| r.delta).collect();
    ds.sort_by(f64::total_cmp);
    ds.dedup();
    if ds.len() < 3 {
        return Err(Error::Numeric("need three distinct δ to extrapolate".into()));
    }
    let m = nalgebra::DMatrix::from_fn(rows.len(), 3, |i, j| rows[i].delta.sqrt().powi(j as i32));
    let y = nalgebra::DVector::from_iterator(rows.len(), rows.iter().map(ShortcutRow::total));
    let mtm = m.transpose() * &m;
    let sol = mtm
        .lu()
        .solve(&(m.transpose() * y))
        .filter(|s| s.iter().all(|x| x.is_finite()))
        .ok_or_else(|| Error::Numeric("singular extrapolation system".into()))?;
    Ok(sol[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ln(x: f64) -> f64 {
        x.ln()
    }

    fn g22(kind: MatrixKind) -> SeparatedGraph {
        SeparatedGraph::from_family(&Family::Separated(2, 2), kind).unwrap()
    }

    #[test]
    fn sides_are_recorded() {
        let sg = g22(MatrixKind::Quotient);
        assert_eq!(sg.side1(), &[0, 1]);
        assert_eq!(sg.side2(), &[2, 3]);
        assert_eq!(sg.bridge(), 4);
        assert_eq!(sg.side_ranks(), (2, 2));
        let b = SeparatedGraph::from_family(&Family::Barbell, MatrixKind::Full).unwrap();
        assert_eq!(b.side_ranks(), (1, 1));
        assert!(SeparatedGraph::from_family(&Family::Rose(2), MatrixKind::Full).is_err());
        let g = standard_graph(&Family::Separated(2, 2)).unwrap();
        assert!(SeparatedGraph::new(g, 0, MatrixKind::Full).is_err());
    }

    #[test]
    fn bridge_multiplicities() {
        for kind in [MatrixKind::Full, MatrixKind::Quotient] {
            assert!(bridge_multiplicities_even(&g22(kind)));
            let b = SeparatedGraph::from_family(&Family::Barbell, kind).unwrap();
            assert!(bridge_multiplicities_even(&b));
        }
    }

    #[test]
    fn barbell_y_and_factorization() {
        let b = SeparatedGraph::from_family(&Family::Barbell, MatrixKind::Full).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let l: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..4.0)).collect();
            let (x, y, z) = ((-l[0]).exp(), (-l[1]).exp(), (-l[2]).exp());
            assert!((b.y(&l) - 4.0 * x * y * (1.0 - x) * (1.0 - y)).abs() < 1e-14);
            let poly = 1.0 - (2.0 * x + 2.0 * y + 4.0 * x * y * z * z)
                + (x * x + y * y + 4.0 * x * y + 4.0 * x * x * y * z * z + 4.0 * x * y * y * z * z)
                - (2.0 * x * x * y + 2.0 * x * y * y + 4.0 * x * x * y * y * z * z)
                + x * x * y * y;
            let fact = b.side_value(1, &l) * b.side_value(2, &l) - z * z * b.y(&l);
            assert!((poly - fact).abs() < 1e-12);
            assert!(b.factorization_residual(&l).unwrap() < 1e-12);
        }
    }

    #[test]
    fn g22_factorization_and_y() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for kind in [MatrixKind::Full, MatrixKind::Quotient] {
            let sg = g22(kind);
            for _ in 0..100 {
                let mut l: Vec<f64> = (0..5).map(|_| rng.random_range(0.1..4.0)).collect();
                assert!(sg.factorization_residual(&l).unwrap() < 1e-11);
                let y = sg.y(&l);
                assert!(y >= 0.0);
                l[4] = 1.0;
                let a = sg.y(&l);
                l[4] = 5.0;
                assert!((a - sg.y(&l)).abs() < 1e-12 * a.max(1.0));
            }
            let mut l = vec![ln(4.0); 5];
            l[4] = f64::INFINITY;
            let f12 = sg.side_value(1, &l) * sg.side_value(2, &l);
            assert_eq!(sg.value(&l), f12);
            assert!(sg.y(&[ln(3.0); 5]) > 0.0);
            assert_eq!(sg.y(&[ln(3.0), ln(3.0), f64::INFINITY, f64::INFINITY, 1.0]), 0.0);
        }
    }

    #[test]
    fn bridge_solves() {
        for kind in [MatrixKind::Full, MatrixKind::Quotient] {
            let sg = g22(kind);
            let mut l = vec![ln(4.0); 5];
            let x = sg.solve_bridge(&l).unwrap();
            l[4] = x;
            assert!(sg.value(&l).abs() < 1e-10);
            assert!((x - sg.complex().solve_dependent(&l, 4).unwrap()).abs() < 1e-12);
            let mut bad = vec![ln(3.0), ln(3.0), ln(4.0), ln(4.0), 1.0];
            assert!(matches!(sg.solve_bridge(&bad), Err(Error::NoCompletion(_))));
            bad[0] = 1.0;
            assert!(sg.solve_bridge(&bad).is_err());
            // Approaching unit entropy on side 1 lengthens the bridge.
            let mut prev = 0.0;
            for s in [2.0, 1.5, 1.2, 1.05, 1.01, 1.001] {
                let l = [s * ln(3.0), s * ln(3.0), ln(4.0), ln(4.0), 0.0];
                let x = sg.solve_bridge(&l).unwrap();
                assert!(x > prev);
                prev = x;
            }
        }
    }

    #[test]
    fn full_rose_side_value() {
        let sg = g22(MatrixKind::Full);
        let l = vec![ln(4.0); 5];
        let (x, y) = (0.25f64, 0.25f64);
        // det(I − A) for the full 2-rose: F̄₂ times the loop factors.
        let full = (1.0 - x - y - 3.0 * x * y) * (1.0 - x) * (1.0 - y);
        assert!((sg.side_value(1, &l) - full).abs() < 1e-14);
        assert!((full - 0.75 * 0.75 * 5.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn stratum_pairing_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sg = g22(MatrixKind::Quotient);
        let c = sg.complex();
        for _ in 0..50 {
            let mut l: Vec<f64> = (0..5).map(|_| rng.random_range(0.8..4.0)).collect();
            l[4] = f64::INFINITY;
            let side = |s: u8| {
                let keep = if s == 1 { sg.side1() } else { sg.side2() };
                let mut m = vec![f64::INFINITY; 5];
                for &k in keep {
                    m[k] = l[k];
                }
                (sg.side_value(s, &l), c.pairing_volume(&m))
            };
            let ((f1, p1), (f2, p2)) = (side(1), side(2));
            let lhs = c.pairing_volume(&l);
            assert!((lhs - (f2 * p1 + f1 * p2)).abs() < 1e-10);
        }
        // Both sides at unit entropy: the pairing vanishes.
        let l = [ln(3.0), ln(3.0), ln(3.0), ln(3.0), f64::INFINITY];
        assert!(c.pairing_volume(&l).abs() < 1e-9);
        let l = [ln(3.0), ln(3.0), ln(5.0), ln(4.0), f64::INFINITY];
        assert!(c.pairing_volume(&l) >= 0.0);
    }

    #[test]
    fn escape_separating_shape() {
        let sg = g22(MatrixKind::Quotient);
        let p = escape_path_separating(&sg, &[ln(3.0); 2], &[ln(4.0); 2], 1.0 - 1e-8).unwrap();
        let l0 = p.point(&sg, 0.0).unwrap();
        assert!((l0[0] - ln(4.0)).abs() < 1e-15 && (l0[3] - ln(4.0)).abs() < 1e-15);
        for k in 0..=20 {
            let t = 0.5 + (0.5 - 1e-6) * k as f64 / 20.0;
            let l = p.point(&sg, t).unwrap();
            let q = (-2.0 * l[4]).exp() / (1.0 - t);
            assert!(q > 1e-3 && q < 1e3, "t = {t}: {q}");
        }
        let a = path_length(&sg, &p, Metric::Entropy, 1e-8).unwrap();
        let b = path_length(&sg, &p, Metric::Entropy, 1e-10).unwrap();
        assert!(a.is_finite() && (a - b).abs() < 1e-4);
    }

    #[test]
    fn shortcut_shrinks() {
        let sg = g22(MatrixKind::Quotient);
        let unit = [ln(3.0); 2];
        let from = [1.2; 2];
        let to = [1.5, 1.3];
        let rows: Vec<ShortcutRow> = [0.1, 0.01, 0.001, 1e-4, 1e-5]
            .iter()
            .map(|&d| shortcut_loop(&sg, &unit, &from, &to, 1.0, d, 1e-9).unwrap())
            .collect();
        assert!(rows.windows(2).all(|w| w[0].total() > w[1].total()));
        let l0 = extrapolate_to_zero(&rows[..3]).unwrap();
        assert!(l0.abs() < 1e-2, "{l0}");
        // Deeper rows shrink like √δ.
        let ratio = rows[3].total() / rows[4].total();
        assert!((ratio - 10f64.sqrt()).abs() < 0.05, "{ratio}");
        assert!(extrapolate_to_zero(&rows[..2]).is_err());
        assert!(shortcut_loop(&sg, &unit, &from, &to, 1.0, 0.0, 1e-9).is_err());
    }
}
