//! Simple cycles of the transition digraph, the cycle complex, and exact
//! evaluation of `F_G = det(I - A_{G,ℓ})` with its derivatives.
//!
//! Every simplex contributes `(-1)^{|Δ|} Π u_e^{Δ(e)}` with `u_e = exp(-ℓ_e)`.
//! Simplices with equal multiplicity vectors `Δ` are merged into one
//! monomial, so all evaluations are sums over a short monomial list.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{Graph, LengthFunction};
use crate::spectral::{MatrixKind, TransitionPattern};

pub const DEFAULT_BUDGET: usize = 10_000_000;

/// Work units charged per simplex; each scanned candidate costs one more.
const SIMPLEX_COST: usize = 8;

/// Most cycles whose pairwise compatibility scan fits in the budget.
fn cycle_limit(budget: usize) -> usize {
    (2.0 * SIMPLEX_COST as f64 * budget as f64).sqrt() as usize
}

/// Multiplicities `Δ(e) ∈ {0,1,2}` packed two bits per edge.
pub type Delta = u64;

pub fn delta_get(delta: Delta, e: usize) -> u32 {
    ((delta >> (2 * e)) & 3) as u32
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleCycle {
    /// Digraph vertices (matrix rows), rotated to start at the least one.
    pub vertices: Vec<usize>,
    /// Number of parallel copies: the product of arc multiplicities.
    pub weight: u64,
    pub delta: Delta,
    mask: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub delta: Delta,
    /// `Σ (-1)^{|Δ|}` over the simplices with this multiplicity vector.
    pub coef: i64,
}

#[derive(Debug, Clone)]
pub struct CycleComplex {
    pub pattern: TransitionPattern,
    num_edges: usize,
    cycles: Vec<SimpleCycle>,
    /// Simplex counts by number of cycles, including the empty simplex.
    simplex_counts: Vec<u64>,
    monomials: Vec<Monomial>,
}

impl CycleComplex {
    pub fn build(graph: &Graph, kind: MatrixKind) -> Result<Self> {
        Self::build_with_budget(graph, kind, DEFAULT_BUDGET)
    }

    pub fn build_with_budget(graph: &Graph, kind: MatrixKind, budget: usize) -> Result<Self> {
        let pattern = TransitionPattern::new(graph, kind);
        if pattern.size() > 64 {
            return Err(Error::InvalidGraph("transition digraph exceeds 64 vertices".into()));
        }
        let mut cycles = johnson(&pattern, budget)?;
        for c in &mut cycles {
            c.delta = c.vertices.iter().map(|&v| 1u64 << (2 * pattern.labels[v])).sum();
        }
        cycles.sort_by(|a, b| (a.vertices.len(), &a.vertices).cmp(&(b.vertices.len(), &b.vertices)));
        let mut walk = SimplexWalk {
            cycles: &cycles,
            acc: HashMap::from([(0, 1)]),
            counts: vec![1],
            work: SIMPLEX_COST,
            limit: SIMPLEX_COST.saturating_mul(budget),
            budget,
        };
        let all: Vec<usize> = (0..cycles.len()).collect();
        walk.extend(&all, 0, 1, 0)?;
        let (acc, counts) = (walk.acc, walk.counts);
        let mut monomials: Vec<Monomial> =
            acc.into_iter().filter(|&(_, c)| c != 0).map(|(delta, coef)| Monomial { delta, coef }).collect();
        monomials.sort_by_key(|m| m.delta);
        Ok(CycleComplex { pattern, num_edges: graph.num_edges(), cycles, simplex_counts: counts, monomials })
    }

    pub fn kind(&self) -> MatrixKind {
        self.pattern.kind
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn cycles(&self) -> &[SimpleCycle] {
        &self.cycles
    }

    /// Number of simple cycles counting parallel copies in the multigraph.
    pub fn cycle_count(&self) -> u64 {
        self.cycles.iter().map(|c| c.weight).sum()
    }

    /// Simplex counts indexed by number of cycles; entry 0 is the empty simplex.
    pub fn simplex_counts(&self) -> &[u64] {
        &self.simplex_counts
    }

    pub fn num_simplices(&self) -> u64 {
        self.simplex_counts.iter().sum()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    fn check(&self, l: &[f64]) {
        assert_eq!(l.len(), self.num_edges, "length vector does not match the complex");
    }

    /// `Π u_e^{Δ(e)}`, or 0 when an infinite edge has positive multiplicity.
    fn term(&self, delta: Delta, u: &[f64]) -> f64 {
        let mut p = 1.0;
        let mut d = delta;
        let mut e = 0;
        while d != 0 {
            match d & 3 {
                0 => {}
                1 => p *= u[e],
                _ => p *= u[e] * u[e],
            }
            d >>= 2;
            e += 1;
        }
        p
    }

    pub fn value_u(&self, u: &[f64]) -> f64 {
        self.monomials.iter().map(|m| m.coef as f64 * self.term(m.delta, u)).sum()
    }

    /// `F(ℓ)` for extended lengths.
    pub fn value(&self, l: &[f64]) -> f64 {
        self.check(l);
        self.value_u(&to_u(l))
    }

    /// `∂F/∂e = -Σ c Δ(e) u^Δ`.
    pub fn gradient(&self, l: &[f64]) -> Vec<f64> {
        self.check(l);
        let u = to_u(l);
        let mut g = vec![0.0; self.num_edges];
        for m in &self.monomials {
            let t = m.coef as f64 * self.term(m.delta, &u);
            if t == 0.0 {
                continue;
            }
            for (e, ge) in g.iter_mut().enumerate() {
                let k = delta_get(m.delta, e);
                if k > 0 {
                    *ge -= k as f64 * t;
                }
            }
        }
        g
    }

    /// `∂²F/∂e∂e' = Σ c Δ(e)Δ(e') u^Δ`.
    pub fn hessian(&self, l: &[f64]) -> Vec<Vec<f64>> {
        self.check(l);
        let u = to_u(l);
        let n = self.num_edges;
        let mut h = vec![vec![0.0; n]; n];
        for m in &self.monomials {
            let t = m.coef as f64 * self.term(m.delta, &u);
            if t == 0.0 {
                continue;
            }
            let ks: Vec<f64> = (0..n).map(|e| delta_get(m.delta, e) as f64).collect();
            for a in 0..n {
                if ks[a] == 0.0 {
                    continue;
                }
                for b in 0..n {
                    h[a][b] += ks[a] * ks[b] * t;
                }
            }
        }
        h
    }

    /// `⟨ℓ, ∇F⟩ = -Σ c ℓ(Δ) u^Δ`, with `ℓ(Δ)u^Δ = 0` when `ℓ(Δ) = ∞`.
    pub fn pairing_volume(&self, l: &[f64]) -> f64 {
        self.check(l);
        let u = to_u(l);
        -self
            .monomials
            .iter()
            .map(|m| {
                let t = self.term(m.delta, &u);
                if t == 0.0 {
                    return 0.0;
                }
                let ld: f64 = (0..self.num_edges)
                    .filter(|&e| delta_get(m.delta, e) > 0)
                    .map(|e| delta_get(m.delta, e) as f64 * l[e])
                    .sum();
                m.coef as f64 * ld * t
            })
            .sum::<f64>()
    }

    /// `⟨v, H v⟩ = Σ c v(Δ)² u^Δ`.
    pub fn pairing_hessian(&self, l: &[f64], v: &[f64]) -> f64 {
        self.check(l);
        let u = to_u(l);
        self.monomials
            .iter()
            .map(|m| {
                let vd: f64 = (0..self.num_edges).map(|e| delta_get(m.delta, e) as f64 * v[e]).sum();
                m.coef as f64 * vd * vd * self.term(m.delta, &u)
            })
            .sum()
    }

    /// Coefficients `(α, β, γ)` of `F = α + β u_d + γ u_d²` with the other edges fixed.
    pub fn dependent_coefficients(&self, l: &[f64], dep: usize) -> (f64, f64, f64) {
        self.check(l);
        let mut u = to_u(l);
        u[dep] = 1.0;
        let mut c = [0.0; 3];
        for m in &self.monomials {
            c[delta_get(m.delta, dep) as usize] += m.coef as f64 * self.term(m.delta, &u);
        }
        (c[0], c[1], c[2])
    }

    /// Length of edge `dep` that puts `ℓ` on `F = 0`; the other entries are kept.
    pub fn solve_dependent(&self, l: &[f64], dep: usize) -> Result<f64> {
        let (a, b, c) = self.dependent_coefficients(l, dep);
        if !(a > 0.0) {
            return Err(Error::NoCompletion(format!(
                "the other edges already have entropy at least 1 (F = {a:e} without edge {dep})"
            )));
        }
        let root = smallest_positive_root(a, b, c)
            .ok_or_else(|| Error::NoCompletion("F has no zero for positive length of the dependent edge".into()))?;
        let mut x = root;
        for _ in 0..3 {
            let f = a + x * (b + c * x);
            let df = b + 2.0 * c * x;
            if df == 0.0 {
                break;
            }
            let next = x - f / df;
            if !(next > 0.0) || (next - x).abs() > 1e-6 * x {
                break;
            }
            x = next;
        }
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::NoCompletion(format!("completion needs u = {x}, i.e. a non-positive length")));
        }
        Ok(-x.ln())
    }

    /// Deterministic text listing of cycles and simplex counts.
    pub fn dump(&self, graph: &Graph) -> String {
        let name = |v: usize| -> String {
            self.pattern.classes[v]
                .iter()
                .map(|&d| {
                    let id = &graph.edge_ids()[d / 2];
                    if d % 2 == 0 {
                        id.clone()
                    } else {
                        format!("{id}~")
                    }
                })
                .collect::<Vec<_>>()
                .join("")
        };
        let mut out = String::new();
        let _ = writeln!(out, "cycles {} weighted {}", self.cycles.len(), self.cycle_count());
        for c in &self.cycles {
            let seq: Vec<String> = c.vertices.iter().map(|&v| name(v)).collect();
            let _ = writeln!(out, "cycle x{} {}", c.weight, seq.join(" "));
        }
        for (k, n) in self.simplex_counts.iter().enumerate() {
            let _ = writeln!(out, "simplices {k} {n}");
        }
        out
    }
}

fn to_u(l: &[f64]) -> Vec<f64> {
    l.iter().map(|&x| (-x).exp()).collect()
}

/// Least root in `(0, ∞)` of `a + b x + c x²`.
fn smallest_positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
    let roots: Vec<f64> = if c == 0.0 {
        if b == 0.0 {
            vec![]
        } else {
            vec![-a / b]
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q == 0.0 {
            vec![]
        } else {
            vec![q / c, a / q]
        }
    };
    roots.into_iter().filter(|&x| x > 0.0 && x.is_finite()).min_by(|x, y| x.total_cmp(y))
}

struct SimplexWalk<'a> {
    cycles: &'a [SimpleCycle],
    acc: HashMap<Delta, i64>,
    counts: Vec<u64>,
    work: usize,
    limit: usize,
    budget: usize,
}

impl SimplexWalk<'_> {
    /// Extends the simplex `(mask, delta, weight)` by each candidate in turn;
    /// `cands` holds the later cycles disjoint from `mask`.
    fn extend(&mut self, cands: &[usize], delta: Delta, weight: i64, depth: usize) -> Result<()> {
        for (k, &i) in cands.iter().enumerate() {
            let c = &self.cycles[i];
            let rest: Vec<usize> =
                cands[k + 1..].iter().copied().filter(|&j| self.cycles[j].mask & c.mask == 0).collect();
            self.work += SIMPLEX_COST + cands.len() - k;
            if self.work > self.limit {
                return Err(Error::Budget(self.budget));
            }
            if self.counts.len() <= depth + 1 {
                self.counts.push(0);
            }
            self.counts[depth + 1] += 1;
            let w = -weight * c.weight as i64;
            let d = delta + c.delta;
            *self.acc.entry(d).or_insert(0) += w;
            self.extend(&rest, d, w, depth + 1)?;
        }
        Ok(())
    }
}

/// Johnson's circuit enumeration on bitmask adjacency.
fn johnson(p: &TransitionPattern, budget: usize) -> Result<Vec<SimpleCycle>> {
    let n = p.size();
    let succ: Vec<u64> = (0..n).map(|i| (0..n).filter(|&j| p.counts[i][j] > 0).map(|j| 1u64 << j).sum()).collect();
    let pred: Vec<u64> = (0..n).map(|j| (0..n).filter(|&i| p.counts[i][j] > 0).map(|i| 1u64 << i).sum()).collect();
    let mut out = Vec::new();
    for s in 0..n {
        let allowed_all: u64 = if s == 63 { 1u64 << 63 } else { !((1u64 << s) - 1) } & full_mask(n);
        let fwd = reach(&succ, s, allowed_all);
        let bwd = reach(&pred, s, allowed_all);
        let scc = fwd & bwd;
        if scc & (1u64 << s) == 0 {
            continue;
        }
        let mut st = JohnsonState {
            succ: &succ,
            allowed: scc,
            s,
            blocked: 0,
            b: vec![0u64; n],
            stack: Vec::new(),
            counts: &p.counts,
            out: &mut out,
            budget,
        };
        st.circuit(s)?;
    }
    Ok(out)
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn reach(adj: &[u64], s: usize, allowed: u64) -> u64 {
    let mut seen = 1u64 << s;
    let mut frontier = seen;
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let new = adj[v] & allowed & !seen;
        seen |= new;
        frontier |= new;
    }
    seen
}

struct JohnsonState<'a> {
    succ: &'a [u64],
    allowed: u64,
    s: usize,
    blocked: u64,
    b: Vec<u64>,
    stack: Vec<usize>,
    counts: &'a [Vec<u32>],
    out: &'a mut Vec<SimpleCycle>,
    budget: usize,
}

impl JohnsonState<'_> {
    fn unblock(&mut self, u: usize) {
        self.blocked &= !(1u64 << u);
        while self.b[u] != 0 {
            let w = self.b[u].trailing_zeros() as usize;
            self.b[u] &= !(1u64 << w);
            if self.blocked & (1u64 << w) != 0 {
                self.unblock(w);
            }
        }
    }

    fn circuit(&mut self, v: usize) -> Result<bool> {
        let mut found = false;
        self.stack.push(v);
        self.blocked |= 1u64 << v;
        let mut next = self.succ[v] & self.allowed;
        while next != 0 {
            let w = next.trailing_zeros() as usize;
            next &= next - 1;
            if w == self.s {
                self.emit()?;
                found = true;
            } else if self.blocked & (1u64 << w) == 0 && self.circuit(w)? {
                found = true;
            }
        }
        if found {
            self.unblock(v);
        } else {
            let mut next = self.succ[v] & self.allowed;
            while next != 0 {
                let w = next.trailing_zeros() as usize;
                next &= next - 1;
                self.b[w] |= 1u64 << v;
            }
        }
        self.stack.pop();
        Ok(found)
    }

    fn emit(&mut self) -> Result<()> {
        if self.out.len() >= cycle_limit(self.budget) {
            return Err(Error::Budget(self.budget));
        }
        let vs = self.stack.clone();
        let len = vs.len();
        let weight = (0..len).map(|k| self.counts[vs[k]][vs[(k + 1) % len]] as u64).product();
        let mask = vs.iter().map(|&v| 1u64 << v).sum();
        // The stack starts at s, the least vertex of the cycle.
        self.out.push(SimpleCycle { vertices: vs, weight, delta: 0, mask });
        Ok(())
    }
}

/// `F_G(ℓ)` as the alternating sum over the cycle complex.
pub fn f_via_cycles(cx: &CycleComplex, l: &LengthFunction) -> f64 {
    cx.value(l.values())
}

/// `det(I - A)` with rows of the full or quotient matrix weighted by `u`.
pub fn f_via_det(graph: &Graph, l: &LengthFunction, kind: MatrixKind) -> f64 {
    let m = TransitionPattern::new(graph, kind).weighted(&l.u());
    let n = m.size();
    let a = DMatrix::<f64>::identity(n, n) - m.to_dmatrix();
    a.lu().determinant()
}

pub fn grad_f(cx: &CycleComplex, l: &LengthFunction) -> Vec<f64> {
    cx.gradient(l.values())
}

pub fn hessian_f(cx: &CycleComplex, l: &LengthFunction) -> Vec<Vec<f64>> {
    cx.hessian(l.values())
}

pub fn pairing_volume(cx: &CycleComplex, l: &LengthFunction) -> f64 {
    cx.pairing_volume(l.values())
}

pub fn pairing_hessian(cx: &CycleComplex, l: &LengthFunction, v: &[f64]) -> f64 {
    cx.pairing_hessian(l.values(), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{collapse, pullback_length, standard_graph, Family};
    use crate::spectral::normalize_unit_entropy;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cx(fam: Family, kind: MatrixKind) -> (Graph, CycleComplex) {
        let g = standard_graph(&fam).unwrap();
        let c = CycleComplex::build(&g, kind).unwrap();
        (g, c)
    }

    fn families() -> Vec<Family> {
        vec![
            Family::Rose(2),
            Family::Rose(3),
            Family::Rose(4),
            Family::Theta(2),
            Family::Theta(3),
            Family::Barbell,
            Family::Separated(2, 2),
            Family::RoseTheta(4),
        ]
    }

    fn random_lengths(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(lo..hi)).collect()
    }

    #[test]
    fn barbell_cycle_counts() {
        let (g, full) = cx(Family::Barbell, MatrixKind::Full);
        assert_eq!(full.cycle_count(), 8);
        let (_, quo) = cx(Family::Barbell, MatrixKind::Quotient);
        assert_eq!(quo.cycle_count(), 6);
        // One 1-simplex: the two loop cycles.
        assert_eq!(quo.simplex_counts(), &[1, 3, 1]);
        let dump = quo.dump(&g);
        assert!(dump.contains("cycle x1 aa~\n"));
        assert!(dump.contains("cycle x4 aa~ c bb~ c~\n"));
    }

    #[test]
    fn rose_one_has_two_fixed_loops() {
        let g = crate::graph::build_graph(
            &crate::graph::GraphSpec {
                name: "circle".into(),
                vertices: vec!["v".into()],
                edges: vec![("e".into(), "v".into(), "v".into())],
            },
            crate::graph::Validation::Relaxed,
        )
        .unwrap();
        let c = CycleComplex::build(&g, MatrixKind::Full).unwrap();
        assert_eq!(c.cycle_count(), 2);
        // The two loops are vertex-disjoint, matching det(I - A) = (1 - x)².
        assert_eq!(c.simplex_counts(), &[1, 2, 1]);
        let x = (-0.7f64).exp();
        assert!((c.value(&[0.7]) - (1.0 - x) * (1.0 - x)).abs() < 1e-15);
    }

    #[test]
    fn displayed_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (_, bq) = cx(Family::Barbell, MatrixKind::Quotient);
        let (_, bf) = cx(Family::Barbell, MatrixKind::Full);
        let (_, r2) = cx(Family::Rose(2), MatrixKind::Quotient);
        for _ in 0..200 {
            let l = random_lengths(&mut rng, 3, 0.01, 4.0);
            let (x, y, z) = ((-l[0]).exp(), (-l[1]).exp(), (-l[2]).exp());
            let q = 1.0 - (x + y + 4.0 * x * y * z * z) + x * y;
            assert!((bq.value(&l) - q).abs() < 1e-12);
            let f = (1.0 - x) * (1.0 - y) * (1.0 - x - y + x * y - 4.0 * x * y * z * z);
            assert!((bf.value(&l) - f).abs() < 1e-12);
            let r = 1.0 - x - y - 3.0 * x * y;
            assert!((r2.value(&l[..2]) - r).abs() < 1e-12);
        }
    }

    #[test]
    fn infinite_lengths_leave_only_the_empty_simplex() {
        for fam in families() {
            let (g, c) = cx(fam, MatrixKind::Full);
            assert_eq!(c.value(&vec![f64::INFINITY; g.num_edges()]), 1.0);
        }
    }

    #[test]
    fn determinant_examples() {
        let g = standard_graph(&Family::Rose(3)).unwrap();
        let l = LengthFunction::constant(&g, 5f64.ln()).unwrap();
        assert!(f_via_det(&g, &l, MatrixKind::Quotient).abs() < 1e-14);
        let b = standard_graph(&Family::Barbell).unwrap();
        let l = LengthFunction::extended(vec![3f64.ln(), 3f64.ln(), 0.0]).unwrap();
        assert!(f_via_det(&b, &l, MatrixKind::Full).abs() < 1e-14);
    }

    #[test]
    fn cycles_agree_with_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for fam in families() {
            for kind in [MatrixKind::Full, MatrixKind::Quotient] {
                let (g, c) = cx(fam, kind);
                for _ in 0..100 {
                    let l = LengthFunction::strict(random_lengths(&mut rng, g.num_edges(), 0.05, 4.0)).unwrap();
                    let a = f_via_cycles(&c, &l);
                    let b = f_via_det(&g, &l, kind);
                    assert!((a - b).abs() < 1e-12, "{fam} {kind:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn collapse_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rose = standard_graph(&Family::Rose(2)).unwrap();
        let rose_cx = CycleComplex::build(&rose, MatrixKind::Full).unwrap();
        for fam in [Family::Theta(2), Family::Barbell] {
            let (g, c) = cx(fam, MatrixKind::Full);
            let (_, map) = collapse(&g, &[2]).unwrap();
            for _ in 0..50 {
                let l0 = LengthFunction::strict(random_lengths(&mut rng, 2, 0.05, 4.0)).unwrap();
                let pulled = pullback_length(&map, &l0).unwrap();
                assert!((f_via_cycles(&c, &pulled) - f_via_cycles(&rose_cx, &l0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn multiplicities_bounded_and_even_on_bridges() {
        for fam in families() {
            for kind in [MatrixKind::Full, MatrixKind::Quotient] {
                let (g, c) = cx(fam, kind);
                for m in c.monomials() {
                    for e in 0..g.num_edges() {
                        let k = delta_get(m.delta, e);
                        assert!(k <= 2);
                        if g.is_separating(e) {
                            assert!(k == 0 || k == 2, "{fam}: Δ(bridge) = {k}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for fam in families() {
            let (g, c) = cx(fam, MatrixKind::Quotient);
            let n = g.num_edges();
            for _ in 0..5 {
                let l = random_lengths(&mut rng, n, 0.2, 3.0);
                let grad = c.gradient(&l);
                let hess = c.hessian(&l);
                let h = 1e-5;
                for e in 0..n {
                    let mut p = l.clone();
                    let mut m = l.clone();
                    p[e] += h;
                    m[e] -= h;
                    let fd = (c.value(&p) - c.value(&m)) / (2.0 * h);
                    assert!((fd - grad[e]).abs() < 1e-6);
                    let gp = c.gradient(&p);
                    let gm = c.gradient(&m);
                    for f in 0..n {
                        let fd2 = (gp[f] - gm[f]) / (2.0 * h);
                        assert!((fd2 - hess[e][f]).abs() < 1e-6);
                    }
                }
                let dot: f64 = l.iter().zip(&grad).map(|(a, b)| a * b).sum();
                assert!((c.pairing_volume(&l) - dot).abs() < 1e-12);
                let v = random_lengths(&mut rng, n, -1.0, 1.0);
                let vhv: f64 = (0..n).map(|a| (0..n).map(|b| v[a] * hess[a][b] * v[b]).sum::<f64>()).sum();
                assert!((c.pairing_hessian(&l, &v) - vhv).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sign_facts_on_and_off_the_surface() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for fam in families() {
            let (g, c) = cx(fam, MatrixKind::Full);
            for _ in 0..10 {
                let raw = LengthFunction::strict(random_lengths(&mut rng, g.num_edges(), 0.1, 3.0)).unwrap();
                let unit = normalize_unit_entropy(&g, &raw).unwrap();
                assert!(c.value(unit.values()).abs() < 1e-9);
                assert!(c.gradient(unit.values()).iter().all(|&x| x > 0.0));
                assert!(c.pairing_volume(unit.values()) > 0.0);
                let longer = unit.scaled(1.2).unwrap();
                assert!(c.value(longer.values()) > 0.0);
            }
        }
    }

    #[test]
    fn rose_two_pairings_at_symmetric_point() {
        let (_, c) = cx(Family::Rose(2), MatrixKind::Quotient);
        let l = [3f64.ln(); 2];
        let g = c.gradient(&l);
        // exp(-ℓ¹) Y_1 with Y_1 = 1 + 3y.
        assert!((g[0] - (1.0 / 3.0) * (1.0 + 3.0 / 3.0)).abs() < 1e-14);
        assert!((c.pairing_volume(&l) - 2.0 * 3f64.ln() * g[0]).abs() < 1e-14);
        assert!(c.pairing_hessian(&l, &[1.0, -1.0]) < 0.0);
        assert_eq!(c.pairing_hessian(&l, &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn dependent_solve_examples() {
        let (_, r3) = cx(Family::Rose(3), MatrixKind::Quotient);
        let l5 = 5f64.ln();
        assert!((r3.solve_dependent(&[l5, l5, 1.0], 2).unwrap() - l5).abs() < 1e-12);
        let (_, r2) = cx(Family::Rose(2), MatrixKind::Quotient);
        assert!((r2.solve_dependent(&[2f64.ln(), 1.0], 1).unwrap() - 5f64.ln()).abs() < 1e-12);
        assert!(matches!(r3.solve_dependent(&[0.5, 0.5, 1.0], 2), Err(Error::NoCompletion(_))));
        // Long loops would need a bridge of negative length.
        let (_, b) = cx(Family::Barbell, MatrixKind::Quotient);
        assert!(matches!(b.solve_dependent(&[3.0, 3.0, 1.0], 2), Err(Error::NoCompletion(_))));
        let c = b.solve_dependent(&[0.5, 0.5, 1.0], 2).unwrap();
        assert!(b.value(&[0.5, 0.5, c]).abs() < 1e-14);
    }

    #[test]
    fn budget_overflow_is_reported() {
        let g = standard_graph(&Family::Rose(4)).unwrap();
        assert_eq!(CycleComplex::build_with_budget(&g, MatrixKind::Full, 100).unwrap_err(), Error::Budget(100));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rose_root_along_rays_is_unique(raw in prop::collection::vec(0.05f64..3.0, 3)) {
            let g = standard_graph(&Family::Rose(3)).unwrap();
            let c = CycleComplex::build(&g, MatrixKind::Quotient).unwrap();
            let mut changes = 0;
            let mut prev = c.value(&raw.iter().map(|x| x * 0.01).collect::<Vec<_>>());
            for k in 1..=2000 {
                let t = 0.01 * (1.005f64).powi(k);
                let cur = c.value(&raw.iter().map(|x| x * t).collect::<Vec<_>>());
                if (cur > 0.0) != (prev > 0.0) {
                    changes += 1;
                }
                prev = cur;
            }
            prop_assert_eq!(changes, 1);
        }

        #[test]
        fn dependent_solve_lands_on_surface(raw in prop::collection::vec(1.2f64..6.0, 4), dep in 0usize..5) {
            let g = standard_graph(&Family::Separated(2, 2)).unwrap();
            let c = CycleComplex::build(&g, MatrixKind::Quotient).unwrap();
            let mut l = raw.clone();
            l.insert(dep, 1.0);
            if let Ok(x) = c.solve_dependent(&l, dep) {
                l[dep] = x;
                prop_assert!(c.value(&l).abs() < 1e-11);
                prop_assert!(x > 0.0);
            }
        }
    }
}
