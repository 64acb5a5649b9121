use crate::cycles::CycleComplex;
use crate::error::{Error, Result};

/// A defining function `F` of a unit-entropy hypersurface, in length coordinates.
///
/// Lengths may be `∞`; a term carrying an infinite edge contributes 0.
pub trait Surface: Sync {
    fn dim(&self) -> usize;

    fn value(&self, l: &[f64]) -> f64;

    fn gradient(&self, l: &[f64]) -> Vec<f64>;

    fn hessian(&self, l: &[f64]) -> Vec<Vec<f64>>;

    /// `⟨ℓ, ∇F(ℓ)⟩`.
    fn pairing_volume(&self, l: &[f64]) -> f64 {
        l.iter().zip(self.gradient(l)).map(|(&x, g)| if g == 0.0 { 0.0 } else { x * g }).sum()
    }

    /// `⟨v, H[F](ℓ) v⟩`.
    fn pairing_hessian(&self, l: &[f64], v: &[f64]) -> f64 {
        let h = self.hessian(l);
        let n = v.len();
        (0..n).map(|a| v[a] * (0..n).map(|b| h[a][b] * v[b]).sum::<f64>()).sum()
    }

    /// The length of edge `dep` putting `ℓ` on the surface; `ℓ[dep]` is ignored.
    fn solve(&self, l: &[f64], dep: usize) -> Result<f64>;
}

impl Surface for CycleComplex {
    fn dim(&self) -> usize {
        self.num_edges()
    }

    fn value(&self, l: &[f64]) -> f64 {
        CycleComplex::value(self, l)
    }

    fn gradient(&self, l: &[f64]) -> Vec<f64> {
        CycleComplex::gradient(self, l)
    }

    fn hessian(&self, l: &[f64]) -> Vec<Vec<f64>> {
        CycleComplex::hessian(self, l)
    }

    fn pairing_volume(&self, l: &[f64]) -> f64 {
        CycleComplex::pairing_volume(self, l)
    }

    fn pairing_hessian(&self, l: &[f64], v: &[f64]) -> f64 {
        CycleComplex::pairing_hessian(self, l, v)
    }

    fn solve(&self, l: &[f64], dep: usize) -> Result<f64> {
        self.solve_dependent(l, dep)
    }
}

/// The point `c·𝟙` on the surface, found as the largest root of `c ↦ F(c𝟙)`.
pub fn barycentric_point(s: &dyn Surface) -> Result<Vec<f64>> {
    let n = s.dim();
    let f = |c: f64| s.value(&vec![c; n]);
    // F(c𝟙) > 0 for every c beyond the root; scan down until the sign flips.
    let mut hi = 64.0;
    if !(f(hi) > 0.0) {
        return Err(Error::Numeric("F is not positive at long lengths".into()));
    }
    let mut lo = hi;
    loop {
        lo *= 0.98;
        if lo < 1e-9 {
            return Err(Error::Bracket("no unit-entropy point on the diagonal".into()));
        }
        if f(lo) <= 0.0 {
            break;
        }
        hi = lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    Ok(vec![0.5 * (lo + hi); n])
}
