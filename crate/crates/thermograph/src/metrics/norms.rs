use super::Surface;
use crate::error::{Error, Result};

/// Radicands in `[-RADICAND_SLACK, 0)` are treated as roundoff and clamped to 0.
pub const RADICAND_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Entropy,
    Pressure,
}

/// A vector tangent to the surface at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: Vec<f64>,
    pub components: Vec<f64>,
}

/// Removes the component of `w` along `∇F(ℓ)`.
pub fn tangent_project(s: &dyn Surface, l: &[f64], w: &[f64]) -> Result<TangentVector> {
    let g = s.gradient(l);
    let gg: f64 = g.iter().map(|x| x * x).sum();
    if !(gg > 0.0) || !gg.is_finite() {
        return Err(Error::Numeric("vanishing gradient; base point is off the surface".into()));
    }
    let wg: f64 = w.iter().zip(&g).map(|(a, b)| a * b).sum();
    let c = wg / gg;
    Ok(TangentVector { base: l.to_vec(), components: w.iter().zip(&g).map(|(a, b)| a - c * b).collect() })
}

/// Squared norm of `v` at `ℓ`:
/// `-⟨v,Hv⟩/⟨ℓ,∇F⟩` for entropy and `-⟨v,Hv⟩/‖∇F‖₁` for pressure.
pub fn norm_squared(s: &dyn Surface, l: &[f64], v: &[f64], metric: Metric) -> Result<f64> {
    if v.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let num = -s.pairing_hessian(l, v);
    let den = match metric {
        Metric::Entropy => s.pairing_volume(l),
        Metric::Pressure => s.gradient(l).iter().map(|x| x.abs()).sum(),
    };
    if !(den > 0.0) {
        return Err(Error::Numeric(format!("norm denominator {den:e} is not positive")));
    }
    let q = num / den;
    if q.is_nan() {
        return Err(Error::Numeric("norm is NaN".into()));
    }
    if q < 0.0 {
        // Compare against the scale of the terms that cancelled.
        let scale = v.iter().map(|x| x * x).sum::<f64>().max(1.0);
        if q >= -RADICAND_SLACK * scale {
            return Ok(0.0);
        }
        return Err(Error::Numeric(format!(
            "negative radicand {q:e}; vector is not tangent or base is off the surface"
        )));
    }
    Ok(q)
}

pub fn entropy_norm(s: &dyn Surface, v: &TangentVector) -> Result<f64> {
    norm_squared(s, &v.base, &v.components, Metric::Entropy).map(f64::sqrt)
}

pub fn pressure_norm(s: &dyn Surface, v: &TangentVector) -> Result<f64> {
    norm_squared(s, &v.base, &v.components, Metric::Pressure).map(f64::sqrt)
}
