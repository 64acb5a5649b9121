//! Adaptive 16-point Gauss–Legendre quadrature.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 16;
const MAX_DEPTH: u32 = 48;

/// Nodes and weights on `[-1, 1]`, by Newton iteration on `P_16`.
pub fn gauss_legendre() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut x = [0.0; ORDER];
        let mut w = [0.0; ORDER];
        for i in 0..n / 2 {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            x[i] = -z;
            x[n - 1 - i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
            w[n - 1 - i] = w[i];
        }
        (x, w)
    })
}

fn panel<F>(f: &F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (x, w) = gauss_legendre();
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for i in 0..ORDER {
        s += w[i] * f(c + h * x[i])?;
    }
    Ok(s * h)
}

/// `∫_a^b f`, bisecting panels until a panel and its two halves agree to
/// `tol` relative to the running estimate.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let coarse = panel(&f, a, b)?;
    let scale = coarse.abs().max(f64::MIN_POSITIVE);
    refine(&f, a, b, coarse, tol * scale, 0)
}

fn refine<F>(f: &F, a: f64, b: f64, whole: f64, abs_tol: f64, depth: u32) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let left = panel(f, a, m)?;
    let right = panel(f, m, b)?;
    let halves = left + right;
    if (halves - whole).abs() <= abs_tol {
        return Ok(halves);
    }
    if depth >= MAX_DEPTH || m <= a || m >= b {
        return Err(Error::Quadrature { a, b });
    }
    let sub_tol = (0.5 * abs_tol).max(1e-16 * halves.abs());
    Ok(refine(f, a, m, left, sub_tol, depth + 1)? + refine(f, m, b, right, sub_tol, depth + 1)?)
}

/// `∫_a^b f` for `f` with an integrable singularity at `t_star ≥ b`, via
/// `t = t_star - s²`.
pub fn integrate_singular_end<F>(f: F, a: f64, b: f64, t_star: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if t_star < b {
        return Err(Error::Config(format!("singular point {t_star} lies inside [{a}, {b}]")));
    }
    let s0 = (t_star - a).sqrt();
    let s1 = (t_star - b).sqrt();
    integrate(|s| Ok(2.0 * s * f(t_star - s * s)?), s1, s0, tol)
}
