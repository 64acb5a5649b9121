use super::norms::{norm_squared, Metric};
use super::quad::{integrate, integrate_singular_end};
use super::Surface;
use crate::error::{Error, Result};

/// Residual of `F` accepted on a solved path point.
pub const SURFACE_TOL: f64 = 1e-9;

/// Parametric form of one free edge length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `a + b t`.
    Linear {
        a: f64,
        b: f64,
    },
    /// `c + k log(a + b t)`.
    LogAffine {
        c: f64,
        k: f64,
        a: f64,
        b: f64,
    },
}

impl Profile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Profile::Constant(c) => c,
            Profile::Linear { a, b } => a + b * t,
            Profile::LogAffine { c, k, a, b } => c + k * (a + b * t).ln(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Profile::Constant(_) => 0.0,
            Profile::Linear { b, .. } => b,
            Profile::LogAffine { k, a, b, .. } => k * b / (a + b * t),
        }
    }

    /// The segment from `x` at `t0` to `y` at `t1`.
    pub fn segment(x: f64, y: f64, t0: f64, t1: f64) -> Profile {
        if x == y {
            return Profile::Constant(x);
        }
        let b = (y - x) / (t1 - t0);
        Profile::Linear { a: x - b * t0, b }
    }
}

/// A path `t ↦ ℓ_t` on a unit-entropy surface: free edges follow their
/// profiles and the one dependent edge is solved from `F = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricPath {
    profiles: Vec<Option<Profile>>,
    dep: usize,
    pub t0: f64,
    pub t1: f64,
    /// Point `t* ≥ t1` where the speed may blow up like `(t* - t)^{-1/2}`.
    pub singular_end: Option<f64>,
}

impl MetricPath {
    pub fn new(profiles: Vec<Option<Profile>>, t0: f64, t1: f64) -> Result<Self> {
        let deps: Vec<usize> = (0..profiles.len()).filter(|&k| profiles[k].is_none()).collect();
        if deps.len() != 1 {
            return Err(Error::Config(format!("a path needs exactly one dependent edge, got {}", deps.len())));
        }
        if !(t0.is_finite() && t1.is_finite() && t0 <= t1) {
            return Err(Error::Config(format!("bad path domain [{t0}, {t1}]")));
        }
        Ok(MetricPath { dep: deps[0], profiles, t0, t1, singular_end: None })
    }

    pub fn with_singular_end(mut self, t_star: f64) -> Self {
        self.singular_end = Some(t_star);
        self
    }

    pub fn dependent_edge(&self) -> usize {
        self.dep
    }

    pub fn profiles(&self) -> &[Option<Profile>] {
        &self.profiles
    }

    /// Free lengths at `t`, with a placeholder in the dependent slot.
    pub fn free_lengths(&self, t: f64) -> Vec<f64> {
        self.profiles.iter().map(|p| p.map_or(1.0, |p| p.value(t))).collect()
    }

    /// The path point at `t`, with the dependent edge solved.
    pub fn point(&self, s: &dyn Surface, t: f64) -> Result<Vec<f64>> {
        let mut l = self.free_lengths(t);
        if let Some(k) = l.iter().position(|x| x.is_nan() || *x <= 0.0) {
            return Err(Error::Numeric(format!("free edge {k} has length {} at t = {t}", l[k])));
        }
        let x = s.solve(&l, self.dep)?;
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Numeric(format!("dependent edge left the chart at t = {t}: {x}")));
        }
        l[self.dep] = x;
        let f = s.value(&l);
        if f.abs() >= SURFACE_TOL {
            return Err(Error::Numeric(format!("|F| = {:e} at t = {t}", f.abs())));
        }
        Ok(l)
    }

    /// `ℓ̇_t` at a solved point; the dependent rate comes from `⟨ℓ̇, ∇F⟩ = 0`.
    pub fn velocity(&self, s: &dyn Surface, t: f64, l: &[f64]) -> Result<Vec<f64>> {
        let g = s.gradient(l);
        let mut v: Vec<f64> = self.profiles.iter().map(|p| p.map_or(0.0, |p| p.derivative(t))).collect();
        if !(g[self.dep] > 0.0) {
            return Err(Error::Numeric(format!("∂F/∂ℓ of the dependent edge is {:e} at t = {t}", g[self.dep])));
        }
        let acc: f64 = v.iter().zip(&g).filter(|(x, _)| **x != 0.0).map(|(x, gi)| x * gi).sum();
        v[self.dep] = -acc / g[self.dep];
        Ok(v)
    }

    pub fn speed(&self, s: &dyn Surface, t: f64, metric: Metric) -> Result<f64> {
        let l = self.point(s, t)?;
        let v = self.velocity(s, t, &l)?;
        norm_squared(s, &l, &v, metric).map(f64::sqrt)
    }
}

/// Length of `path` in the chosen metric, to relative tolerance `tol`.
pub fn path_length(s: &dyn Surface, path: &MetricPath, metric: Metric, tol: f64) -> Result<f64> {
    let speed = |t: f64| path.speed(s, t, metric);
    match path.singular_end {
        Some(t_star) => integrate_singular_end(speed, path.t0, path.t1, t_star, tol),
        None => integrate(speed, path.t0, path.t1, tol),
    }
}
