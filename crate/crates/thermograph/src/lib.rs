//! Entropy, pressure and thermodynamic metrics on moduli spaces of metric graphs.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cycles;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod metrics;
pub mod rose;
pub mod separating;
pub mod spectral;

pub use error::{Error, Result};

/// Largest supported number of directed edges.
pub const MAX_DIRECTED_EDGES: usize = 64;
