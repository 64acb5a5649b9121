//! Entropy and pressure metrics on unit-entropy hypersurfaces.

mod distance;
mod norms;
mod path;
pub mod quad;
mod surface;

pub use distance::{distance_upper_bound, polyline_length, SearchOptions};
pub use norms::{entropy_norm, norm_squared, pressure_norm, tangent_project, Metric, TangentVector, RADICAND_SLACK};
pub use path::{path_length, MetricPath, Profile, SURFACE_TOL};
pub use surface::{barycentric_point, Surface};
