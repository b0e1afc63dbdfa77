//! Self-similar blow-up profiles for `u_t = Δu^m + |x|^σ u^p` via a
//! three-dimensional autonomous phase space.

pub mod analyze;
pub mod error;
pub mod integrate;
pub mod manifolds;
pub mod params;
pub mod phasespace;
pub mod profiles;
pub mod scalar;
pub mod shooter;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Params = params::Params<f64>;
pub type ChartPoint = phasespace::ChartPoint<f64>;
