//! Sharp constants, iterated logarithms, radial calculus and singular quadrature
//! for higher-order weighted Rellich inequalities.

pub mod error;
pub mod fit;
pub mod iterlog;
pub mod jet;
pub mod params;
pub mod prober;
pub mod quadrature;
pub mod radial_calculus;
pub mod real;
pub mod sharp_constants;

pub use error::{Error, Result};
pub use jet::Jet;
pub use params::InequalityParams;
pub use real::Real;
