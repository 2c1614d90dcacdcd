//! Numerical laboratory for chordal SLE.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod digest;
pub mod estimators;
pub mod error;
pub mod geometry;
pub mod green;
pub mod harness;
pub mod loewner;
pub mod params;
pub mod points;
pub mod pool;
pub mod rng;
pub mod scalar;
pub mod scaling;

pub use bounds::{boundary_green_upper, family_product_ceiling, multipoint_green_upper, multipoint_interior_bound};
pub use error::{Result, SleError};
pub use green::{green_domain, green_halfplane, MobiusMap};
pub use params::{derive_params, SleParams};
pub use points::{HalfPlanePoint, PointConfig};
pub use scalar::Real;
pub use scaling::{p_ratio, p_scaling};

pub type SleParams64 = SleParams<f64>;
pub type SleParams32 = SleParams<f32>;
pub type Point64 = HalfPlanePoint<f64>;
pub type Config64 = PointConfig<f64>;
pub type Mobius64 = MobiusMap<f64>;
