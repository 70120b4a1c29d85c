pub mod combinatorial;
pub mod error;
pub mod family;
pub mod floating;
pub mod geometry;
pub mod harness;
pub mod lattice;
pub mod lp;
pub mod measures;
pub mod piercing;
pub mod scalar;

pub use error::{Error, Result};
pub use measures::{Measure, MeasureValue};
pub use scalar::Scalar;
