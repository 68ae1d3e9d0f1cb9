//! Configurable-precision binary floating point with an `i64` exponent,
//! plus complex numbers on top of it.
//!
//! Arithmetic (`+ - * /`, `sqrt`) is correctly rounded to the wider operand's
//! precision. `exp`, `ln`, `sin`, `cos` and `pow` are evaluated with guard
//! bits and are accurate to within a few ulps.

mod agree;
mod complex;
mod error;
mod precision;
mod real;
mod transcendental;

pub use agree::{agree_at_precision, Agreement};
pub use complex::BigComplex;
pub use error::BigError;
pub use precision::Precision;
pub use real::BigReal;
