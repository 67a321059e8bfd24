//! Milnor numbers, characteristic polynomials and Łojasiewicz gradient
//! exponents for polynomial germs with an isolated critical point at the
//! origin, plus μ-constancy checks for unfoldings.

pub mod algebra;
pub mod basis;
pub mod charpoly;
pub mod fibres;
pub mod milnor;
mod error;
pub mod export;
pub mod exponent;
pub mod family;

pub use error::{Error, ErrorClass, Result};
