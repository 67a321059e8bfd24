//! Exact multivariate polynomials over the Gaussian rationals.

mod coeff;
mod eval;
mod monomial;
mod parse;
mod poly;

pub use coeff::GaussRat;
pub use eval::{dist, max_norm, norm, CompiledPoly, PolyMap};
pub use monomial::Monomial;
pub use parse::{parse_poly, validate_vars};
pub use poly::{vars, Binding, Domain, Order, Polynomial, Vars};

pub use num_complex::Complex64;
