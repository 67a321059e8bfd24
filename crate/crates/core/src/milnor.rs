//! Milnor number of a germ at the origin and isolated-singularity tests.

use std::sync::OnceLock;

use num_traits::Zero;
use serde::Serialize;

use crate::algebra::{parse_poly, vars, Polynomial, Vars};
use crate::basis::{local_standard_basis_capped, quotient_dimension, BasisResult, Dim, DEFAULT_DEGREE_CAP};
use crate::error::{Error, Result};

/// A polynomial germ `(ℂᵐ, 0) → (ℂ, 0)`.
#[derive(Debug)]
pub struct Germ {
    f: Polynomial,
    degree_cap: u32,
    mu: OnceLock<Dim>,
}

impl Clone for Germ {
    fn clone(&self) -> Self {
        let mu = OnceLock::new();
        if let Some(d) = self.mu.get() {
            let _ = mu.set(*d);
        }
        Self { f: self.f.clone(), degree_cap: self.degree_cap, mu }
    }
}

impl Germ {
    /// Rejects a nonzero constant term: the base point is always the origin.
    pub fn new(f: Polynomial) -> Result<Self> {
        if !f.constant_term().is_zero() {
            return Err(Error::ConstantTerm);
        }
        if f.nvars() == 0 {
            return Err(Error::InvalidInput("a germ needs at least one variable".into()));
        }
        Ok(Self { f, degree_cap: DEFAULT_DEGREE_CAP, mu: OnceLock::new() })
    }

    pub fn parse<S: AsRef<str>>(text: &str, names: &[S]) -> Result<Self> {
        Self::new(parse_poly(text, &vars(names))?)
    }

    pub fn with_degree_cap(mut self, cap: u32) -> Self {
        self.degree_cap = cap;
        self.mu = OnceLock::new();
        self
    }

    pub fn f(&self) -> &Polynomial {
        &self.f
    }

    pub fn vars(&self) -> &Vars {
        self.f.vars()
    }

    pub fn dim(&self) -> usize {
        self.f.nvars()
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    /// `(∂f/∂z₁, …, ∂f/∂z_m)`.
    pub fn gradient(&self) -> Vec<Polynomial> {
        let all: Vec<usize> = (0..self.dim()).collect();
        self.f.gradient(&all)
    }

    /// Local standard basis of the Jacobian ideal.
    pub fn jacobian_basis(&self) -> Result<BasisResult> {
        local_standard_basis_capped(&self.gradient(), self.degree_cap)
    }

    /// Dimension of the local algebra `𝒪/⟨∂f⟩`, cached after the first call.
    pub fn jacobian_dimension(&self) -> Result<Dim> {
        if let Some(d) = self.mu.get() {
            return Ok(*d);
        }
        let d = quotient_dimension(&self.jacobian_basis()?);
        Ok(*self.mu.get_or_init(|| d))
    }

    /// μ; `NotIsolated` when the critical locus is positive-dimensional at 0.
    pub fn milnor_number(&self) -> Result<usize> {
        match self.jacobian_dimension()? {
            Dim::Finite(mu) => Ok(mu),
            Dim::Infinite => Err(Error::NotIsolated),
        }
    }

    /// Only resource errors propagate; a non-isolated critical point is `false`.
    pub fn is_isolated_singularity(&self) -> Result<bool> {
        Ok(matches!(self.jacobian_dimension()?, Dim::Finite(_)))
    }

    pub fn summary(&self) -> Result<MilnorSummary> {
        let dim = self.jacobian_dimension()?;
        Ok(MilnorSummary {
            f: self.f.to_string(),
            vars: self.vars().to_vec(),
            isolated: matches!(dim, Dim::Finite(_)),
            mu: dim,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MilnorSummary {
    pub f: String,
    pub vars: Vec<String>,
    pub isolated: bool,
    pub mu: Dim,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_variable_powers() {
        for d in 2..=7 {
            let g = Germ::parse(&format!("z^{d}"), &["z"]).unwrap();
            assert_eq!(g.milnor_number().unwrap(), d - 1);
        }
    }

    #[test]
    fn brieskorn_pairs() {
        for a in 2..=5 {
            for b in 2..=5 {
                let g = Germ::parse(&format!("x^{a} + y^{b}"), &["x", "y"]).unwrap();
                assert_eq!(g.milnor_number().unwrap(), (a - 1) * (b - 1));
            }
        }
    }

    #[test]
    fn node_with_distant_critical_point() {
        let g = Germ::parse("x^3 + y^3 + x*y", &["x", "y"]).unwrap();
        assert_eq!(g.milnor_number().unwrap(), 1);
    }

    #[test]
    fn non_isolated() {
        let g = Germ::parse("x^2*y", &["x", "y"]).unwrap();
        assert!(!g.is_isolated_singularity().unwrap());
        assert!(matches!(g.milnor_number(), Err(Error::NotIsolated)));
        let g = Germ::parse("(x+y)^2", &["x", "y"]).unwrap();
        assert!(!g.is_isolated_singularity().unwrap());
        let g = Germ::parse("x^2 + y^3", &["x", "y"]).unwrap();
        assert!(g.is_isolated_singularity().unwrap());
    }

    #[test]
    fn constant_term_rejected() {
        assert!(matches!(Germ::parse("1 + x^2", &["x"]), Err(Error::ConstantTerm)));
    }

    #[test]
    fn smooth_point_has_zero_milnor_number() {
        let g = Germ::parse("x + y^2", &["x", "y"]).unwrap();
        assert_eq!(g.milnor_number().unwrap(), 0);
    }
}
