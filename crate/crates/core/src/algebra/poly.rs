use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use super::coeff::GaussRat;
use super::monomial::Monomial;
use crate::error::{Error, Result};

/// Ordered variable names shared between polynomials of one ring.
pub type Vars = Arc<Vec<String>>;

pub fn vars<S: AsRef<str>>(names: &[S]) -> Vars {
    Arc::new(names.iter().map(|s| s.as_ref().to_string()).collect())
}

/// Order of vanishing at the origin. `Infinite` only for the zero polynomial.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Order {
    pub fn finite(self) -> Option<u32> {
        match self {
            Order::Finite(v) => Some(v),
            Order::Infinite => None,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(v) => write!(f, "{v}"),
            Order::Infinite => write!(f, "INFINITE"),
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Order::Finite(v) => s.serialize_u32(*v),
            Order::Infinite => s.serialize_str("INFINITE"),
        }
    }
}

/// Which exact field the coefficients actually live in.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Rational,
    GaussianRational,
}

/// A value substituted for a variable.
#[derive(Clone, Debug)]
pub enum Binding {
    Scalar(GaussRat),
    Poly(Polynomial),
}

/// Exact sparse multivariate polynomial over the Gaussian rationals.
///
/// Terms are kept in graded-lex order with no stored zeros, so equality is
/// structural and printing is deterministic.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial {
    vars: Vars,
    terms: BTreeMap<Monomial, GaussRat>,
}

impl Polynomial {
    pub fn zero(vars: Vars) -> Self {
        Self { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: Vars, c: GaussRat) -> Self {
        let mut p = Self::zero(vars);
        let n = p.nvars();
        p.add_term(Monomial::one(n), c);
        p
    }

    pub fn one(vars: Vars) -> Self {
        Self::constant(vars, GaussRat::one())
    }

    /// The coordinate function of variable `idx`.
    pub fn var(vars: Vars, idx: usize) -> Self {
        let n = vars.len();
        assert!(idx < n, "variable index out of range");
        let mut p = Self::zero(vars);
        p.add_term(Monomial::var_power(n, idx, 1), GaussRat::one());
        p
    }

    pub fn var_named(vars: Vars, name: &str) -> Result<Self> {
        let idx = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownIdentifier { name: name.to_string(), pos: 0 })?;
        Ok(Self::var(vars, idx))
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, GaussRat)>>(vars: Vars, terms: I) -> Self {
        let mut p = Self::zero(vars);
        for (m, c) in terms {
            assert_eq!(m.nvars(), p.nvars(), "monomial arity does not match context");
            p.add_term(m, c);
        }
        p
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &GaussRat)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> GaussRat {
        self.terms.get(m).cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn constant_term(&self) -> GaussRat {
        self.coeff(&Monomial::one(self.nvars()))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn domain(&self) -> Domain {
        if self.terms.values().all(GaussRat::is_real) {
            Domain::Rational
        } else {
            Domain::GaussianRational
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Total degree; `None` for zero.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.exps()[var]).max()
    }

    /// Minimum total degree of the stored terms.
    pub fn ord_zero(&self) -> Order {
        // grlex puts the lowest degree first
        match self.terms.keys().next() {
            Some(m) => Order::Finite(m.degree()),
            None => Order::Infinite,
        }
    }

    pub fn homogeneous_part(&self, d: u32) -> Polynomial {
        Self {
            vars: self.vars.clone(),
            terms: self.terms.iter().filter(|(m, _)| m.degree() == d).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Lowest-degree homogeneous part.
    pub fn initial_form(&self) -> Result<Polynomial> {
        match self.ord_zero() {
            Order::Finite(d) => Ok(self.homogeneous_part(d)),
            Order::Infinite => Err(Error::ZeroInput("initial form of the zero polynomial")),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut it = self.terms.keys().map(Monomial::degree);
        match it.next() {
            Some(d) => it.all(|e| e == d),
            None => true,
        }
    }

    pub fn scale(&self, c: &GaussRat) -> Polynomial {
        if c.is_zero() {
            return Self::zero(self.vars.clone());
        }
        Self { vars: self.vars.clone(), terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &GaussRat) -> Polynomial {
        if c.is_zero() {
            return Self::zero(self.vars.clone());
        }
        Self { vars: self.vars.clone(), terms: self.terms.iter().map(|(t, a)| (t.mul(m), a * c)).collect() }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Self::one(self.vars.clone());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Polynomial {
        let mut out = Self::zero(self.vars.clone());
        for (m, c) in &self.terms {
            let e = m.exps()[var];
            if e == 0 {
                continue;
            }
            let mut exps = m.exps().to_vec();
            exps[var] -= 1;
            out.add_term(Monomial::from_parts(exps, m.degree() - 1), c * &GaussRat::from_int(e as i64));
        }
        out
    }

    /// Partial derivatives with respect to the variables at `wrt`, in order.
    pub fn gradient(&self, wrt: &[usize]) -> Vec<Polynomial> {
        wrt.iter().map(|&v| self.derivative(v)).collect()
    }

    /// Gradient with respect to named variables.
    pub fn gradient_named<S: AsRef<str>>(&self, wrt: &[S]) -> Result<Vec<Polynomial>> {
        let idx = wrt.iter().map(|n| self.var_index(n.as_ref())).collect::<Result<Vec<_>>>()?;
        Ok(self.gradient(&idx))
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownIdentifier { name: name.to_string(), pos: 0 })
    }

    /// Re-expresses the polynomial in another context, matching variables by name.
    pub fn with_vars(&self, target: &Vars) -> Result<Polynomial> {
        let map: Vec<Option<usize>> = self.vars.iter().map(|v| target.iter().position(|t| t == v)).collect();
        let mut out = Self::zero(target.clone());
        for (m, c) in &self.terms {
            let mut exps = vec![0u32; target.len()];
            for (i, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match map[i] {
                    Some(j) => exps[j] += e,
                    None => {
                        return Err(Error::UnknownIdentifier { name: self.vars[i].clone(), pos: 0 });
                    }
                }
            }
            out.add_term(Monomial::new(exps), c.clone());
        }
        Ok(out)
    }

    /// Replaces every variable by the corresponding image polynomial; all
    /// images share one target context.
    pub fn compose(&self, images: &[Polynomial]) -> Polynomial {
        assert_eq!(images.len(), self.nvars(), "one image per variable required");
        let target = images.first().map(|p| p.vars.clone()).unwrap_or_else(|| Arc::new(Vec::new()));
        let mut powers: Vec<Vec<Polynomial>> = images.iter().map(|p| vec![Self::one(target.clone()), p.clone()]).collect();
        let mut out = Self::zero(target.clone());
        for (m, c) in &self.terms {
            let mut term = Self::constant(target.clone(), c.clone());
            for (i, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = &powers[i][powers[i].len() - 1] * &images[i];
                    powers[i].push(next);
                }
                term = &term * &powers[i][e as usize];
            }
            out = &out + &term;
        }
        out
    }

    /// Exact substitution of a partial map `name → value`.
    ///
    /// The result lives in the unbound variables (original order) followed by
    /// any fresh variables introduced by polynomial bindings.
    pub fn substitute(&self, bindings: &[(&str, Binding)]) -> Result<Polynomial> {
        for (name, _) in bindings {
            self.var_index(name)?;
        }
        let mut target: Vec<String> =
            self.vars.iter().filter(|v| !bindings.iter().any(|(n, _)| n == v)).cloned().collect();
        for (_, b) in bindings {
            if let Binding::Poly(p) = b {
                for v in p.vars.iter() {
                    if !target.contains(v) {
                        target.push(v.clone());
                    }
                }
            }
        }
        let target: Vars = Arc::new(target);
        let mut images = Vec::with_capacity(self.nvars());
        for v in self.vars.iter() {
            let img = match bindings.iter().find(|(n, _)| n == v) {
                Some((_, Binding::Scalar(c))) => Self::constant(target.clone(), c.clone()),
                Some((_, Binding::Poly(p))) => p.with_vars(&target)?,
                None => Self::var_named(target.clone(), v)?,
            };
            images.push(img);
        }
        if images.is_empty() {
            return Ok(Self { vars: target, terms: self.terms.clone() });
        }
        Ok(self.compose(&images))
    }

    /// Coefficients of the powers of `var`, as polynomials in the remaining variables.
    pub fn coefficients_in(&self, var: usize) -> Vec<Polynomial> {
        let rest: Vars = Arc::new(self.vars.iter().enumerate().filter(|(i, _)| *i != var).map(|(_, v)| v.clone()).collect());
        let deg = self.degree_in(var).unwrap_or(0) as usize;
        let mut out = vec![Self::zero(rest.clone()); deg + 1];
        for (m, c) in &self.terms {
            let e = m.exps()[var] as usize;
            let exps: Vec<u32> = m.exps().iter().enumerate().filter(|(i, _)| *i != var).map(|(_, &x)| x).collect();
            out[e].add_term(Monomial::new(exps), c.clone());
        }
        out
    }

    /// Exact evaluation at a Gaussian-rational point.
    pub fn eval_exact(&self, point: &[GaussRat]) -> Result<GaussRat> {
        if point.len() != self.nvars() {
            return Err(Error::DimensionMismatch { expected: self.nvars(), got: point.len() });
        }
        let mut acc = GaussRat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exps()) {
                if e > 0 {
                    t = &t * &x.pow(e);
                }
            }
            acc += &t;
        }
        Ok(acc)
    }

    /// Floating evaluation at a complex point.
    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.nvars() {
            return Err(Error::DimensionMismatch { expected: self.nvars(), got: z.len() });
        }
        Ok(super::eval::CompiledPoly::new(self).eval(z))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.to_complex().norm()).fold(0.0, f64::max)
    }
}

fn check_ctx(a: &Polynomial, b: &Polynomial) {
    assert!(
        Arc::ptr_eq(&a.vars, &b.vars) || a.vars == b.vars,
        "polynomials live in different variable contexts: {:?} vs {:?}",
        a.vars,
        b.vars
    );
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        check_ctx(self, rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        check_ctx(self, rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        check_ctx(self, rhs);
        let mut out = Polynomial::zero(self.vars.clone());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial { vars: self.vars.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: Polynomial) -> Polynomial {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for Polynomial {
    /// Descending graded-lex, in the input grammar (`parse_poly` reads it back).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative_real = c.is_real() && c.re < num_rational::BigRational::zero();
            let mag = if negative_real { -c } else { c.clone() };
            if k == 0 {
                if negative_real {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative_real { "-" } else { "+" })?;
            }
            let mono: Vec<String> = m
                .exps()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { self.vars[i].clone() } else { format!("{}^{}", self.vars[i], e) })
                .collect();
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{mag}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_poly;

    fn p(text: &str, v: &[&str]) -> Polynomial {
        parse_poly(text, &vars(v)).unwrap()
    }

    #[test]
    fn ord_and_initial_form() {
        let a = p("x^2*y + y^4", &["x", "y"]);
        assert_eq!(a.ord_zero(), Order::Finite(3));
        assert_eq!(a.initial_form().unwrap(), p("x^2*y", &["x", "y"]));
        assert_eq!(Polynomial::zero(vars(&["x"])).ord_zero(), Order::Infinite);
        assert!(Polynomial::zero(vars(&["x"])).initial_form().is_err());
        let cp = p("t^2 - w^3/27", &["w", "t"]);
        assert_eq!(cp.initial_form().unwrap(), p("t^2", &["w", "t"]));
        assert_eq!(p("-w^2/4", &["w"]).ord_zero(), Order::Finite(2));
        let h = p("x^3 + 2*x*y^2", &["x", "y"]);
        assert_eq!(h.initial_form().unwrap(), h);
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(p("z^3", &["z"]).gradient(&[0]), vec![p("3*z^2", &["z"])]);
        let v = &["x", "y"];
        assert_eq!(p("x^2+y^2", v).gradient(&[0, 1]), vec![p("2*x", v), p("2*y", v)]);
        let v = &["x", "y", "t"];
        let f = p("x^3 + y^3 + t*x*y", v);
        assert_eq!(f.gradient_named(&["x", "y"]).unwrap(), vec![p("3*x^2+t*y", v), p("3*y^2+t*x", v)]);
    }

    #[test]
    fn substitute_examples() {
        let f = p("x^3 + y^3 + t*x*y", &["x", "y", "t"]);
        let f0 = f.substitute(&[("t", Binding::Scalar(GaussRat::zero()))]).unwrap();
        assert_eq!(f0, p("x^3+y^3", &["x", "y"]));

        let g = p("x^2 + y^2 + t*x*y", &["x", "y", "t"]);
        let g0 = g
            .substitute(&[("x", Binding::Scalar(GaussRat::zero())), ("y", Binding::Scalar(GaussRat::zero()))])
            .unwrap();
        assert!(g0.is_zero());
        assert_eq!(**g0.vars(), vec!["t".to_string()]);

        let z = p("z^3", &["z"]);
        let lin = p("2*u", &["u"]);
        assert_eq!(z.substitute(&[("z", Binding::Poly(lin))]).unwrap(), p("8*u^3", &["u"]));
    }

    #[test]
    fn evaluate_examples() {
        let v = vars(&["x", "y"]);
        let q = parse_poly("x^2+y^2", &v).unwrap();
        let r = q.evaluate(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]).unwrap();
        assert!(r.norm() < 1e-15);
        let z = p("z^3", &["z"]);
        assert_eq!(z.evaluate(&[Complex64::new(2.0, 0.0)]).unwrap(), Complex64::new(8.0, 0.0));
        assert!(matches!(z.evaluate(&[]), Err(Error::DimensionMismatch { .. })));
        let g = p("3*x^2 + t*y", &["x", "y", "t"]);
        let at = g.substitute(&[("t", Binding::Scalar(GaussRat::from_frac(1, 8)))]).unwrap();
        assert_eq!(at.evaluate(&[Complex64::new(0.0, 0.0); 2]).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn coefficients_in_variable() {
        let q = p("t^2 - w^3/27 + w*t", &["w", "t"]);
        let cs = q.coefficients_in(1);
        assert_eq!(cs.len(), 3);
        assert_eq!(cs[2], p("1", &["w"]));
        assert_eq!(cs[1], p("w", &["w"]));
        assert_eq!(cs[0], p("-1/27*w^3", &["w"]));
    }

    #[test]
    fn display_round_trip_with_gaussian() {
        let v = vars(&["x", "y"]);
        let q = parse_poly("(1+2*i)*x^2 - 3/4*x*y + i*y - 7", &v).unwrap();
        assert_eq!(q.domain(), Domain::GaussianRational);
        assert_eq!(parse_poly(&q.to_string(), &v).unwrap(), q);
    }
}
