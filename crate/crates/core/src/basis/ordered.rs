//! Term lists sorted by a monomial order, the working representation inside
//! the basis algorithms.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use super::order::MonomialOrder;
use crate::algebra::{GaussRat, Monomial, Polynomial, Vars};

#[derive(Clone, Debug)]
pub(crate) struct OrderedPoly {
    /// Descending in the order: `terms[0]` is the leading term.
    pub terms: Vec<(Monomial, GaussRat)>,
}

impl OrderedPoly {
    pub fn from_poly(p: &Polynomial, order: &MonomialOrder) -> Self {
        let mut terms: Vec<(Monomial, GaussRat)> = p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        terms.sort_by(|a, b| order.cmp(&b.0, &a.0));
        Self { terms }
    }

    pub fn to_poly(&self, vars: &Vars) -> Polynomial {
        Polynomial::from_terms(vars.clone(), self.terms.iter().cloned())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lm(&self) -> &Monomial {
        &self.terms[0].0
    }

    pub fn lc(&self) -> &GaussRat {
        &self.terms[0].1
    }

    /// Maximum total degree among the terms.
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    /// Mora's écart: `deg f − deg LM(f)`.
    pub fn ecart(&self) -> u32 {
        self.degree() - self.lm().degree()
    }

    pub fn make_monic(&mut self) {
        if self.is_zero() || self.lc().is_one() {
            return;
        }
        let inv = self.lc().inv().expect("nonzero leading coefficient");
        for (_, c) in &mut self.terms {
            *c = &*c * &inv;
        }
    }

    /// `self − coef · mono · other`, merging the sorted term lists.
    pub fn sub_scaled(&self, coef: &GaussRat, mono: &Monomial, other: &OrderedPoly, order: &MonomialOrder) -> OrderedPoly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut a = self.terms.iter().peekable();
        let mut b = other.terms.iter().map(|(m, c)| (m.mul(mono), c * coef)).peekable();
        loop {
            let ord = match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(_), None) => Ordering::Greater,
                (None, Some(_)) => Ordering::Less,
                (Some(x), Some(y)) => order.cmp(&x.0, &y.0),
            };
            match ord {
                Ordering::Greater => out.push(a.next().unwrap().clone()),
                Ordering::Less => {
                    let (m, c) = b.next().unwrap();
                    out.push((m, -c));
                }
                Ordering::Equal => {
                    let (m, c) = a.next().unwrap();
                    let (_, d) = b.next().unwrap();
                    let s = c - &d;
                    if !s.is_zero() {
                        out.push((m.clone(), s));
                    }
                }
            }
        }
        OrderedPoly { terms: out }
    }

    /// Cancels the term at `idx` (whose monomial `reducer.lm()` divides).
    pub fn reduce_term(&self, idx: usize, reducer: &OrderedPoly, order: &MonomialOrder) -> OrderedPoly {
        let (m, c) = &self.terms[idx];
        let q = reducer.lm().quotient_of(m).expect("reducer must divide the term");
        let coef = c / reducer.lc();
        self.sub_scaled(&coef, &q, reducer, order)
    }
}

/// S-polynomial of two nonzero sorted polynomials.
pub(crate) fn s_poly(f: &OrderedPoly, g: &OrderedPoly, order: &MonomialOrder) -> OrderedPoly {
    let l = f.lm().lcm(g.lm());
    let mf = f.lm().quotient_of(&l).unwrap();
    let mg = g.lm().quotient_of(&l).unwrap();
    let zero = OrderedPoly { terms: Vec::new() };
    let fa = zero.sub_scaled(&-&f.lc().inv().unwrap(), &mf, f, order);
    fa.sub_scaled(&g.lc().inv().unwrap(), &mg, g, order)
}
