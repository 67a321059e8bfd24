//! Gröbner bases for global orders and Mora standard bases for the local
//! order, with normal forms, staircase counting and block elimination.

mod order;
mod ordered;

use std::sync::Arc;

use serde::Serialize;

pub use order::MonomialOrder;
use ordered::{s_poly, OrderedPoly};

use crate::algebra::{Monomial, Polynomial, Vars};
use crate::error::{Error, Result};

pub const DEFAULT_DEGREE_CAP: u32 = 30;

/// Dimension of a quotient algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dim {
    Finite(usize),
    Infinite,
}

impl Dim {
    pub fn finite(self) -> Option<usize> {
        match self {
            Dim::Finite(n) => Some(n),
            Dim::Infinite => None,
        }
    }
}

impl Serialize for Dim {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dim::Finite(n) => s.serialize_u64(*n as u64),
            Dim::Infinite => s.serialize_str("INFINITE"),
        }
    }
}

/// A completed basis. Immutable; the sorted working copies are kept so that
/// normal forms do not re-sort the generators.
#[derive(Clone, Debug)]
pub struct BasisResult {
    vars: Vars,
    order: MonomialOrder,
    generators: Vec<Polynomial>,
    sorted: Vec<OrderedPoly>,
    reduced: bool,
    local: bool,
}

impl BasisResult {
    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn is_local(&self) -> bool {
        self.local
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.sorted.iter().map(|p| p.lm().clone()).collect()
    }

    /// Whether the (local) ideal is the whole ring.
    pub fn is_unit_ideal(&self) -> bool {
        self.sorted.iter().any(|p| p.lm().is_one())
    }
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
    sugar: u32,
}

struct Engine<'a> {
    order: &'a MonomialOrder,
    cap: u32,
    polys: Vec<OrderedPoly>,
    sugars: Vec<u32>,
    active: Vec<bool>,
    pairs: Vec<Pair>,
}

impl Engine<'_> {
    fn check_cap(&self, p: &OrderedPoly) -> Result<()> {
        let d = p.degree();
        if d > self.cap {
            return Err(Error::DegreeCap { cap: self.cap, degree: d });
        }
        Ok(())
    }

    fn active_polys(&self) -> impl Iterator<Item = &OrderedPoly> + Clone {
        self.polys.iter().zip(&self.active).filter(|(_, a)| **a).map(|(p, _)| p)
    }

    fn reduce(&self, p: OrderedPoly) -> Result<OrderedPoly> {
        if self.order.is_global() {
            full_reduce(p, self.active_polys(), self.order, self.cap)
        } else {
            let reducers: Vec<&OrderedPoly> = self.active_polys().collect();
            mora_normal_form(p, &reducers, self.order, self.cap)
        }
    }

    /// Gebauer–Möller installation of a new element.
    fn insert(&mut self, mut h: OrderedPoly, sugar: u32) {
        h.make_monic();
        let hi = self.polys.len();
        let hlm = h.lm().clone();
        let cands: Vec<(usize, Monomial)> = (0..hi)
            .filter(|&g| self.active[g])
            .map(|g| (g, hlm.lcm(self.polys[g].lm())))
            .collect();

        let mut kept: Vec<(usize, Monomial)> = Vec::new();
        for (k, (g, l)) in cands.iter().enumerate() {
            let coprime = hlm.is_coprime(self.polys[*g].lm());
            let dominated = cands[k + 1..].iter().chain(kept.iter()).any(|(_, l2)| l2.divides(l));
            if coprime || !dominated {
                kept.push((*g, l.clone()));
            }
        }

        self.pairs.retain(|p| {
            !(hlm.divides(&p.lcm)
                && hlm.lcm(self.polys[p.i].lm()) != p.lcm
                && hlm.lcm(self.polys[p.j].lm()) != p.lcm)
        });

        for (g, l) in kept {
            if hlm.is_coprime(self.polys[g].lm()) {
                continue;
            }
            let sg = self.sugars[g] + (l.degree() - self.polys[g].lm().degree());
            let sh = sugar + (l.degree() - hlm.degree());
            self.pairs.push(Pair { i: g, j: hi, lcm: l, sugar: sg.max(sh) });
        }

        for g in 0..hi {
            if self.active[g] && hlm.divides(self.polys[g].lm()) {
                self.active[g] = false;
            }
        }
        self.polys.push(h);
        self.sugars.push(sugar);
        self.active.push(true);
    }

    fn pop_pair(&mut self) -> Option<Pair> {
        let order = self.order;
        let best = (0..self.pairs.len()).min_by(|&a, &b| {
            let (pa, pb) = (&self.pairs[a], &self.pairs[b]);
            pa.sugar
                .cmp(&pb.sugar)
                .then_with(|| pa.lcm.degree().cmp(&pb.lcm.degree()))
                .then_with(|| order.cmp(&pa.lcm, &pb.lcm))
                .then_with(|| (pa.i, pa.j).cmp(&(pb.i, pb.j)))
        })?;
        Some(self.pairs.swap_remove(best))
    }

    fn run(&mut self, gens: Vec<OrderedPoly>) -> Result<()> {
        for g in gens {
            self.check_cap(&g)?;
            let sugar = g.degree();
            let h = self.reduce(g)?;
            if !h.is_zero() {
                let unit = h.lm().is_one();
                self.insert(h, sugar);
                if unit {
                    return Ok(());
                }
            }
        }
        while let Some(pair) = self.pop_pair() {
            let s = s_poly(&self.polys[pair.i], &self.polys[pair.j], self.order);
            self.check_cap(&s)?;
            let h = self.reduce(s)?;
            if !h.is_zero() {
                let unit = h.lm().is_one();
                self.insert(h, pair.sugar);
                if unit {
                    return Ok(());
                }
            }
        }
        Ok(())
    }
}

/// Full (top and tail) reduction for global orders.
fn full_reduce<'a, I>(mut h: OrderedPoly, reducers: I, order: &MonomialOrder, cap: u32) -> Result<OrderedPoly>
where
    I: Iterator<Item = &'a OrderedPoly> + Clone,
{
    let mut idx = 0;
    while idx < h.terms.len() {
        let m = &h.terms[idx].0;
        match reducers.clone().find(|g| g.lm().divides(m)) {
            Some(g) => {
                h = h.reduce_term(idx, g, order);
                let d = h.degree();
                if d > cap {
                    return Err(Error::DegreeCap { cap, degree: d });
                }
            }
            None => idx += 1,
        }
    }
    Ok(h)
}

/// Mora's weak normal form: reducers are chosen with minimal écart and
/// intermediate remainders of smaller écart join the reducer set.
fn mora_normal_form(mut h: OrderedPoly, basis: &[&OrderedPoly], order: &MonomialOrder, cap: u32) -> Result<OrderedPoly> {
    let mut extra: Vec<OrderedPoly> = Vec::new();
    loop {
        if h.is_zero() {
            return Ok(h);
        }
        let lm = h.lm().clone();
        let best = basis
            .iter()
            .copied()
            .chain(extra.iter())
            .filter(|g| g.lm().divides(&lm))
            .min_by_key(|g| g.ecart());
        let Some(g) = best else {
            return Ok(h);
        };
        let g = g.clone();
        if g.ecart() > h.ecart() {
            extra.push(h.clone());
        }
        h = h.reduce_term(0, &g, order);
        let d = h.degree();
        if d > cap {
            return Err(Error::DegreeCap { cap, degree: d });
        }
    }
}

fn prepare(gens: &[Polynomial], order: &MonomialOrder) -> Result<(Vars, Vec<OrderedPoly>)> {
    let vars = match gens.first() {
        Some(p) => p.vars().clone(),
        None => Arc::new(Vec::new()),
    };
    for g in gens {
        if g.vars() != &vars {
            return Err(Error::InvalidInput("generators live in different contexts".into()));
        }
    }
    if let MonomialOrder::Block { sizes, .. } = order {
        if sizes.iter().sum::<usize>() != vars.len() {
            return Err(Error::InvalidInput("block sizes do not cover the variables".into()));
        }
    }
    let sorted = gens.iter().filter(|g| !g.is_zero()).map(|g| OrderedPoly::from_poly(g, order)).collect();
    Ok((vars, sorted))
}

fn finish(vars: Vars, order: &MonomialOrder, mut engine_polys: Vec<OrderedPoly>, local: bool) -> Result<BasisResult> {
    engine_polys.sort_by(|a, b| order.cmp(a.lm(), b.lm()));
    if !local {
        // tail-reduce each element by the others
        for k in 0..engine_polys.len() {
            let p = engine_polys[k].clone();
            let (head, rest) = (p.terms[0].clone(), OrderedPoly { terms: p.terms[1..].to_vec() });
            let others: Vec<OrderedPoly> =
                engine_polys.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, q)| q.clone()).collect();
            let tail = full_reduce(rest, others.iter(), order, u32::MAX)?;
            let mut terms = vec![head];
            terms.extend(tail.terms);
            engine_polys[k] = OrderedPoly { terms };
        }
    }
    let generators = engine_polys.iter().map(|p| p.to_poly(&vars)).collect();
    Ok(BasisResult { vars, order: order.clone(), generators, sorted: engine_polys, reduced: true, local })
}

fn compute(gens: &[Polynomial], order: &MonomialOrder, cap: u32) -> Result<BasisResult> {
    let (vars, sorted) = prepare(gens, order)?;
    let mut engine = Engine { order, cap, polys: Vec::new(), sugars: Vec::new(), active: Vec::new(), pairs: Vec::new() };
    engine.run(sorted)?;
    let kept: Vec<OrderedPoly> = if engine.active_polys().any(|p| p.lm().is_one()) {
        let n = vars.len();
        vec![OrderedPoly { terms: vec![(Monomial::one(n), crate::algebra::GaussRat::from_int(1))] }]
    } else {
        engine.active_polys().cloned().collect()
    };
    finish(vars, order, kept, !order.is_global())
}

/// Reduced Gröbner basis for a global order (Buchberger, sugar selection,
/// Gebauer–Möller criteria).
pub fn groebner(gens: &[Polynomial], order: &MonomialOrder) -> Result<BasisResult> {
    groebner_capped(gens, order, DEFAULT_DEGREE_CAP)
}

pub fn groebner_capped(gens: &[Polynomial], order: &MonomialOrder, cap: u32) -> Result<BasisResult> {
    if !order.is_global() {
        return Err(Error::InvalidInput("groebner requires a global order".into()));
    }
    compute(gens, order, cap)
}

/// Standard basis of the ideal generated in the local ring at the origin,
/// with respect to `negdegrevlex`, via Mora's normal form.
///
/// The result is minimal and monic; tails are not reduced, since full tail
/// reduction need not terminate for a local order.
pub fn local_standard_basis(gens: &[Polynomial]) -> Result<BasisResult> {
    local_standard_basis_capped(gens, DEFAULT_DEGREE_CAP)
}

pub fn local_standard_basis_capped(gens: &[Polynomial], cap: u32) -> Result<BasisResult> {
    compute(gens, &MonomialOrder::NegDegRevLex, cap)
}

/// Number of monomials outside the leading-term ideal.
pub fn quotient_dimension(basis: &BasisResult) -> Dim {
    staircase_size(&basis.leading_monomials(), basis.vars.len())
}

/// Counts monomials not divisible by any of `leading`.
pub fn staircase_size(leading: &[Monomial], nvars: usize) -> Dim {
    if leading.iter().any(Monomial::is_one) {
        return Dim::Finite(0);
    }
    let mut bounds = vec![u32::MAX; nvars];
    for m in leading {
        if let Some(v) = m.pure_power_var() {
            bounds[v] = bounds[v].min(m.exps()[v]);
        }
    }
    if bounds.contains(&u32::MAX) {
        return Dim::Infinite;
    }
    let mut count = 0usize;
    let mut exps = vec![0u32; nvars];
    count_box(0, &bounds, &mut exps, leading, &mut count);
    Dim::Finite(count)
}

fn count_box(var: usize, bounds: &[u32], exps: &mut Vec<u32>, leading: &[Monomial], count: &mut usize) {
    if var == bounds.len() {
        let m = Monomial::new(exps.clone());
        if !leading.iter().any(|l| l.divides(&m)) {
            *count += 1;
        }
        return;
    }
    for e in 0..bounds[var] {
        exps[var] = e;
        // once a prefix is divisible the rest of this row is too
        let m = Monomial::new(exps.clone());
        if leading.iter().any(|l| l.divides(&m)) {
            break;
        }
        count_box(var + 1, bounds, exps, leading, count);
    }
    exps[var] = 0;
}

/// Remainder modulo the basis. Global bases reduce every term; local bases
/// give Mora's weak normal form (leading term irreducible, zero iff member).
pub fn normal_form(p: &Polynomial, basis: &BasisResult) -> Result<Polynomial> {
    if p.vars() != &basis.vars {
        return Err(Error::InvalidInput("polynomial and basis live in different contexts".into()));
    }
    let h = OrderedPoly::from_poly(p, &basis.order);
    let r = if basis.local {
        let reducers: Vec<&OrderedPoly> = basis.sorted.iter().collect();
        mora_normal_form(h, &reducers, &basis.order, u32::MAX)?
    } else {
        full_reduce(h, basis.sorted.iter(), &basis.order, u32::MAX)?
    };
    Ok(r.to_poly(&basis.vars))
}

pub fn is_member(p: &Polynomial, basis: &BasisResult) -> Result<bool> {
    Ok(normal_form(p, basis)?.is_zero())
}

/// S-polynomial of two nonzero polynomials under `order`.
pub fn s_polynomial(f: &Polynomial, g: &Polynomial, order: &MonomialOrder) -> Polynomial {
    let a = OrderedPoly::from_poly(f, order);
    let b = OrderedPoly::from_poly(g, order);
    s_poly(&a, &b, order).to_poly(f.vars())
}

/// Leading monomial under `order`; `None` for zero.
pub fn leading_monomial(p: &Polynomial, order: &MonomialOrder) -> Option<Monomial> {
    p.terms().map(|(m, _)| m).max_by(|a, b| order.cmp(a, b)).cloned()
}

/// Generators of `⟨gens⟩ ∩ k[x_{drop}, …]`: the leading `drop` variables are
/// eliminated. Results live in the context of the remaining variables.
pub fn eliminate(gens: &[Polynomial], drop: usize) -> Result<Vec<Polynomial>> {
    eliminate_capped(gens, drop, DEFAULT_DEGREE_CAP)
}

pub fn eliminate_capped(gens: &[Polynomial], drop: usize, cap: u32) -> Result<Vec<Polynomial>> {
    let Some(first) = gens.first() else {
        return Ok(Vec::new());
    };
    let n = first.nvars();
    if drop > n {
        return Err(Error::InvalidInput("cannot drop more variables than exist".into()));
    }
    let order = MonomialOrder::elimination(drop, n);
    let basis = groebner_capped(gens, &order, cap)?;
    let rest: Vars = Arc::new(first.vars()[drop..].to_vec());
    let mut out = Vec::new();
    for (g, s) in basis.generators.iter().zip(&basis.sorted) {
        if s.lm().partial_degree(0..drop) == 0 {
            out.push(g.with_vars(&rest)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_poly, vars};

    fn polys(texts: &[&str], v: &Vars) -> Vec<Polynomial> {
        texts.iter().map(|t| parse_poly(t, v).unwrap()).collect()
    }

    #[test]
    fn unit_normalization() {
        let v = vars(&["x", "y"]);
        let b = groebner(&polys(&["2*x", "2*y"], &v), &MonomialOrder::DegRevLex).unwrap();
        assert_eq!(b.generators(), &polys(&["y", "x"], &v)[..]);
        assert_eq!(quotient_dimension(&b), Dim::Finite(1));
    }

    #[test]
    fn hesse_jacobian_global_and_local() {
        let v = vars(&["x", "y"]);
        let gens = polys(&["3*x^2+y", "3*y^2+x"], &v);
        let g = groebner(&gens, &MonomialOrder::DegRevLex).unwrap();
        // Bezout: 4 affine solutions, all simple
        assert_eq!(quotient_dimension(&g), Dim::Finite(4));
        let l = local_standard_basis(&gens).unwrap();
        assert_eq!(quotient_dimension(&l), Dim::Finite(1));
    }

    #[test]
    fn infinite_quotient() {
        let v = vars(&["x", "y"]);
        let g = groebner(&polys(&["x"], &v), &MonomialOrder::DegRevLex).unwrap();
        assert_eq!(g.generators(), &polys(&["x"], &v)[..]);
        assert_eq!(quotient_dimension(&g), Dim::Infinite);
    }

    #[test]
    fn mora_specific_case() {
        let v = vars(&["x"]);
        let l = local_standard_basis(&polys(&["x^2 - x^3"], &v)).unwrap();
        assert_eq!(l.leading_monomials(), vec![Monomial::new(vec![2])]);
        assert_eq!(quotient_dimension(&l), Dim::Finite(2));
        // globally x^2(1-x) has a further root at x = 1
        let g = groebner(&polys(&["x^2 - x^3"], &v), &MonomialOrder::DegRevLex).unwrap();
        assert_eq!(quotient_dimension(&g), Dim::Finite(3));
    }

    #[test]
    fn monomial_local_basis() {
        let v = vars(&["z"]);
        let l = local_standard_basis(&polys(&["z^4"], &v)).unwrap();
        assert_eq!(l.generators(), &polys(&["z^4"], &v)[..]);
        assert_eq!(quotient_dimension(&l), Dim::Finite(4));
    }

    #[test]
    fn staircase_counts() {
        let lm = |e: &[u32]| Monomial::new(e.to_vec());
        assert_eq!(staircase_size(&[lm(&[1, 0]), lm(&[0, 1])], 2), Dim::Finite(1));
        assert_eq!(staircase_size(&[lm(&[2, 0]), lm(&[0, 3])], 2), Dim::Finite(6));
        assert_eq!(staircase_size(&[lm(&[1, 0])], 2), Dim::Infinite);
        assert_eq!(staircase_size(&[lm(&[2, 0]), lm(&[1, 1]), lm(&[0, 2])], 2), Dim::Finite(3));
    }

    #[test]
    fn normal_forms() {
        let v = vars(&["x", "y"]);
        let g = groebner(&polys(&["x"], &v), &MonomialOrder::DegRevLex).unwrap();
        assert!(normal_form(&parse_poly("x^2", &v).unwrap(), &g).unwrap().is_zero());
        let j = local_standard_basis(&polys(&["3*x^2", "3*y^2"], &v)).unwrap();
        assert!(normal_form(&parse_poly("y^4", &v).unwrap(), &j).unwrap().is_zero());
        let xy = parse_poly("x*y", &v).unwrap();
        assert_eq!(normal_form(&xy, &j).unwrap(), xy);
    }

    #[test]
    fn eliminations() {
        let v = vars(&["z", "w", "t"]);
        let wt = vars(&["w", "t"]);
        // compare up to a scalar: rescale so the pure t-power is monic
        let monic_in_t = |p: &Polynomial| {
            let lead = p.coefficients_in(1).last().unwrap().constant_term();
            p.scale(&lead.inv().unwrap())
        };
        let e = eliminate(&polys(&["2*z - w", "t - z^2"], &v), 1).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(monic_in_t(&e[0]), parse_poly("t - 1/4*w^2", &wt).unwrap());
        let e = eliminate(&polys(&["3*z^2 - w", "t - z^3"], &v), 1).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(monic_in_t(&e[0]), parse_poly("t^2 - 1/27*w^3", &wt).unwrap());
        let xy = vars(&["x", "y"]);
        assert!(eliminate(&polys(&["x - y"], &xy), 1).unwrap().is_empty());
    }

    #[test]
    fn degree_cap_is_a_resource_error() {
        let v = vars(&["x", "y"]);
        let r = groebner_capped(&polys(&["x^5 + y", "y^5 + x"], &v), &MonomialOrder::Lex, 8);
        assert!(matches!(r, Err(Error::DegreeCap { cap: 8, .. })));
    }
}
