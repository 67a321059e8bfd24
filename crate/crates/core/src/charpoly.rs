//! The characteristic polynomial `P(w,t) = t^μ + a₁(w)t^{μ−1} + … + a_μ(w)`
//! of `f` with respect to a finite map germ `g`: the monic polynomial whose
//! roots over a generic `w` are the values of `f` on the fibre `g⁻¹(w)`.
//!
//! Exact coefficients come from eliminating `z` from
//! `⟨g(z) − w, t − f(z)⟩`; numeric ones from fibres sampled along rays.

use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{norm, Order, PolyMap, Polynomial, Vars};
use crate::basis::{eliminate_capped, groebner_capped, local_standard_basis_capped, quotient_dimension, Dim, MonomialOrder};
use crate::error::{Error, Result};
use crate::export::{csv_complex, csv_f64, json, Csv};
use crate::fibres::{geometric_radii, mix_seed, random_direction, rng_for, track_ray, FibreConfig};
use crate::milnor::Germ;

/// Samples with `|aⱼ| ≤ NOISE_FLOOR · eⱼ(|v|)` are numerically zero.
pub const NOISE_FLOOR: f64 = 1e-10;
/// Fitted slopes must lie this close to an integer.
pub const FIT_GUARD: f64 = 0.1;
pub const MIN_USABLE_RADII: usize = 4;
pub const MIN_USABLE_RAYS: usize = 3;
/// Slopes are fitted on the last `FIT_WINDOW` samples above the noise floor.
pub const FIT_WINDOW: usize = 4;
/// A ray is settled when, across the fit window, consecutive samples differ
/// in phase by at most this much and the local slopes spread by at most this
/// much. Unsettled rays sit in a cancellation dip or a crossover.
pub const SETTLE_TOL: f64 = 0.1;
/// Weight of the off-axis components in a tilted coordinate ray.
pub const AXIS_TILT: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Numeric,
}

/// `aⱼ = num/den` with `den(0) ≠ 0`; `den = 1` whenever the eliminant is
/// monic in `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactCoefficient {
    pub num: Polynomial,
    pub den: Polynomial,
}

impl ExactCoefficient {
    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    /// The coefficient as a polynomial when the denominator is constant.
    pub fn as_polynomial(&self) -> Option<Polynomial> {
        if !self.is_polynomial() {
            return None;
        }
        let inv = self.den.constant_term().inv()?;
        Some(self.num.scale(&inv))
    }

    pub fn evaluate(&self, w: &[Complex64]) -> Result<Complex64> {
        Ok(self.num.evaluate(w)? / self.den.evaluate(w)?)
    }
}

/// Values of one `aⱼ` along one ray; `None` marks an excluded sample
/// (incomplete fibre).
#[derive(Clone, Debug, Serialize)]
pub struct RayTable {
    #[serde(serialize_with = "json::complexes")]
    pub direction: Vec<Complex64>,
    #[serde(serialize_with = "json::reals")]
    pub radii: Vec<f64>,
    #[serde(serialize_with = "json::opt_complexes")]
    pub values: Vec<Option<Complex64>>,
    /// `eⱼ(|v₁|,…,|v_μ|)`, the magnitude scale for the noise floor.
    #[serde(serialize_with = "json::opt_reals")]
    pub scales: Vec<Option<f64>>,
}

impl RayTable {
    pub fn usable(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }
}

#[derive(Clone, Debug)]
pub enum CoefficientData {
    Exact(ExactCoefficient),
    Sampled(Vec<RayTable>),
}

#[derive(Clone, Debug)]
pub struct Coefficient {
    pub j: usize,
    pub data: CoefficientData,
}

#[derive(Clone, Debug)]
struct Source {
    f: Polynomial,
    map: Vec<Polynomial>,
}

#[derive(Clone, Debug)]
pub struct CharPoly {
    mu: usize,
    method: Method,
    /// Coordinates of the coefficient ring (the `w` block, then parameters).
    w_vars: Vars,
    t_name: String,
    coefficients: Vec<Coefficient>,
    /// `den·P` over `(w_vars…, t)` for the exact path.
    eliminant: Option<Polynomial>,
    source: Option<Source>,
    fibre_cfg: Option<FibreConfig>,
}

impl CharPoly {
    /// A characteristic-polynomial-shaped object from explicit polynomial
    /// coefficients `a₁…a_μ` (all in one context). Not tied to any germ.
    pub fn from_coefficients(coeffs: Vec<Polynomial>, t_name: &str) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::InvalidInput("need at least one coefficient".into()));
        };
        let w_vars = first.vars().clone();
        if coeffs.iter().any(|c| c.vars() != &w_vars) {
            return Err(Error::InvalidInput("coefficients must share one context".into()));
        }
        let mu = coeffs.len();
        let mut names = w_vars.to_vec();
        names.push(t_name.to_string());
        let ring: Vars = Arc::new(names);
        let mut p = Polynomial::var(ring.clone(), w_vars.len()).pow(mu as u32);
        for (k, a) in coeffs.iter().enumerate() {
            let a = a.with_vars(&ring)?;
            p = &p + &(&a * &Polynomial::var(ring.clone(), w_vars.len()).pow((mu - k - 1) as u32));
        }
        let one = Polynomial::one(w_vars.clone());
        let coefficients = coeffs
            .into_iter()
            .enumerate()
            .map(|(k, num)| Coefficient { j: k + 1, data: CoefficientData::Exact(ExactCoefficient { num, den: one.clone() }) })
            .collect();
        Ok(Self {
            mu,
            method: Method::Exact,
            w_vars,
            t_name: t_name.to_string(),
            coefficients,
            eliminant: Some(p),
            source: None,
            fibre_cfg: None,
        })
    }

    /// Renames the coefficient-ring coordinates and `t` (numeric path only;
    /// exact coefficients carry their names in their polynomials).
    pub(crate) fn rename_numeric(&mut self, w_vars: Vars, t_name: String) {
        debug_assert!(!self.is_exact() && w_vars.len() == self.w_vars.len());
        self.w_vars = w_vars;
        self.t_name = t_name;
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn is_exact(&self) -> bool {
        self.method == Method::Exact
    }

    pub fn w_vars(&self) -> &Vars {
        &self.w_vars
    }

    pub fn t_name(&self) -> &str {
        &self.t_name
    }

    pub fn coefficients(&self) -> &[Coefficient] {
        &self.coefficients
    }

    /// `aⱼ`, 1-based.
    pub fn coefficient(&self, j: usize) -> &Coefficient {
        &self.coefficients[j - 1]
    }

    /// `den·P` as a polynomial in `(w…, t)` (exact path only). Equals `P`
    /// when [`CharPoly::is_monic_polynomial`] holds.
    pub fn eliminant(&self) -> Option<&Polynomial> {
        self.eliminant.as_ref()
    }

    /// All coefficients are polynomials, so `P` itself is a polynomial.
    pub fn is_monic_polynomial(&self) -> bool {
        self.coefficients.iter().all(|c| matches!(&c.data, CoefficientData::Exact(e) if e.is_polynomial()))
    }

    /// `P` as a polynomial in `(w…, t)`, when it is one.
    pub fn polynomial(&self) -> Option<Polynomial> {
        self.is_monic_polynomial().then(|| self.eliminant.clone()).flatten()
    }

    /// Human-readable `P` in the input grammar; a non-polynomial `P` is shown
    /// as `(den·P)/(den)`.
    pub fn display_exact(&self) -> Option<String> {
        let q = self.eliminant.as_ref()?;
        if self.is_monic_polynomial() {
            return Some(q.to_string());
        }
        let CoefficientData::Exact(e) = &self.coefficients[0].data else { return None };
        Some(format!("({q})/({})", e.den))
    }

    /// Coefficient values at `w` (exact: evaluation; numeric: a fresh fibre).
    /// `None` when the numeric fibre over `w` is incomplete.
    pub fn evaluate_coefficients(&self, w: &[Complex64]) -> Result<Option<Vec<Complex64>>> {
        if w.len() != self.w_vars.len() {
            return Err(Error::DimensionMismatch { expected: self.w_vars.len(), got: w.len() });
        }
        if self.is_exact() {
            let mut out = Vec::with_capacity(self.mu);
            for c in &self.coefficients {
                let CoefficientData::Exact(e) = &c.data else { unreachable!() };
                out.push(e.evaluate(w)?);
            }
            return Ok(Some(out));
        }
        let (Some(src), Some(cfg)) = (&self.source, &self.fibre_cfg) else {
            return Err(Error::Internal("numeric characteristic polynomial without a source".into()));
        };
        let map = PolyMap::new(src.map.clone());
        let stream = w.iter().fold(0x5eed_u64, |h, c| mix_seed(mix_seed(h, c.re.to_bits()), c.im.to_bits()));
        let fibre = crate::fibres::solve_fibre(&map, w, self.mu, cfg, stream);
        if !fibre.complete {
            return Ok(None);
        }
        let fv = crate::algebra::CompiledPoly::new(&src.f);
        let values: Vec<Complex64> = fibre.points.iter().map(|p| fv.eval(p)).collect();
        Ok(Some(signed_elementary(&values)))
    }

    pub fn summary(&self) -> CharPolySummary {
        let coefficients = self
            .coefficients
            .iter()
            .map(|c| match &c.data {
                CoefficientData::Exact(e) => CoefficientSummary {
                    j: c.j,
                    num: Some(e.num.to_string()),
                    den: Some(e.den.to_string()),
                    usable_samples: None,
                },
                CoefficientData::Sampled(t) => CoefficientSummary {
                    j: c.j,
                    num: None,
                    den: None,
                    usable_samples: Some(t.iter().map(RayTable::usable).sum()),
                },
            })
            .collect();
        CharPolySummary {
            mu: self.mu,
            method: self.method,
            w_vars: self.w_vars.to_vec(),
            t: self.t_name.clone(),
            p: self.display_exact(),
            coefficients,
            fibre_config: self.fibre_cfg.clone(),
        }
    }

    /// `P(w, t)` from coefficient values.
    pub fn horner(coeffs: &[Complex64], t: Complex64) -> Complex64 {
        coeffs.iter().fold(Complex64::new(1.0, 0.0), |acc, a| acc * t + a)
    }

    /// CSV `(ray, radius, j, re, im)` of sampled coefficients.
    pub fn samples_csv(&self) -> Option<String> {
        if self.is_exact() {
            return None;
        }
        let mut csv = Csv::new(&["ray", "radius", "j", "re_a", "im_a"]);
        let nrays = match &self.coefficients[0].data {
            CoefficientData::Sampled(r) => r.len(),
            CoefficientData::Exact(_) => 0,
        };
        for ray in 0..nrays {
            for c in &self.coefficients {
                let CoefficientData::Sampled(tables) = &c.data else { continue };
                let tab = &tables[ray];
                for (s, v) in tab.radii.iter().zip(&tab.values) {
                    if let Some(v) = v {
                        let [re, im] = csv_complex(*v);
                        csv.row(&[ray.to_string(), csv_f64(*s), c.j.to_string(), re, im]);
                    }
                }
            }
        }
        Some(csv.finish())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientSummary {
    pub j: usize,
    pub num: Option<String>,
    pub den: Option<String>,
    /// Numeric path: samples kept over all rays and radii.
    pub usable_samples: Option<usize>,
}

/// Report-friendly view of a [`CharPoly`].
#[derive(Clone, Debug, Serialize)]
pub struct CharPolySummary {
    pub mu: usize,
    pub method: Method,
    pub w_vars: Vec<String>,
    pub t: String,
    pub p: Option<String>,
    pub coefficients: Vec<CoefficientSummary>,
    pub fibre_config: Option<FibreConfig>,
}

/// `aⱼ = (−1)ʲ eⱼ(v)`, `j = 1..n`.
pub fn signed_elementary(values: &[Complex64]) -> Vec<Complex64> {
    // coefficients of ∏(t − vᵢ), highest first
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for v in values {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (k, a) in c.iter().enumerate() {
            next[k] += a;
            next[k + 1] -= a * v;
        }
        c = next;
    }
    c.split_off(1)
}

/// `eⱼ(|v₁|,…,|vₙ|)`, `j = 1..n`.
pub fn elementary_of_moduli(values: &[Complex64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for v in values {
        let a = v.norm();
        let mut next = vec![0.0; c.len() + 1];
        for (k, x) in c.iter().enumerate() {
            next[k] += x;
            next[k + 1] += x * a;
        }
        c = next;
    }
    c.split_off(1)
}

/// `base`, or `base` with underscores appended until it is not in `taken`.
pub(crate) fn fresh_name(base: &str, taken: &[String]) -> String {
    let mut name = base.to_string();
    while taken.iter().any(|t| t == &name) {
        name.push('_');
    }
    name
}

/// Default coordinate names for the target of an `m`-component map:
/// `w` when `m = 1`, else `w1…wm`.
pub(crate) fn w_names(prefix: &str, m: usize, taken: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(m);
    for k in 0..m {
        let base = if m == 1 { prefix.to_string() } else { format!("{prefix}{}", k + 1) };
        let mut all = taken.to_vec();
        all.extend(out.iter().cloned());
        out.push(fresh_name(&base, &all));
    }
    out
}

/// Exact path, shared by germs and unfoldings.
///
/// `f` and `g` live in `(x₁…x_m, p₁…p_k)`; the first `m = g.len()` variables
/// are eliminated, the parameters `p` stay. The coefficient ring is
/// `(w₁…w_m, p₁…p_k)` with the given names for `w` and `t`.
pub(crate) fn exact_general(f: &Polynomial, g: &[Polynomial], mu: usize, w: &[String], t: &str, cap: u32) -> Result<CharPoly> {
    let ctx = f.vars().clone();
    let m = g.len();
    let k = ctx.len() - m;
    if w.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: w.len() });
    }
    if mu == 0 {
        return Err(Error::Precondition("the map germ is not zero at the origin (multiplicity 0)".into()));
    }

    // global/local coincidence: the whole variety of ⟨g, p⟩ is the origin with multiplicity μ
    let mut gate: Vec<Polynomial> = g.to_vec();
    gate.extend((m..ctx.len()).map(|i| Polynomial::var(ctx.clone(), i)));
    let global = groebner_capped(&gate, &MonomialOrder::DegRevLex, cap)?;
    match quotient_dimension(&global) {
        Dim::Finite(d) if d == mu => {}
        Dim::Finite(d) => {
            return Err(Error::GlobalLocalMismatch(format!("global multiplicity {d} differs from local multiplicity {mu}")));
        }
        Dim::Infinite => return Err(Error::GlobalLocalMismatch("the map has a positive-dimensional zero set".into())),
    }

    let mut names: Vec<String> = ctx[..m].to_vec();
    names.extend(w.iter().cloned());
    names.extend(ctx[m..].iter().cloned());
    names.push(t.to_string());
    let ring: Vars = Arc::new(names);
    let wi = |i: usize| Polynomial::var(ring.clone(), m + i);
    let tv = Polynomial::var(ring.clone(), 2 * m + k);
    let mut gens = Vec::with_capacity(m + 1);
    for (i, gi) in g.iter().enumerate() {
        gens.push(&gi.with_vars(&ring)? - &wi(i));
    }
    gens.push(&tv - &f.with_vars(&ring)?);
    let elim = eliminate_capped(&gens, m, cap)?;
    let q = match elim.as_slice() {
        [q] => q.clone(),
        [] => return Err(Error::GlobalLocalMismatch("empty elimination ideal".into())),
        _ => return Err(Error::GlobalLocalMismatch(format!("elimination ideal has {} generators", elim.len()))),
    };
    let t_idx = m + k;
    let deg = q.degree_in(t_idx).unwrap_or(0) as usize;
    if deg == 0 || mu % deg != 0 {
        return Err(Error::GlobalLocalMismatch(format!("eliminant has degree {deg} in {t}, expected a divisor of {mu}")));
    }
    // f separates the fibre only up to repetition: P = Q^(μ/deg)
    let p = q.pow((mu / deg) as u32);
    let mut parts = p.coefficients_in(t_idx);
    let lead = parts.pop().expect("nonzero t-degree");
    let c0 = lead.constant_term();
    let Some(c0_inv) = c0.inv() else {
        return Err(Error::GlobalLocalMismatch(format!("leading coefficient {lead} vanishes at the origin")));
    };
    let den = lead.scale(&c0_inv);
    let p = p.scale(&c0_inv);
    let coefficients: Vec<Coefficient> = (1..=mu)
        .map(|j| {
            let num = parts[mu - j].scale(&c0_inv);
            Coefficient { j, data: CoefficientData::Exact(ExactCoefficient { num, den: den.clone() }) }
        })
        .collect();
    let w_ctx: Vars = Arc::new(ring[m..2 * m + k].to_vec());
    debug_assert!(coefficients.iter().all(|c| matches!(&c.data, CoefficientData::Exact(e) if e.num.vars() == &w_ctx)));

    // P(g, p, f) ≡ 0
    let mut images: Vec<Polynomial> = g.to_vec();
    images.extend((m..ctx.len()).map(|i| Polynomial::var(ctx.clone(), i)));
    images.push(f.clone());
    let residual = p.compose(&images);
    if !residual.is_zero() {
        let lead = residual.terms().next_back().map(|(m, c)| format!("{}", Polynomial::from_terms(ctx.clone(), [(m.clone(), c.clone())])));
        return Err(Error::IdentityFailed(format!("P(g, f) has term {}", lead.unwrap_or_default())));
    }

    Ok(CharPoly {
        mu,
        method: Method::Exact,
        w_vars: w_ctx,
        t_name: t.to_string(),
        coefficients,
        eliminant: Some(p),
        source: Some(Source { f: f.clone(), map: g.to_vec() }),
        fibre_cfg: None,
    })
}

/// Multiplicity of the map germ `g` at 0: `dim 𝒪/⟨g⟩`.
pub fn map_multiplicity(g: &[Polynomial], cap: u32) -> Result<usize> {
    match quotient_dimension(&local_standard_basis_capped(g, cap)?) {
        Dim::Finite(d) => Ok(d),
        Dim::Infinite => Err(Error::Precondition("g⁻¹(0) is not isolated at the origin".into())),
    }
}

fn check_map(f: &Germ, g: &[Polynomial]) -> Result<()> {
    if g.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: g.len() });
    }
    if g.iter().any(|c| c.vars() != f.vars()) {
        return Err(Error::InvalidInput("map components must use the germ's variables".into()));
    }
    if g.iter().any(|c| !c.constant_term().is_zero()) {
        return Err(Error::Precondition("the map must vanish at the origin".into()));
    }
    Ok(())
}

fn multiplicity_for(f: &Germ, g: &[Polynomial]) -> Result<usize> {
    if g == f.gradient().as_slice() {
        f.milnor_number()
    } else {
        map_multiplicity(g, f.degree_cap())
    }
}

/// Exact characteristic polynomial of `f` with respect to `g`, in
/// coordinates `w` (or `w1…wm`) and `t`.
///
/// Refuses with `GlobalLocalMismatch` when the global zero set of `g` is
/// larger than the origin or the eliminant does not match the germ.
pub fn charpoly_exact(f: &Germ, g: &[Polynomial]) -> Result<CharPoly> {
    check_map(f, g)?;
    let mu = multiplicity_for(f, g)?;
    let taken = f.vars().to_vec();
    let w = w_names("w", g.len(), &taken);
    let mut all = taken;
    all.extend(w.iter().cloned());
    let t = fresh_name("t", &all);
    exact_general(f.f(), g, mu, &w, &t, f.degree_cap())
}

/// The 5-ray default: 3 uniformly random unit directions and 2 coordinate
/// directions (`e₁, e_m`, or `1, i` when `m = 1`).
pub fn default_rays(dim: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = rng_for(seed, 0xA11_5EED);
    let mut rays: Vec<Vec<Complex64>> = (0..3).map(|_| random_direction(&mut rng, dim)).collect();
    let unit = |k: usize, c: Complex64| -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[k] = c;
        v
    };
    rays.push(unit(0, Complex64::new(1.0, 0.0)));
    if dim == 1 {
        rays.push(unit(0, Complex64::new(0.0, 1.0)));
    } else {
        rays.push(unit(dim - 1, Complex64::new(1.0, 0.0)));
    }
    rays
}

/// The default radii: 8 radii from `1e-1` with ratio `1/2`.
pub fn default_radii() -> Vec<f64> {
    geometric_radii(1e-1, 0.5, 8)
}

/// Numeric characteristic polynomial from fibres along rays.
///
/// `aⱼ(s·w₀) = (−1)ʲ eⱼ(f(z⁽¹⁾),…,f(z⁽ᵘ⁾))` at each radius; incomplete
/// fibres are recorded as excluded samples.
pub fn charpoly_numeric(f: &Germ, g: &[Polynomial], rays: &[Vec<Complex64>], radii: &[f64], cfg: &FibreConfig) -> Result<CharPoly> {
    check_map(f, g)?;
    cfg.validate()?;
    let mu = multiplicity_for(f, g)?;
    if mu == 0 {
        return Err(Error::Precondition("the map germ is not zero at the origin (multiplicity 0)".into()));
    }
    if radii.windows(2).any(|p| !(p[1] < p[0])) || radii.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidInput("radii must be positive and strictly decreasing".into()));
    }
    let mut dirs = Vec::with_capacity(rays.len());
    for r in rays {
        if r.len() != f.dim() {
            return Err(Error::DimensionMismatch { expected: f.dim(), got: r.len() });
        }
        let n = norm(r);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidInput("ray directions must be nonzero".into()));
        }
        dirs.push(r.iter().map(|c| c / n).collect::<Vec<_>>());
    }

    let map = PolyMap::new(g.to_vec());
    let fv = crate::algebra::CompiledPoly::new(f.f());
    let per_ray: Vec<(Vec<Complex64>, Vec<Option<Vec<Complex64>>>, Vec<Option<Vec<f64>>>)> = dirs
        .par_iter()
        .enumerate()
        .map(|(ri, w0)| {
            let mut w0 = w0.clone();
            let mut fibres = track_ray(&map, &w0, radii, mu, cfg, ri as u64);
            // An axis often carries a multiple point of the fibre; a slightly
            // tilted ray still probes the pure powers of that coordinate.
            if fibres.iter().any(|fib| !fib.complete) {
                if let Some(tilted) = tilt_axis(&w0) {
                    let alt = track_ray(&map, &tilted, radii, mu, cfg, ri as u64);
                    if alt.iter().filter(|fib| fib.complete).count() > fibres.iter().filter(|fib| fib.complete).count() {
                        w0 = tilted;
                        fibres = alt;
                    }
                }
            }
            let mut a = Vec::with_capacity(radii.len());
            let mut e = Vec::with_capacity(radii.len());
            for fib in &fibres {
                if fib.complete {
                    let v: Vec<Complex64> = fib.points.iter().map(|p| fv.eval(p)).collect();
                    a.push(Some(signed_elementary(&v)));
                    e.push(Some(elementary_of_moduli(&v)));
                } else {
                    a.push(None);
                    e.push(None);
                }
            }
            (w0, a, e)
        })
        .collect();

    if per_ray.iter().all(|(_, a, _)| a.iter().flatten().count() < MIN_USABLE_RADII) {
        return Err(Error::TooFewSamples(format!("fewer than {MIN_USABLE_RADII} complete fibres on every ray")));
    }
    let coefficients = (1..=mu)
        .map(|j| {
            let tables = per_ray
                .iter()
                .map(|(d, a, e)| RayTable {
                    direction: d.clone(),
                    radii: radii.to_vec(),
                    values: a.iter().map(|x| x.as_ref().map(|v| v[j - 1])).collect(),
                    scales: e.iter().map(|x| x.as_ref().map(|v| v[j - 1])).collect(),
                })
                .collect();
            Coefficient { j, data: CoefficientData::Sampled(tables) }
        })
        .collect();

    let taken = f.vars().to_vec();
    let w = w_names("w", g.len(), &taken);
    let mut all = taken;
    all.extend(w.iter().cloned());
    Ok(CharPoly {
        mu,
        method: Method::Numeric,
        w_vars: Arc::new(w),
        t_name: fresh_name("t", &all),
        coefficients,
        eliminant: None,
        source: Some(Source { f: f.f().clone(), map: g.to_vec() }),
        fibre_cfg: Some(cfg.clone()),
    })
}

/// `(e_k + AXIS_TILT·Σ_{i≠k} e_i)/‖·‖` for a direction supported on the single
/// coordinate `k`; `None` for other directions or in dimension 1.
fn tilt_axis(w0: &[Complex64]) -> Option<Vec<Complex64>> {
    if w0.len() < 2 {
        return None;
    }
    let mut support = w0.iter().enumerate().filter(|(_, c)| !c.is_zero());
    let (k, c) = support.next()?;
    if support.next().is_some() {
        return None;
    }
    let phase = c / c.norm();
    let v: Vec<Complex64> = (0..w0.len()).map(|i| if i == k { phase } else { phase * AXIS_TILT }).collect();
    let n = norm(&v);
    Some(v.iter().map(|c| c / n).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderMethod {
    Exact,
    Fitted,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderEstimate {
    pub j: usize,
    pub value: Order,
    pub method: OrderMethod,
    /// Minimum fitted slope over rays.
    #[serde(serialize_with = "json::opt_real")]
    pub slope: Option<f64>,
    /// RMS residual of the fit on the ray attaining the minimum.
    #[serde(serialize_with = "json::opt_real")]
    pub residual: Option<f64>,
    /// Tail-window slope of every ray with enough samples.
    #[serde(serialize_with = "json::reals")]
    pub ray_slopes: Vec<f64>,
    /// Whether each of those rays passed the settling test.
    pub settled: Vec<bool>,
}

/// Least-squares line through `(x, y)`: `(slope, rms residual)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - icpt).powi(2)).sum();
    (slope, (rss / n).sqrt())
}

/// `ord₀ aⱼ`: exact via the lowest degree of the numerator (the denominator
/// is a unit), numeric via log-log slopes along rays.
pub fn ord_of_coefficient(c: &Coefficient) -> Result<OrderEstimate> {
    let tables = match &c.data {
        CoefficientData::Exact(e) => {
            return Ok(OrderEstimate {
                j: c.j,
                value: e.num.ord_zero(),
                method: OrderMethod::Exact,
                slope: None,
                residual: None,
                ray_slopes: Vec::new(),
                settled: Vec::new(),
            });
        }
        CoefficientData::Sampled(t) => t,
    };
    let usable: Vec<&RayTable> = tables.iter().filter(|t| t.usable() >= MIN_USABLE_RADII).collect();
    if usable.len() < MIN_USABLE_RAYS {
        return Err(Error::TooFewSamples(format!(
            "a_{}: {} rays with at least {MIN_USABLE_RADII} complete fibres, need {MIN_USABLE_RAYS}",
            c.j,
            usable.len()
        )));
    }
    let mut fits: Vec<(f64, f64, bool)> = Vec::new();
    let mut any_above = false;
    for t in &usable {
        let mut pts: Vec<(f64, Complex64)> = Vec::new();
        for ((s, v), e) in t.radii.iter().zip(&t.values).zip(&t.scales) {
            let (Some(v), Some(e)) = (v, e) else { continue };
            if v.norm() > NOISE_FLOOR * e && v.norm() > 0.0 {
                pts.push((s.ln(), *v));
            }
        }
        any_above |= !pts.is_empty();
        if pts.len() >= MIN_USABLE_RADII {
            fits.push(tail_fit(&pts[pts.len().saturating_sub(FIT_WINDOW)..]));
        }
    }
    if !any_above {
        return Ok(OrderEstimate {
            j: c.j,
            value: Order::Infinite,
            method: OrderMethod::Fitted,
            slope: None,
            residual: None,
            ray_slopes: Vec::new(),
            settled: Vec::new(),
        });
    }
    if fits.is_empty() {
        return Err(Error::TooFewSamples(format!("a_{}: too few samples above the noise floor", c.j)));
    }
    let best = |settled_only: bool| {
        fits.iter().filter(|f| f.2 || !settled_only).min_by(|a, b| a.0.total_cmp(&b.0)).copied()
    };
    let Some((slope, residual, _)) = best(true) else {
        let (slope, _, _) = best(false).expect("fits is nonempty");
        return Err(Error::FitUnstable { j: c.j, slope });
    };
    let rounded = slope.round();
    if (slope - rounded).abs() >= FIT_GUARD || rounded < 0.0 {
        return Err(Error::FitUnstable { j: c.j, slope });
    }
    Ok(OrderEstimate {
        j: c.j,
        value: Order::Finite(rounded as u32),
        method: OrderMethod::Fitted,
        slope: Some(slope),
        residual: Some(residual),
        ray_slopes: fits.iter().map(|f| f.0).collect(),
        settled: fits.iter().map(|f| f.2).collect(),
    })
}

/// Least-squares slope over `(ln s, aⱼ)` samples, its residual, and whether
/// the samples follow a single power law (steady phase and local slope).
fn tail_fit(pts: &[(f64, Complex64)]) -> (f64, f64, bool) {
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.norm().ln()).collect();
    let (slope, residual) = least_squares(&xs, &ys);
    let steady_phase = pts.windows(2).all(|p| (p[1].1 / p[0].1).arg().abs() <= SETTLE_TOL);
    let local: Vec<f64> = pts.windows(2).map(|p| (p[1].1.norm().ln() - p[0].1.norm().ln()) / (p[1].0 - p[0].0)).collect();
    let spread = local.iter().copied().fold(f64::NEG_INFINITY, f64::max) - local.iter().copied().fold(f64::INFINITY, f64::min);
    (slope, residual, steady_phase && spread <= SETTLE_TOL)
}

#[derive(Clone, Debug, Serialize)]
pub struct AnnihilationReport {
    pub method: Method,
    /// Exact path: the composed polynomial is identically zero.
    pub identity_holds: bool,
    pub samples_used: usize,
    pub samples_skipped: usize,
    #[serde(serialize_with = "json::real")]
    pub max_residual: f64,
    #[serde(serialize_with = "json::real")]
    pub tolerance: f64,
}

/// `P(g(z), f(z)) = 0`: an exact polynomial identity on the exact path,
/// `max |P(g(z), f(z))| ≤ 1e-8·(1 + max|f(z)|^μ)` over `samples` otherwise.
pub fn verify_annihilation(p: &CharPoly, f: &Polynomial, g: &[Polynomial], samples: &[Vec<Complex64>]) -> Result<AnnihilationReport> {
    if let (Method::Exact, Some(q)) = (p.method, &p.eliminant) {
        let ctx = f.vars().clone();
        let nparams = p.w_vars.len() - g.len();
        let mut images: Vec<Polynomial> = g.to_vec();
        images.extend((ctx.len() - nparams..ctx.len()).map(|i| Polynomial::var(ctx.clone(), i)));
        images.push(f.clone());
        if images.len() != q.nvars() {
            return Err(Error::DimensionMismatch { expected: q.nvars(), got: images.len() });
        }
        let r = q.compose(&images);
        if let Some((m, c)) = r.terms().next_back() {
            let term = Polynomial::from_terms(ctx, [(m.clone(), c.clone())]);
            return Err(Error::IdentityFailed(format!("nonzero term {term} in P(g, f)")));
        }
        return Ok(AnnihilationReport {
            method: Method::Exact,
            identity_holds: true,
            samples_used: 0,
            samples_skipped: 0,
            max_residual: 0.0,
            tolerance: 0.0,
        });
    }
    let map = PolyMap::new(g.to_vec());
    let fv = crate::algebra::CompiledPoly::new(f);
    let (mut used, mut skipped, mut max_res, mut max_f) = (0, 0, 0.0f64, 0.0f64);
    for z in samples {
        let w = map.eval(z);
        let Some(a) = p.evaluate_coefficients(&w)? else {
            skipped += 1;
            continue;
        };
        let t = fv.eval(z);
        max_res = max_res.max(CharPoly::horner(&a, t).norm());
        max_f = max_f.max(t.norm());
        used += 1;
    }
    let tolerance = 1e-8 * (1.0 + max_f.powi(p.mu as i32));
    if max_res > tolerance {
        return Err(Error::IdentityFailed(format!("residual {max_res:.3e} exceeds {tolerance:.3e}")));
    }
    Ok(AnnihilationReport {
        method: Method::Numeric,
        identity_holds: false,
        samples_used: used,
        samples_skipped: skipped,
        max_residual: max_res,
        tolerance,
    })
}
