//! Unfoldings `f(x,t)` with `f(0,t) ≡ 0`: μ-constancy, semicontinuity, the
//! family characteristic polynomial and the uniform exponent `μ/(μ+1)`.

use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::algebra::{norm, parse_poly, validate_vars, vars, Binding, GaussRat, PolyMap, Polynomial, Vars};
use crate::basis::{local_standard_basis_capped, normal_form, DEFAULT_DEGREE_CAP};
use crate::charpoly::{
    charpoly_exact, charpoly_numeric, default_radii, default_rays, exact_general, fresh_name, map_multiplicity, w_names, CharPoly,
    CoefficientData,
};
use crate::error::{Error, Result};
use crate::exponent::{empirical_verify, ratio_to_f64, three_shell_verdict, uniform_exponent, ShellConfig, ShellReport, Verdict};
use crate::export::json;
use crate::fibres::{geometric_radii, random_direction, rng_for, solve_fibre, track_ray, FibreConfig};
use crate::milnor::Germ;

fn ser_ratio<S: Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// An exact parameter value `t₀ ∈ ℚ(i)ᵏ`.
pub type GridPoint = Vec<GaussRat>;

fn show_point(t: &[GaussRat]) -> Vec<String> {
    t.iter().map(ToString::to_string).collect()
}

/// Parses an exact complex number given as `[re, im]` rational strings.
pub fn parse_complex_pair(re: &str, im: &str) -> Result<GaussRat> {
    let p = |s: &str| GaussRat::parse_rational(s.trim()).ok_or_else(|| Error::InvalidInput(format!("not an exact rational: '{s}'")));
    Ok(GaussRat::new(p(re)?, p(im)?))
}

/// The `k`-fold product of `{0, ±1/8, ±1/4, i/8}`, smallest norms first,
/// at most 25 points.
pub fn default_grid(k: usize) -> Vec<GridPoint> {
    let base = [
        GaussRat::from_int(0),
        GaussRat::from_frac(1, 8),
        GaussRat::from_frac(-1, 8),
        GaussRat::from_frac(1, 4),
        GaussRat::from_frac(-1, 4),
        &GaussRat::i() * &GaussRat::from_frac(1, 8),
    ];
    let mut grid: Vec<GridPoint> = vec![Vec::new()];
    for _ in 0..k {
        grid = grid.into_iter().flat_map(|p| base.iter().map(move |b| [p.clone(), vec![b.clone()]].concat())).collect();
    }
    let norm2 = |p: &GridPoint| p.iter().map(GaussRat::norm_sqr).fold(num_rational::BigRational::zero(), |a, b| a + b);
    grid.sort_by_key(norm2);
    grid.truncate(25);
    grid
}

#[derive(Clone, Debug)]
pub struct Unfolding {
    f: Polynomial,
    m: usize,
    mu0: usize,
    degree_cap: u32,
}

impl Unfolding {
    /// `f` lives in `(x₁…x_m, t₁…t_k)`. Rejects `f(0,t) ≢ 0` and a special
    /// fibre `f₀` without an isolated singularity.
    pub fn new(f: Polynomial, m: usize) -> Result<Self> {
        Self::with_cap(f, m, DEFAULT_DEGREE_CAP)
    }

    pub fn with_cap(f: Polynomial, m: usize, degree_cap: u32) -> Result<Self> {
        if m == 0 || m > f.nvars() {
            return Err(Error::InvalidInput(format!("need 1 ≤ m ≤ {}, got m = {m}", f.nvars())));
        }
        let zero_x: Vec<(&str, Binding)> = f.vars()[..m].iter().map(|v| (v.as_str(), Binding::Scalar(GaussRat::zero()))).collect();
        let on_axis = f.substitute(&zero_x)?;
        if !on_axis.is_zero() {
            return Err(Error::InvalidInput(format!("the unfolding must satisfy f(0,t) ≡ 0, but f(0,t) = {on_axis}")));
        }
        let mut u = Self { f, m, mu0: 0, degree_cap };
        u.mu0 = u.slice(&vec![GaussRat::zero(); u.k()])?.milnor_number()?;
        Ok(u)
    }

    pub fn parse<S: AsRef<str>>(text: &str, x_vars: &[S], t_vars: &[S]) -> Result<Self> {
        let mut names: Vec<&str> = x_vars.iter().map(AsRef::as_ref).collect();
        names.extend(t_vars.iter().map(AsRef::as_ref));
        let ctx = vars(&names);
        validate_vars(&ctx)?;
        Self::new(parse_poly(text, &ctx)?, x_vars.len())
    }

    pub fn f(&self) -> &Polynomial {
        &self.f
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.f.nvars() - self.m
    }

    pub fn mu0(&self) -> usize {
        self.mu0
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    pub fn x_vars(&self) -> &[String] {
        &self.f.vars()[..self.m]
    }

    pub fn t_vars(&self) -> &[String] {
        &self.f.vars()[self.m..]
    }

    /// `g = ∇ₓf` in all `m+k` variables.
    pub fn x_gradient(&self) -> Vec<Polynomial> {
        self.f.gradient(&(0..self.m).collect::<Vec<_>>())
    }

    /// `G(x,t) = (∇ₓf, t)`.
    pub fn build_g(&self) -> Vec<Polynomial> {
        let mut g = self.x_gradient();
        g.extend((self.m..self.f.nvars()).map(|i| Polynomial::var(self.f.vars().clone(), i)));
        g
    }

    /// Multiplicity of `G` at 0, which must equal `μ₀`.
    pub fn mu_of_g(&self) -> Result<usize> {
        let d = map_multiplicity(&self.build_g(), self.degree_cap)?;
        if d != self.mu0 {
            return Err(Error::Mismatch { expected: self.mu0, got: d });
        }
        Ok(d)
    }

    /// `f_{t₀}` as a germ in `x`.
    pub fn slice(&self, t0: &[GaussRat]) -> Result<Germ> {
        if t0.len() != self.k() {
            return Err(Error::DimensionMismatch { expected: self.k(), got: t0.len() });
        }
        let b: Vec<(&str, Binding)> = self.t_vars().iter().zip(t0).map(|(v, c)| (v.as_str(), Binding::Scalar(c.clone()))).collect();
        Ok(Germ::new(self.f.substitute(&b)?)?.with_degree_cap(self.degree_cap))
    }

    /// The whole family as one germ in `(x,t)`.
    pub fn joint_germ(&self) -> Result<Germ> {
        Ok(Germ::new(self.f.clone())?.with_degree_cap(self.degree_cap))
    }
}

/// `μ` of one slice; a non-isolated slice is data, not an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceMu {
    Finite(usize),
    NotIsolated,
}

impl Serialize for SliceMu {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SliceMu::Finite(n) => s.serialize_u64(*n as u64),
            SliceMu::NotIsolated => s.serialize_str("NOT_ISOLATED"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConstancyVerdict {
    ConstantOnGrid,
    NonConstant,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridRow {
    pub t: Vec<String>,
    pub mu: SliceMu,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridReport {
    pub mu0: usize,
    pub rows: Vec<GridRow>,
    pub verdict: ConstancyVerdict,
}

fn slice_mu(u: &Unfolding, t: &[GaussRat]) -> Result<SliceMu> {
    match u.slice(t)?.milnor_number() {
        Ok(n) => Ok(SliceMu::Finite(n)),
        Err(Error::NotIsolated) => Ok(SliceMu::NotIsolated),
        Err(e) => Err(e),
    }
}

/// `μ_{t₀}` at every grid point; evidence for constancy, not a proof.
pub fn mu_constancy_grid(u: &Unfolding, grid: &[GridPoint]) -> Result<GridReport> {
    let mus: Vec<SliceMu> = grid.par_iter().map(|t| slice_mu(u, t)).collect::<Result<_>>()?;
    let verdict = if mus.contains(&SliceMu::NotIsolated) {
        ConstancyVerdict::Error
    } else if mus.iter().all(|m| *m == SliceMu::Finite(u.mu0)) {
        ConstancyVerdict::ConstantOnGrid
    } else {
        ConstancyVerdict::NonConstant
    };
    let rows = grid.iter().zip(mus).map(|(t, mu)| GridRow { t: show_point(t), mu }).collect();
    Ok(GridReport { mu0: u.mu0, rows, verdict })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SymbolicVerdict {
    Proved,
    Refuted,
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymbolicReport {
    pub verdict: SymbolicVerdict,
    pub power_cap: u32,
    /// Per `xᵢ`: least `n ≤ N` with `xᵢⁿ` in the local Jacobian ideal.
    pub powers: Vec<Option<u32>>,
    /// `∂f/∂xⱼ(0,t)` for each `j` (all zero unless refuted).
    pub on_axis: Vec<String>,
}

/// Default power cap `μ₀ + 2`.
pub fn default_power_cap(u: &Unfolding) -> u32 {
    u.mu0 as u32 + 2
}

/// Certifies that the `x`-critical germ of `f` is exactly `{0} × ℂᵏ`:
/// `∂f/∂x(0,t) ≡ 0`, and every `xᵢ` has a power in `⟨∂f/∂x⟩𝒪_{m+k}`.
pub fn mu_constancy_symbolic(u: &Unfolding, cap: u32) -> Result<SymbolicReport> {
    let grad = u.x_gradient();
    let zero_x: Vec<(&str, Binding)> = u.x_vars().iter().map(|v| (v.as_str(), Binding::Scalar(GaussRat::zero()))).collect();
    let on_axis: Vec<Polynomial> = grad.iter().map(|g| g.substitute(&zero_x)).collect::<Result<_>>()?;
    let shown = on_axis.iter().map(ToString::to_string).collect();
    if on_axis.iter().any(|p| !p.is_zero()) {
        return Ok(SymbolicReport { verdict: SymbolicVerdict::Refuted, power_cap: cap, powers: vec![None; u.m], on_axis: shown });
    }
    let basis = local_standard_basis_capped(&grad, u.degree_cap)?;
    let mut powers = Vec::with_capacity(u.m);
    for i in 0..u.m {
        let x = Polynomial::var(u.f.vars().clone(), i);
        let mut found = None;
        for n in 1..=cap {
            if normal_form(&x.pow(n), &basis)?.is_zero() {
                found = Some(n);
                break;
            }
        }
        powers.push(found);
    }
    let verdict = if powers.iter().all(Option::is_some) { SymbolicVerdict::Proved } else { SymbolicVerdict::Undecided };
    Ok(SymbolicReport { verdict, power_cap: cap, powers, on_axis: shown })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyMethod {
    Exact,
    Numeric,
    /// Exact, falling back to numeric on a global/local mismatch.
    Auto,
}

fn y_and_s_names(u: &Unfolding) -> (Vec<String>, String) {
    let taken = u.f.vars().to_vec();
    let y = w_names("y", u.m, &taken);
    let mut all = taken;
    all.extend(y.iter().cloned());
    (y, fresh_name("s", &all))
}

/// Checks the constancy precondition: symbolic PROVED, else the default grid.
pub fn constancy_established(u: &Unfolding) -> Result<bool> {
    if mu_constancy_symbolic(u, default_power_cap(u))?.verdict == SymbolicVerdict::Proved {
        return Ok(true);
    }
    Ok(mu_constancy_grid(u, &default_grid(u.k()))?.verdict == ConstancyVerdict::ConstantOnGrid)
}

/// `P(y, t, s)`: the characteristic polynomial of `f` with respect to
/// `G = (∇ₓf, t)`, coefficients in `(y, t)`.
pub fn family_charpoly(u: &Unfolding, method: FamilyMethod, cfg: &FibreConfig) -> Result<CharPoly> {
    if !constancy_established(u)? {
        return Err(Error::Precondition("μ-constancy is neither proved nor observed on the default grid".into()));
    }
    let (y, s) = y_and_s_names(u);
    let exact = || exact_general(&u.f, &u.x_gradient(), u.mu0, &y, &s, u.degree_cap);
    let numeric = || -> Result<CharPoly> {
        let joint = u.joint_germ()?;
        let g = u.build_g();
        let mut p = charpoly_numeric(&joint, &g, &default_rays(g.len(), cfg.seed), &default_radii(), cfg)?;
        let mut names = y.clone();
        names.extend(u.t_vars().iter().cloned());
        p.rename_numeric(Arc::new(names), s.clone());
        Ok(p)
    };
    match method {
        FamilyMethod::Exact => exact(),
        FamilyMethod::Numeric => numeric(),
        FamilyMethod::Auto => match exact() {
            Err(Error::GlobalLocalMismatch(_)) => numeric(),
            other => other,
        },
    }
}

/// `aⱼ(0,t) ≡ 0` for every exact coefficient.
pub fn coefficients_vanish_on_axis(p: &CharPoly, y_dim: usize) -> Result<Option<bool>> {
    if !p.is_exact() {
        return Ok(None);
    }
    let names: Vec<String> = p.w_vars()[..y_dim].to_vec();
    for c in p.coefficients() {
        let CoefficientData::Exact(e) = &c.data else { return Ok(None) };
        let b: Vec<(&str, Binding)> = names.iter().map(|v| (v.as_str(), Binding::Scalar(GaussRat::zero()))).collect();
        if !e.num.substitute(&b)?.is_zero() {
            return Ok(Some(false));
        }
    }
    Ok(Some(true))
}

#[derive(Clone, Debug, Serialize)]
pub struct SpecializationRow {
    pub t: Vec<String>,
    /// `None` when the slice has no exact characteristic polynomial.
    pub equal: Option<bool>,
}

/// `P(y, t₀, s)` against the slice polynomial of `f_{t₀}` w.r.t. `∇f_{t₀}`,
/// compared coefficientwise after clearing denominators.
pub fn specialization_check(u: &Unfolding, p: &CharPoly, t0: &[GaussRat]) -> Result<SpecializationRow> {
    let row = |equal| SpecializationRow { t: show_point(t0), equal };
    if !p.is_exact() {
        return Ok(row(None));
    }
    let germ = u.slice(t0)?;
    let slice = match charpoly_exact(&germ, &germ.gradient()) {
        Ok(q) => q,
        Err(Error::GlobalLocalMismatch(_)) => return Ok(row(None)),
        Err(e) => return Err(e),
    };
    if slice.mu() != p.mu() {
        return Ok(row(Some(false)));
    }
    let t_bind: Vec<(&str, Binding)> = u.t_vars().iter().zip(t0).map(|(v, c)| (v.as_str(), Binding::Scalar(c.clone()))).collect();
    // family coefficients live in (y…, t…); the slice in (w…)
    let y_ctx: Vars = Arc::new(p.w_vars()[..u.m].to_vec());
    for (a, b) in p.coefficients().iter().zip(slice.coefficients()) {
        let (CoefficientData::Exact(fa), CoefficientData::Exact(sb)) = (&a.data, &b.data) else { return Ok(row(None)) };
        let num = fa.num.substitute(&t_bind)?.with_vars(&y_ctx)?;
        let den = fa.den.substitute(&t_bind)?.with_vars(&y_ctx)?;
        let rename = |q: &Polynomial| Polynomial::from_terms(y_ctx.clone(), q.terms().map(|(m, c)| (m.clone(), c.clone())));
        let (snum, sden) = (rename(&sb.num), rename(&sb.den));
        if &num * &sden != &snum * &den {
            return Ok(row(Some(false)));
        }
    }
    Ok(row(Some(true)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HartogsConfig {
    pub shells: ShellConfig,
    /// Parameters are drawn from the polydisc of this radius.
    #[serde(serialize_with = "json::real")]
    pub t_radius: f64,
    /// Denominator exponent `j + power_offset` (`1` is the proven bound).
    pub power_offset: u32,
}

impl Default for HartogsConfig {
    fn default() -> Self {
        Self { shells: ShellConfig { points: 100, ..ShellConfig::default() }, t_radius: 0.125, power_offset: 1 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HartogsRow {
    pub j: usize,
    #[serde(serialize_with = "json::reals")]
    pub sups: Vec<f64>,
    #[serde(serialize_with = "json::real")]
    pub constant: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct HartogsReport {
    pub power_offset: u32,
    #[serde(serialize_with = "json::reals")]
    pub radii: Vec<f64>,
    pub rows: Vec<HartogsRow>,
    pub samples_skipped: usize,
    pub growth_detected: bool,
}

/// `sup |aⱼ(y,t)| / ‖y‖^{j+offset}` on shells in `y` with random small `t`.
pub fn hartogs_bound_check(p: &CharPoly, y_dim: usize, cfg: &HartogsConfig) -> Result<HartogsReport> {
    cfg.shells.validate()?;
    let k = p.w_vars().len().checked_sub(y_dim).ok_or(Error::DimensionMismatch { expected: p.w_vars().len(), got: y_dim })?;
    let radii = cfg.shells.radii();
    let per_shell: Vec<(Vec<f64>, usize)> = radii
        .par_iter()
        .enumerate()
        .map(|(si, &r)| -> Result<(Vec<f64>, usize)> {
            let mut rng = rng_for(cfg.shells.seed, 0x4A27_0000 + si as u64);
            let mut sups = vec![0.0f64; p.mu()];
            let mut skipped = 0;
            for _ in 0..cfg.shells.points {
                let mut w: Vec<Complex64> = random_direction(&mut rng, y_dim).iter().map(|c| c * r).collect();
                if k > 0 {
                    let dir = random_direction(&mut rng, k);
                    let scale = cfg.t_radius * rand::Rng::random::<f64>(&mut rng);
                    w.extend(dir.iter().map(|c| c * scale));
                }
                let Some(a) = p.evaluate_coefficients(&w)? else {
                    skipped += 1;
                    continue;
                };
                let yn = norm(&w[..y_dim]);
                for (j, aj) in a.iter().enumerate() {
                    let q = aj.norm() / yn.powi((j + 1) as i32 + cfg.power_offset as i32);
                    sups[j] = sups[j].max(q);
                }
            }
            Ok((sups, skipped))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<HartogsRow> = (0..p.mu())
        .map(|j| {
            let sups: Vec<f64> = per_shell.iter().map(|(s, _)| s[j]).collect();
            HartogsRow { j: j + 1, constant: sups.iter().copied().fold(0.0, f64::max), verdict: three_shell_verdict(&sups), sups }
        })
        .collect();
    Ok(HartogsReport {
        power_offset: cfg.power_offset,
        radii,
        growth_detected: rows.iter().any(|r| r.verdict == Verdict::Divergent),
        samples_skipped: per_shell.iter().map(|(_, s)| s).sum(),
        rows,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceShell {
    pub t: Vec<String>,
    pub report: ShellReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniformReport {
    #[serde(serialize_with = "ser_ratio")]
    pub theta: Rational64,
    pub slices: Vec<SliceShell>,
    /// Max over the grid of the per-slice constants.
    #[serde(serialize_with = "json::real")]
    pub shared_constant: f64,
    /// The shared constant is not driven by the innermost shell (within 15%).
    pub shared_constant_ok: bool,
    pub joint: ShellReport,
    pub pass: bool,
}

/// `|f_t|^{μ/(μ+1)} ≤ C‖∇f_t‖` on every grid slice with one `C`, and the
/// joint inequality in `(x,t)`. Requires μ constant on the grid.
pub fn uniform_exponent_verify(u: &Unfolding, grid: &[GridPoint], shells: &ShellConfig) -> Result<UniformReport> {
    let g = mu_constancy_grid(u, grid)?;
    if g.verdict != ConstancyVerdict::ConstantOnGrid {
        return Err(Error::Precondition("μ is not constant on the grid; use the semicontinuity check instead".into()));
    }
    let theta = uniform_exponent(u.mu0);
    let th = ratio_to_f64(theta);
    let slices: Vec<SliceShell> = grid
        .par_iter()
        .map(|t| Ok(SliceShell { t: show_point(t), report: empirical_verify(&u.slice(t)?, th, shells)? }))
        .collect::<Result<_>>()?;
    let shared_constant = slices.iter().map(|s| s.report.constant).fold(0.0, f64::max);
    let outer = slices
        .iter()
        .map(|s| s.report.sups[..s.report.sups.len() - 1].iter().copied().fold(0.0, f64::max))
        .fold(0.0, f64::max);
    let shared_constant_ok = shared_constant <= 1.15 * outer;
    let joint = empirical_verify(&u.joint_germ()?, th, shells)?;
    let pass = shared_constant_ok
        && joint.verdict == Verdict::Bounded
        && slices.iter().all(|s| s.report.verdict == Verdict::Bounded && s.report.f_below_one);
    Ok(UniformReport { theta, slices, shared_constant, shared_constant_ok, joint, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct SemicontinuityRow {
    pub t: Vec<String>,
    pub mu: SliceMu,
    pub ok: bool,
    /// Shell check of `|f_t|^{μ₀/(μ₀+1)} ≤ C_t‖∇f_t‖` (isolated slices).
    pub verdict: Option<Verdict>,
    #[serde(serialize_with = "json::opt_real")]
    pub constant: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SemicontinuityReport {
    pub mu0: usize,
    #[serde(serialize_with = "ser_ratio")]
    pub theta: Rational64,
    pub rows: Vec<SemicontinuityRow>,
    /// `μ_t ≤ μ₀` everywhere; a violation is a hard failure.
    pub pass: bool,
    pub exponent_ok: bool,
}

pub fn semicontinuity_check(u: &Unfolding, grid: &[GridPoint], shells: &ShellConfig) -> Result<SemicontinuityReport> {
    let theta = uniform_exponent(u.mu0);
    let th = ratio_to_f64(theta);
    let rows: Vec<SemicontinuityRow> = grid
        .par_iter()
        .map(|t| -> Result<SemicontinuityRow> {
            let mu = slice_mu(u, t)?;
            let ok = matches!(mu, SliceMu::Finite(n) if n <= u.mu0);
            let (verdict, constant) = match mu {
                SliceMu::Finite(n) if n > 0 => {
                    let r = empirical_verify(&u.slice(t)?, th, shells)?;
                    (Some(r.verdict), Some(r.constant))
                }
                _ => (None, None),
            };
            Ok(SemicontinuityRow { t: show_point(t), mu, ok, verdict, constant })
        })
        .collect::<Result<_>>()?;
    let pass = rows.iter().all(|r| r.ok);
    let exponent_ok = rows.iter().all(|r| r.verdict.is_none_or(|v| v == Verdict::Bounded));
    Ok(SemicontinuityReport { mu0: u.mu0, theta, rows, pass, exponent_ok })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StollConfig {
    pub samples: usize,
    /// Modulus of the sampled `w`.
    #[serde(serialize_with = "json::real")]
    pub w_radius: f64,
    pub ray_radii: usize,
    pub fibre: FibreConfig,
}

impl Default for StollConfig {
    fn default() -> Self {
        Self { samples: 50, w_radius: 1e-3, ray_radii: 8, fibre: FibreConfig { radius: 0.16, ..FibreConfig::default() } }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StollReport {
    pub t: Vec<String>,
    pub mu0: usize,
    pub mu_t: usize,
    pub samples: usize,
    /// Fibres with exactly `μ₀` points in the polydisc.
    pub full_fibres: usize,
    /// Fibres with more than `μ₀` points (never expected).
    pub overfull_fibres: usize,
    /// Rays along which exactly `μ_t` points end within `ρ/4` of the origin.
    pub converging_ok: usize,
    #[serde(serialize_with = "json::real")]
    pub fraction: f64,
    pub pass: bool,
}

/// Sheet count of `g_t = ∇f_t`: over generic small `w` the fibre still has
/// `μ₀` points, while only `μ_t` of them tend to 0 as `w → 0`.
pub fn stoll_check(u: &Unfolding, t0: &[GaussRat], cfg: &StollConfig) -> Result<StollReport> {
    cfg.fibre.validate()?;
    let germ = u.slice(t0)?;
    let mu_t = germ.milnor_number()?;
    let map = PolyMap::new(germ.gradient());
    let radii = geometric_radii(cfg.w_radius, 0.5, cfg.ray_radii);
    let inner = cfg.fibre.radius / 4.0;
    let outcomes: Vec<(usize, bool)> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(cfg.fibre.seed, 0x5701_0000 + i as u64);
            let dir = random_direction(&mut rng, u.m);
            let fib = solve_fibre(&map, &dir.iter().map(|c| c * cfg.w_radius).collect::<Vec<_>>(), u.mu0, &cfg.fibre, i as u64);
            let ray = track_ray(&map, &dir, &radii, u.mu0, &cfg.fibre, 0x7000_0000 + i as u64);
            let last = ray.last().expect("at least one radius");
            let near = last.points.iter().filter(|p| norm(p) < inner).count();
            (fib.len(), last.complete && near == mu_t)
        })
        .collect();
    let full = outcomes.iter().filter(|(n, _)| *n == u.mu0).count();
    let overfull = outcomes.iter().filter(|(n, _)| *n > u.mu0).count();
    let conv = outcomes.iter().filter(|(n, c)| *n == u.mu0 && *c).count();
    let fraction = conv as f64 / cfg.samples.max(1) as f64;
    Ok(StollReport {
        t: show_point(t0),
        mu0: u.mu0,
        mu_t,
        samples: cfg.samples,
        full_fibres: full,
        overfull_fibres: overfull,
        converging_ok: conv,
        fraction,
        pass: overfull == 0 && fraction >= 0.95,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyConfig {
    pub shells: ShellConfig,
    pub fibre: FibreConfig,
    pub stoll: StollConfig,
    pub hartogs: HartogsConfig,
    pub power_cap: Option<u32>,
    pub method: FamilyMethod,
}

impl FamilyConfig {
    pub fn with_seed(seed: u64) -> Self {
        let fibre = FibreConfig::with_seed(seed);
        Self {
            shells: ShellConfig::with_seed(seed),
            stoll: StollConfig { fibre: FibreConfig { radius: 0.16, ..fibre.clone() }, ..StollConfig::default() },
            hartogs: HartogsConfig { shells: ShellConfig { points: 100, ..ShellConfig::with_seed(seed) }, ..HartogsConfig::default() },
            fibre,
            power_cap: None,
            method: FamilyMethod::Auto,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyCharPolyReport {
    pub method: crate::charpoly::Method,
    pub p: Option<String>,
    pub vanishes_on_axis: Option<bool>,
    pub specialization: Vec<SpecializationRow>,
    pub hartogs: HartogsReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub f: String,
    pub x_vars: Vec<String>,
    pub t_vars: Vec<String>,
    pub mu0: usize,
    pub mu_of_g: usize,
    pub grid: GridReport,
    pub symbolic: SymbolicReport,
    /// `PROVED` (symbolic certificate) or `GRID` (evidence only).
    pub constancy_basis: Option<&'static str>,
    #[serde(serialize_with = "ser_ratio")]
    pub uniform_exponent: Rational64,
    pub uniform: Option<UniformReport>,
    pub charpoly: Option<FamilyCharPolyReport>,
    pub semicontinuity: SemicontinuityReport,
    pub stoll: Vec<StollReport>,
    pub hard_failures: Vec<String>,
    pub warnings: Vec<String>,
}

/// Every family check on one grid.
pub fn analyze_family(u: &Unfolding, grid: &[GridPoint], cfg: &FamilyConfig) -> Result<FamilyReport> {
    let mut warnings = Vec::new();
    let mut hard = Vec::new();
    let mu_of_g = u.mu_of_g()?;
    let grid_report = mu_constancy_grid(u, grid)?;
    let symbolic = mu_constancy_symbolic(u, cfg.power_cap.unwrap_or_else(|| default_power_cap(u)))?;
    let constancy_basis = if symbolic.verdict == SymbolicVerdict::Proved {
        Some("PROVED")
    } else if grid_report.verdict == ConstancyVerdict::ConstantOnGrid {
        warnings.push("μ-constancy observed on the grid only; not a germ-level proof".into());
        Some("GRID")
    } else {
        None
    };
    if symbolic.verdict == SymbolicVerdict::Proved && grid_report.verdict != ConstancyVerdict::ConstantOnGrid {
        hard.push("symbolic certificate contradicts the grid μ-table".into());
    }

    let uniform = if grid_report.verdict == ConstancyVerdict::ConstantOnGrid {
        let r = uniform_exponent_verify(u, grid, &cfg.shells)?;
        if r.slices.iter().any(|s| s.report.verdict == Verdict::Divergent) || r.joint.verdict == Verdict::Divergent {
            hard.push("uniform exponent: divergent shell trend".into());
        } else if !r.pass {
            warnings.push("uniform exponent: shell checks inconclusive".into());
        }
        Some(r)
    } else {
        None
    };

    let charpoly = if constancy_basis.is_some() {
        match family_charpoly(u, cfg.method, &cfg.fibre) {
            Ok(p) => {
                let specialization = if p.is_exact() {
                    grid.iter().map(|t| specialization_check(u, &p, t)).collect::<Result<Vec<_>>>()?
                } else {
                    Vec::new()
                };
                if specialization.iter().any(|r| r.equal == Some(false)) {
                    hard.push("family polynomial does not specialize to a slice polynomial".into());
                }
                let vanishes_on_axis = coefficients_vanish_on_axis(&p, u.m)?;
                if vanishes_on_axis == Some(false) {
                    hard.push("a_j(0,t) is not identically zero".into());
                }
                let hartogs = hartogs_bound_check(&p, u.m, &cfg.hartogs)?;
                if hartogs.growth_detected {
                    hard.push("coefficient bound |a_j| ≤ C‖y‖^(j+1) shows growth".into());
                }
                Some(FamilyCharPolyReport { method: p.method(), p: p.display_exact(), vanishes_on_axis, specialization, hartogs })
            }
            Err(e @ (Error::DegreeCap { .. } | Error::GlobalLocalMismatch(_) | Error::TooFewSamples(_))) => {
                warnings.push(format!("family characteristic polynomial skipped: {e}"));
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    let semicontinuity = semicontinuity_check(u, grid, &cfg.shells)?;
    if !semicontinuity.pass {
        hard.push("semicontinuity μ_t ≤ μ₀ violated".into());
    }
    if !semicontinuity.exponent_ok {
        warnings.push("per-slice exponent check not bounded on every slice".into());
    }

    let mut stoll = Vec::new();
    for (t, row) in grid.iter().zip(&grid_report.rows) {
        if matches!(row.mu, SliceMu::Finite(n) if n < u.mu0 && n > 0) {
            let r = stoll_check(u, t, &cfg.stoll)?;
            if !r.pass {
                warnings.push(format!("sheet-count check below 95% at t = {:?}", r.t));
            }
            stoll.push(r);
        }
    }

    Ok(FamilyReport {
        f: u.f.to_string(),
        x_vars: u.x_vars().to_vec(),
        t_vars: u.t_vars().to_vec(),
        mu0: u.mu0,
        mu_of_g,
        grid: grid_report,
        symbolic,
        constancy_basis,
        uniform_exponent: uniform_exponent(u.mu0),
        uniform,
        charpoly,
        semicontinuity,
        stoll,
        hard_failures: hard,
        warnings,
    })
}
