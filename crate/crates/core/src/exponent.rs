//! Gradient-inequality exponents `|f|^θ ≤ C‖∇f‖` from the characteristic
//! polynomial, plus empirical checks on shrinking shells.

use num_complex::Complex64;
use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::algebra::{norm, CompiledPoly, Order, PolyMap};
use crate::charpoly::{ord_of_coefficient, CharPoly, Method, OrderEstimate};
use crate::error::{Error, Result};
use crate::export::{csv_complex, csv_f64, json, Csv, LogLogPlot};
use crate::fibres::{random_direction, rng_for};
use crate::milnor::Germ;

fn ser_ratio<S: Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// `μ/(μ+1)`, the exponent shared by a μ-constant family.
pub fn uniform_exponent(mu: usize) -> Rational64 {
    Rational64::new(mu as i64, mu as i64 + 1)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentCertificate {
    #[serde(serialize_with = "ser_ratio")]
    pub theta: Rational64,
    /// Smallest `j` attaining the maximum of `j/ordⱼ`.
    pub argmax_j: usize,
    pub mu: usize,
    pub orders: Vec<OrderEstimate>,
    /// `ordⱼ ≥ j+1` for every `aⱼ ≢ 0`.
    pub bound_ok: bool,
    #[serde(serialize_with = "ser_ratio")]
    pub uniform_bound: Rational64,
    pub method: Method,
}

impl ExponentCertificate {
    pub fn theta_f64(&self) -> f64 {
        *self.theta.numer() as f64 / *self.theta.denom() as f64
    }
}

fn orders_of(p: &CharPoly) -> Result<Vec<OrderEstimate>> {
    p.coefficients().iter().map(ord_of_coefficient).collect()
}

/// `θ = max_{aⱼ ≢ 0} j / ord₀ aⱼ`, as an exact rational.
pub fn gradient_exponent(f: &Germ, p: &CharPoly) -> Result<ExponentCertificate> {
    if p.w_vars().len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: p.w_vars().len() });
    }
    let orders = orders_of(p)?;
    let mut best: Option<(Rational64, usize)> = None;
    let mut bound_ok = true;
    for o in &orders {
        let Order::Finite(ord) = o.value else { continue };
        if ord == 0 {
            return Err(Error::Internal(format!("a_{} does not vanish at the origin", o.j)));
        }
        bound_ok &= ord as usize > o.j;
        let r = Rational64::new(o.j as i64, ord as i64);
        if best.is_none_or(|(b, _)| r > b) {
            best = Some((r, o.j));
        }
    }
    let Some((theta, argmax_j)) = best else {
        return Err(Error::Internal("every coefficient vanishes identically".into()));
    };
    Ok(ExponentCertificate {
        theta,
        argmax_j,
        mu: p.mu(),
        orders,
        bound_ok,
        uniform_bound: uniform_exponent(p.mu()),
        method: p.method(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderBoundRow {
    pub j: usize,
    pub order: Order,
    pub required: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderBoundReport {
    pub ok: bool,
    pub rows: Vec<OrderBoundRow>,
    /// `in P = t^μ`, checked on the exact polynomial when available.
    pub initial_form_is_t_mu: Option<bool>,
}

/// `ordⱼ ≥ j+1` for all `aⱼ ≢ 0`; on the exact path also `in P = t^μ`,
/// which must agree.
pub fn check_order_bound(p: &CharPoly) -> Result<OrderBoundReport> {
    let orders = orders_of(p)?;
    let rows: Vec<OrderBoundRow> = orders
        .iter()
        .map(|o| OrderBoundRow {
            j: o.j,
            order: o.value,
            required: o.j + 1,
            ok: match o.value {
                Order::Finite(v) => v as usize > o.j,
                Order::Infinite => true,
            },
        })
        .collect();
    let ok = rows.iter().all(|r| r.ok);
    let initial_form_is_t_mu = match p.eliminant() {
        Some(q) if p.is_exact() => {
            // den(0) = 1 after normalization, so in(den·P) = in(P)
            let t = q.nvars() - 1;
            let tmu = crate::algebra::Polynomial::var(q.vars().clone(), t).pow(p.mu() as u32);
            Some(q.initial_form()? == tmu)
        }
        _ => None,
    };
    if let Some(b) = initial_form_is_t_mu {
        if b != ok {
            return Err(Error::Internal(format!("order table ({ok}) and initial form ({b}) disagree")));
        }
    }
    Ok(OrderBoundReport { ok, rows, initial_form_is_t_mu })
}

#[derive(Clone, Debug, Serialize)]
pub struct VietaReport {
    #[serde(serialize_with = "json::real")]
    pub max_ratio: f64,
    pub samples_used: usize,
    pub samples_skipped: usize,
    pub ok: bool,
}

pub const VIETA_TOL: f64 = 1e-9;

/// `|f(z)| / (2 max_j |aⱼ(∇f(z))|^{1/j})` over `samples`; at most `1`.
pub fn vieta_bound_check(f: &Germ, p: &CharPoly, samples: &[Vec<Complex64>]) -> Result<VietaReport> {
    let grad = PolyMap::new(f.gradient());
    let fv = CompiledPoly::new(f.f());
    let (mut max_ratio, mut used, mut skipped) = (0.0f64, 0, 0);
    for z in samples {
        if z.len() != f.dim() {
            return Err(Error::DimensionMismatch { expected: f.dim(), got: z.len() });
        }
        let Some(a) = p.evaluate_coefficients(&grad.eval(z))? else {
            skipped += 1;
            continue;
        };
        let fz = fv.eval(z).norm();
        let bound = 2.0 * a.iter().enumerate().map(|(k, c)| c.norm().powf(1.0 / (k + 1) as f64)).fold(0.0, f64::max);
        let ratio = if fz == 0.0 { 0.0 } else { fz / bound };
        max_ratio = max_ratio.max(ratio);
        used += 1;
    }
    Ok(VietaReport { max_ratio, samples_used: used, samples_skipped: skipped, ok: max_ratio <= 1.0 + VIETA_TOL })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellConfig {
    #[serde(serialize_with = "json::real")]
    pub start: f64,
    #[serde(serialize_with = "json::real")]
    pub ratio: f64,
    pub count: usize,
    pub points: usize,
    pub seed: u64,
}

impl Default for ShellConfig {
    fn default() -> Self {
        Self { start: 1e-1, ratio: 0.5, count: 8, points: 500, seed: 0 }
    }
}

impl ShellConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn radii(&self) -> Vec<f64> {
        crate::fibres::geometric_radii(self.start, self.ratio, self.count)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start > 0.0) || !(self.ratio > 0.0 && self.ratio < 1.0) || self.count < 3 || self.points == 0 {
            return Err(Error::InvalidInput("shells need start > 0, 0 < ratio < 1, at least 3 shells and 1 point".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Bounded,
    Divergent,
    Inconclusive,
}

/// Three-shell heuristic on the last three sups `a, b, c` (largest radius
/// first): bounded if within 15% of each other or non-increasing,
/// divergent if strictly increasing with `c ≥ 2a`.
pub fn three_shell_verdict(sups: &[f64]) -> Verdict {
    let n = sups.len();
    if n < 3 || sups[n - 3..].iter().any(|s| !s.is_finite()) {
        return Verdict::Inconclusive;
    }
    let (a, b, c) = (sups[n - 3], sups[n - 2], sups[n - 1]);
    let hi = a.max(b).max(c);
    let lo = a.min(b).min(c);
    if (lo > 0.0 && hi / lo <= 1.15) || (a >= b && b >= c) {
        Verdict::Bounded
    } else if a < b && b < c && c >= 2.0 * a {
        Verdict::Divergent
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShellReport {
    #[serde(serialize_with = "json::real")]
    pub theta: f64,
    #[serde(serialize_with = "json::reals")]
    pub radii: Vec<f64>,
    /// Per shell: `sup |f|^θ / ‖∇f‖`.
    #[serde(serialize_with = "json::reals")]
    pub sups: Vec<f64>,
    #[serde(serialize_with = "json::points")]
    pub argmax: Vec<Vec<Complex64>>,
    pub counts: Vec<usize>,
    #[serde(serialize_with = "json::reals")]
    pub max_abs_f: Vec<f64>,
    /// Every shell has `max |f| < 1`, where lowering θ strengthens the claim.
    pub f_below_one: bool,
    /// Max of the shell sups.
    #[serde(serialize_with = "json::real")]
    pub constant: f64,
    pub verdict: Verdict,
    /// `(ln ‖∇f‖, ln |f|)` per sample, for plotting.
    #[serde(skip)]
    pub scatter: Vec<(f64, f64)>,
}

impl ShellReport {
    pub fn to_csv(&self) -> String {
        let dim = self.argmax.first().map_or(0, Vec::len);
        let mut header = vec!["radius".to_string(), "sup_q".to_string()];
        for k in 0..dim {
            header.push(format!("re_z{}", k + 1));
            header.push(format!("im_z{}", k + 1));
        }
        let mut csv = Csv::new(&header);
        for ((r, s), z) in self.radii.iter().zip(&self.sups).zip(&self.argmax) {
            let mut row = vec![csv_f64(*r), csv_f64(*s)];
            for c in z {
                row.extend(csv_complex(*c));
            }
            csv.row(&row);
        }
        csv.finish()
    }

    /// `ln|f|` against `ln‖∇f‖` with the line `ln|f| = (ln C + ln‖∇f‖)/θ`.
    pub fn to_svg(&self, title: &str) -> String {
        let slope = 1.0 / self.theta;
        LogLogPlot {
            title: title.to_string(),
            x_label: "ln ‖∇f‖".into(),
            y_label: "ln |f|".into(),
            points: self.scatter.clone(),
            lines: vec![(slope, slope * self.constant.ln(), format!("slope 1/θ = {slope:.4}"))],
        }
        .to_svg()
    }
}

/// Samples `|f|^θ/‖∇f‖` on shells of shrinking radius around 0.
///
/// Each shell draws its points from its own RNG stream, so the report does
/// not depend on scheduling.
pub fn empirical_verify(f: &Germ, theta: f64, cfg: &ShellConfig) -> Result<ShellReport> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidInput(format!("exponent must lie in (0,1), got {theta}")));
    }
    cfg.validate()?;
    let grad = PolyMap::new(f.gradient());
    let fv = CompiledPoly::new(f.f());
    let dim = f.dim();
    let radii = cfg.radii();
    struct Shell {
        sup: f64,
        argmax: Vec<Complex64>,
        count: usize,
        max_f: f64,
        scatter: Vec<(f64, f64)>,
    }
    let shells: Vec<Shell> = radii
        .par_iter()
        .enumerate()
        .map(|(k, &r)| {
            let mut rng = rng_for(cfg.seed, 0x5E11_0000 + k as u64);
            let mut sh = Shell { sup: 0.0, argmax: vec![Complex64::new(0.0, 0.0); dim], count: 0, max_f: 0.0, scatter: Vec::new() };
            for _ in 0..cfg.points {
                let z: Vec<Complex64> = random_direction(&mut rng, dim).iter().map(|c| c * r).collect();
                let fz = fv.eval(&z).norm();
                let gz = norm(&grad.eval(&z));
                sh.max_f = sh.max_f.max(fz);
                if gz <= 1e-300 {
                    continue;
                }
                let q = fz.powf(theta) / gz;
                if q > sh.sup {
                    sh.sup = q;
                    sh.argmax = z;
                }
                sh.count += 1;
                if fz > 0.0 {
                    sh.scatter.push((gz.ln(), fz.ln()));
                }
            }
            sh
        })
        .collect();
    let sups: Vec<f64> = shells.iter().map(|s| s.sup).collect();
    let f_below_one = shells.iter().all(|s| s.max_f < 1.0);
    let verdict = if f_below_one { three_shell_verdict(&sups) } else { Verdict::Inconclusive };
    Ok(ShellReport {
        theta,
        constant: sups.iter().copied().fold(0.0, f64::max),
        radii,
        argmax: shells.iter().map(|s| s.argmax.clone()).collect(),
        counts: shells.iter().map(|s| s.count).collect(),
        max_abs_f: shells.iter().map(|s| s.max_f).collect(),
        scatter: shells.into_iter().flat_map(|s| s.scatter).collect(),
        sups,
        f_below_one,
        verdict,
    })
}

pub fn ratio_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
