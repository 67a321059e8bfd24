//! Numerical fibres `g⁻¹(w)` of a finite polynomial map inside a polydisc:
//! damped Newton, multistart, continuation along rays, deduplication.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::algebra::{dist, max_norm, norm, PolyMap};
use crate::error::{Error, Result};
use crate::export::{csv_complex, csv_f64, json, Csv};

const NEWTON_MAX_ITER: usize = 50;
const POLISH_STEPS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FibreConfig {
    /// Polydisc radius ρ (max-modulus gauge).
    #[serde(serialize_with = "json::real")]
    pub radius: f64,
    /// Newton residual tolerance τ on `‖g(z) − w‖`.
    #[serde(serialize_with = "json::real")]
    pub newton_tol: f64,
    /// Points closer than δ are the same point.
    #[serde(serialize_with = "json::real")]
    pub dedupe_radius: f64,
    /// Multistart count; `None` means `200·μ`.
    pub max_starts: Option<usize>,
    pub seed: u64,
    /// How often ρ may be halved when the fibre holds too many points.
    pub max_halvings: u32,
}

impl Default for FibreConfig {
    fn default() -> Self {
        Self { radius: 0.5, newton_tol: 1e-12, dedupe_radius: 1e-8, max_starts: None, seed: 0, max_halvings: 4 }
    }
}

impl FibreConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::InvalidInput("polydisc radius must be positive".into()));
        }
        if !(self.dedupe_radius > self.newton_tol) {
            return Err(Error::InvalidInput("dedupe radius must exceed the Newton tolerance".into()));
        }
        Ok(())
    }

    pub fn starts_for(&self, mu: usize) -> usize {
        self.max_starts.unwrap_or(200 * mu.max(1))
    }
}

/// One computed fibre over `w`.
#[derive(Clone, Debug, Serialize)]
pub struct Fibre {
    #[serde(serialize_with = "json::complexes")]
    pub w: Vec<Complex64>,
    #[serde(serialize_with = "json::points")]
    pub points: Vec<Vec<Complex64>>,
    /// Exactly `mu_target` distinct points were found.
    pub complete: bool,
    #[serde(serialize_with = "json::real")]
    pub max_residual: f64,
    /// Polydisc radius actually used (after any halving).
    #[serde(serialize_with = "json::real")]
    pub radius: f64,
    /// Two points closer than `10·δ`: `w` is close to the critical locus.
    pub near_critical: bool,
    /// Continuation lost a path and the fibre was refreshed by multistart.
    pub path_lost: bool,
}

impl Fibre {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// SplitMix64 finalizer, used to derive per-call RNG streams.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed, stream))
}

fn residual(g: &PolyMap, w: &[Complex64], z: &[Complex64]) -> f64 {
    let v = g.eval(z);
    v.iter().zip(w).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

fn newton_step(g: &PolyMap, w: &[Complex64], z: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = z.len();
    let jac = g.jacobian(z);
    let r: Vec<Complex64> = g.eval(z).iter().zip(w).map(|(a, b)| b - a).collect();
    let mat = DMatrix::from_fn(n, n, |i, j| jac[i][j]);
    let rhs = DVector::from_vec(r);
    let lu = mat.lu();
    if !lu.is_invertible() {
        return None;
    }
    let step = lu.solve(&rhs)?;
    if step.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return None;
    }
    Some(step.iter().copied().collect())
}

/// Damped Newton for `g(z) = w` from `z0`. `None` on a singular Jacobian,
/// divergence, no convergence within 50 iterations, or when the converged
/// point is ill-conditioned (next Newton step above `δ/10`, as happens at a
/// multiple root over a critical value).
pub fn newton_refine(g: &PolyMap, w: &[Complex64], z0: &[Complex64], cfg: &FibreConfig) -> Option<Vec<Complex64>> {
    assert!(g.is_square(), "newton_refine needs a square map");
    let mut z = z0.to_vec();
    let mut res = residual(g, w, &z);
    for _ in 0..NEWTON_MAX_ITER {
        if res <= cfg.newton_tol {
            return polish(g, w, z, res, cfg);
        }
        let step = newton_step(g, w, &z)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= 1.0 / 64.0 {
            let cand: Vec<Complex64> = z.iter().zip(&step).map(|(a, b)| a + b * lambda).collect();
            let r = residual(g, w, &cand);
            if r < res {
                z = cand;
                res = r;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted || !res.is_finite() || norm(&z) > 1e8 {
            return None;
        }
    }
    (res <= cfg.newton_tol).then(|| polish(g, w, z, res, cfg)).flatten()
}

/// Undamped steps while the residual keeps dropping, then the forward-error test.
fn polish(g: &PolyMap, w: &[Complex64], mut z: Vec<Complex64>, mut res: f64, cfg: &FibreConfig) -> Option<Vec<Complex64>> {
    for _ in 0..POLISH_STEPS {
        let Some(step) = newton_step(g, w, &z) else { break };
        let cand: Vec<Complex64> = z.iter().zip(&step).map(|(a, b)| a + b).collect();
        let r = residual(g, w, &cand);
        if r < res {
            z = cand;
            res = r;
        } else {
            break;
        }
    }
    let step = newton_step(g, w, &z)?;
    (norm(&step) <= 0.1 * cfg.dedupe_radius).then_some(z)
}

fn uniform_in_polydisc(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<Complex64> {
    (0..dim)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let a = std::f64::consts::TAU * rng.random::<f64>();
            Complex64::from_polar(r, a)
        })
        .collect()
}

fn push_distinct(points: &mut Vec<Vec<Complex64>>, z: Vec<Complex64>, delta: f64) -> bool {
    if points.iter().any(|p| dist(p, &z) <= delta) {
        return false;
    }
    points.push(z);
    true
}

fn finish(g: &PolyMap, w: &[Complex64], mut points: Vec<Vec<Complex64>>, mu_target: usize, cfg: &FibreConfig, path_lost: bool) -> Fibre {
    let mut radius = cfg.radius;
    let mut halvings = 0;
    while points.len() > mu_target && halvings < cfg.max_halvings {
        radius *= 0.5;
        halvings += 1;
        points.retain(|p| max_norm(p) <= radius);
    }
    // deterministic presentation order: by modulus, then argument of first coordinate
    points.sort_by(|a, b| {
        norm(a)
            .partial_cmp(&norm(b))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a[0].arg().partial_cmp(&b[0].arg()).unwrap_or(std::cmp::Ordering::Equal))
    });
    let max_residual = points.iter().map(|p| residual(g, w, p)).fold(0.0, f64::max);
    let mut near_critical = false;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if dist(&points[i], &points[j]) < 10.0 * cfg.dedupe_radius {
                near_critical = true;
            }
        }
    }
    Fibre {
        w: w.to_vec(),
        complete: points.len() == mu_target,
        points,
        max_residual,
        radius,
        near_critical,
        path_lost,
    }
}

/// Multistart Newton over `N` uniform starts in the polydisc.
///
/// `stream` selects the RNG stream, so distinct `w` can be solved in any
/// order (or in parallel) with reproducible results.
pub fn solve_fibre(g: &PolyMap, w: &[Complex64], mu_target: usize, cfg: &FibreConfig, stream: u64) -> Fibre {
    solve_fibre_seeded(g, w, mu_target, cfg, stream, Vec::new(), false)
}

fn solve_fibre_seeded(
    g: &PolyMap,
    w: &[Complex64],
    mu_target: usize,
    cfg: &FibreConfig,
    stream: u64,
    mut points: Vec<Vec<Complex64>>,
    path_lost: bool,
) -> Fibre {
    let mut rng = rng_for(cfg.seed, stream);
    let dim = g.dim_in();
    for _ in 0..cfg.starts_for(mu_target) {
        let z0 = uniform_in_polydisc(&mut rng, dim, cfg.radius);
        if let Some(z) = newton_refine(g, w, &z0, cfg) {
            if max_norm(&z) <= cfg.radius {
                push_distinct(&mut points, z, cfg.dedupe_radius);
            }
        }
    }
    finish(g, w, points, mu_target, cfg, path_lost)
}

/// Fibres over `s·w0` for each radius `s`: multistart at the first radius,
/// then continuation from the previous points, refreshed by multistart when
/// a path is lost.
pub fn track_ray(g: &PolyMap, w0: &[Complex64], radii: &[f64], mu_target: usize, cfg: &FibreConfig, stream: u64) -> Vec<Fibre> {
    let scaled = |s: f64| -> Vec<Complex64> { w0.iter().map(|c| c * s).collect() };
    let mut out: Vec<Fibre> = Vec::with_capacity(radii.len());
    for (k, &s) in radii.iter().enumerate() {
        let w = scaled(s);
        let sub_stream = mix_seed(stream, k as u64);
        let fibre = match out.last() {
            None => solve_fibre(g, &w, mu_target, cfg, sub_stream),
            Some(prev) => {
                let mut pts = Vec::new();
                let mut lost = false;
                for p in &prev.points {
                    match newton_refine(g, &w, p, cfg) {
                        Some(z) if max_norm(&z) <= cfg.radius => {
                            if !push_distinct(&mut pts, z, cfg.dedupe_radius) {
                                lost = true;
                            }
                        }
                        _ => lost = true,
                    }
                }
                if lost || pts.len() != mu_target {
                    solve_fibre_seeded(g, &w, mu_target, cfg, sub_stream, pts, true)
                } else {
                    finish(g, &w, pts, mu_target, cfg, false)
                }
            }
        };
        out.push(fibre);
    }
    out
}

/// CSV rows `(radius, point, coordinates…, residual)` for fibres along a ray.
pub fn fibres_csv(g: &PolyMap, radii: &[f64], fibres: &[Fibre]) -> String {
    let dim = g.dim_in();
    let mut header = vec!["radius".to_string(), "point".to_string()];
    for k in 0..dim {
        header.push(format!("re_z{}", k + 1));
        header.push(format!("im_z{}", k + 1));
    }
    header.push("residual".into());
    let mut csv = Csv::new(&header);
    for (s, f) in radii.iter().zip(fibres) {
        for (i, p) in f.points.iter().enumerate() {
            let mut row = vec![csv_f64(*s), i.to_string()];
            for c in p {
                row.extend(csv_complex(*c));
            }
            row.push(csv_f64(residual(g, &f.w, p)));
            csv.row(&row);
        }
    }
    csv.finish()
}

/// `count` radii `start, start·ratio, …`.
pub fn geometric_radii(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start * ratio.powi(k as i32)).collect()
}

/// Uniform direction on the unit sphere of ℂᵐ.
pub fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> =
            (0..dim).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.iter().map(|c| c / n).collect();
        }
    }
}

/// `count` points uniform in the polydisc `|zᵢ| < radius` of ℂᵐ.
pub fn polydisc_points(dim: usize, radius: f64, count: usize, seed: u64, stream: u64) -> Vec<Vec<Complex64>> {
    let mut rng = rng_for(seed, stream);
    (0..count)
        .map(|_| {
            (0..dim)
                .map(|_| Complex64::from_polar(radius * rng.random::<f64>().sqrt(), std::f64::consts::TAU * rng.random::<f64>()))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_poly, vars};

    fn map(texts: &[&str], v: &[&str]) -> PolyMap {
        let v = vars(v);
        PolyMap::new(texts.iter().map(|t| parse_poly(t, &v).unwrap()).collect())
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn newton_examples() {
        let cfg = FibreConfig::default();
        let g = map(&["2*z"], &["z"]);
        let z = newton_refine(&g, &[c(1.0)], &[c(0.4)], &cfg).unwrap();
        assert!((z[0] - c(0.5)).norm() < 1e-14);

        let g = map(&["2*x", "2*y"], &["x", "y"]);
        let z = newton_refine(&g, &[c(1.0), c(0.0)], &[c(0.6), c(0.1)], &cfg).unwrap();
        assert!(dist(&z, &[c(0.5), c(0.0)]) < 1e-14);

        let g = map(&["3*z^2"], &["z"]);
        let z = newton_refine(&g, &[c(3.0)], &[c(-0.9)], &cfg).unwrap();
        assert!((z[0] - c(-1.0)).norm() < 1e-14);
        // critical start: Jacobian vanishes at 0
        assert!(newton_refine(&g, &[c(3.0)], &[c(0.0)], &cfg).is_none());
    }

    #[test]
    fn fibre_of_cusp_gradient() {
        let g = map(&["3*z^2"], &["z"]);
        let w = [c(3.0 * 0.01f64.powi(2))];
        let f = solve_fibre(&g, &w, 2, &FibreConfig::default(), 0);
        assert!(f.complete);
        let mut re: Vec<f64> = f.points.iter().map(|p| p[0].re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[0] + 0.01).abs() < 1e-12 && (re[1] - 0.01).abs() < 1e-12);
    }

    #[test]
    fn fibre_of_brieskorn_gradient() {
        let g = map(&["3*x^2", "3*y^2"], &["x", "y"]);
        let (a, b) = (0.02, 0.03);
        let w = [c(3.0 * a * a), c(3.0 * b * b)];
        let f = solve_fibre(&g, &w, 4, &FibreConfig::default(), 1);
        assert!(f.complete, "{} points", f.len());
        for p in &f.points {
            assert!((p[0].norm() - a).abs() < 1e-10 && (p[1].norm() - b).abs() < 1e-10);
        }
    }

    #[test]
    fn fibre_over_critical_value_is_incomplete() {
        let g = map(&["3*x^2", "3*y^2"], &["x", "y"]);
        let w = [c(0.0), c(3.0 * 0.03f64.powi(2))];
        let f = solve_fibre(&g, &w, 4, &FibreConfig::default(), 2);
        assert!(!f.complete);
        assert!(f.len() < 4);
    }

    #[test]
    fn rays_track_closed_forms() {
        let g = map(&["3*z^2"], &["z"]);
        let radii = geometric_radii(0.1, 0.5, 6);
        let fibres = track_ray(&g, &[c(1.0)], &radii, 2, &FibreConfig::default(), 3);
        for (f, s) in fibres.iter().zip(&radii) {
            assert!(f.complete);
            for p in &f.points {
                assert!((p[0].norm() - (s / 3.0).sqrt()).abs() < 1e-12);
            }
        }
        let g = map(&["2*x", "2*y"], &["x", "y"]);
        let w0 = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        for (f, s) in track_ray(&g, &w0, &radii, 1, &FibreConfig::default(), 4).iter().zip(&radii) {
            assert_eq!(f.len(), 1);
            assert!(dist(&f.points[0], &[w0[0] * (s / 2.0), w0[1] * (s / 2.0)]) < 1e-14);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let g = map(&["3*x^2 + y", "3*y^2 + x"], &["x", "y"]);
        let w = [Complex64::new(1e-3, 2e-4), Complex64::new(-3e-4, 5e-4)];
        let cfg = FibreConfig::with_seed(42);
        let a = solve_fibre(&g, &w, 1, &cfg, 9);
        let b = solve_fibre(&g, &w, 1, &cfg, 9);
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn config_validation() {
        assert!(FibreConfig::default().validate().is_ok());
        let bad = FibreConfig { dedupe_radius: 1e-13, ..FibreConfig::default() };
        assert!(bad.validate().is_err());
        let bad = FibreConfig { radius: 0.0, ..FibreConfig::default() };
        assert!(bad.validate().is_err());
    }
}
