//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::process::Command;
use std::time::{Duration, Instant};

use lojax_core::algebra::{GaussRat, Order, Polynomial};
use lojax_core::charpoly::{
    charpoly_exact, charpoly_numeric, default_radii, default_rays, ord_of_coefficient, verify_annihilation, CharPoly,
    CoefficientData, NOISE_FLOOR,
};
use lojax_core::exponent::{check_order_bound, gradient_exponent, uniform_exponent, vieta_bound_check, ExponentCertificate, VIETA_TOL};
use lojax_core::family::{
    default_grid, mu_constancy_grid, mu_constancy_symbolic, semicontinuity_check, stoll_check, uniform_exponent_verify,
    ConstancyVerdict, SliceMu, StollConfig, SymbolicVerdict, Unfolding,
};
use lojax_core::exponent::ShellConfig;
use lojax_core::fibres::{polydisc_points, FibreConfig};
use lojax_core::milnor::Germ;
use lojax_core::Error;
use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LADDER_LIMIT: Duration = Duration::from_secs(1);
const BRIESKORN_LIMIT: Duration = Duration::from_secs(10);
const FAMILY_LIMIT: Duration = Duration::from_secs(30);
const FIT_GUARD: f64 = 0.1;
const SAMPLE_REL_TOL: f64 = 1e-8;
const RANDOM_GERMS: usize = 20;
const STOLL_SAMPLES: usize = 50;
const STOLL_FRACTION: f64 = 0.95;
const VIETA_POINTS: usize = 200;
const SEED: u64 = 2024;

type Check = Result<String, String>;

/// Facts gathered along the way for the range criterion.
#[derive(Default)]
struct Collected {
    mus: Vec<usize>,
    certificates: Vec<(String, ExponentCertificate)>,
    exact: Vec<(Germ, CharPoly)>,
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s(e: Error) -> String {
    e.to_string()
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Determinant over ℚ by Gaussian elimination.
fn det(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut d = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else { return BigRational::zero() };
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        let piv = m[c][c].clone();
        d *= &piv;
        for r in c + 1..n {
            let f = &m[r][c] / &piv;
            if f.is_zero() {
                continue;
            }
            for k in c..n {
                let v = &f * &m[c][k];
                m[r][k] -= v;
            }
        }
    }
    d
}

/// `Res_z(a, b)` from dense coefficient lists (constant term first).
fn sylvester_resultant(a: &[BigRational], b: &[BigRational]) -> BigRational {
    let (da, db) = (a.len() - 1, b.len() - 1);
    let n = da + db;
    let mut m = vec![vec![BigRational::zero(); n]; n];
    for r in 0..db {
        for (i, c) in a.iter().rev().enumerate() {
            m[r][r + i] = c.clone();
        }
    }
    for r in 0..da {
        for (i, c) in b.iter().rev().enumerate() {
            m[db + r][r + i] = c.clone();
        }
    }
    det(m)
}

/// `Res_z(d z^{d−1} − w, z^d − t) = (−1)^{d−1} d^d P(w, t)` at every point of
/// a grid larger than the degrees of `P`.
fn resultant_oracle(d: usize, p: &Polynomial) -> Result<(), String> {
    let mut a = vec![BigRational::zero(); d];
    a[d - 1] = q(d as i64, 1);
    let mut b = vec![BigRational::zero(); d + 1];
    b[d] = BigRational::one();
    let sign = if (d - 1) % 2 == 0 { 1 } else { -1 };
    let scale = q(sign * (d as i64).pow(d as u32), 1);
    for wn in -(d as i64)..=(d as i64) {
        for tn in 0..=(d as i64) {
            let (w, t) = (q(wn, 3), q(tn, 5));
            a[0] = -w.clone();
            b[0] = -t.clone();
            let res = sylvester_resultant(&a, &b);
            let pv = p.eval_exact(&[GaussRat::real(w.clone()), GaussRat::real(t.clone())]).map_err(e2s)?;
            ensure(pv.is_real() && res == &scale * &pv.re, || format!("z^{d}: resultant disagrees at w = {w}, t = {t}"))?;
        }
    }
    Ok(())
}

fn c1_ladder(col: &mut Collected) -> Check {
    let mut worst = Duration::ZERO;
    for d in 2..=6usize {
        let start = Instant::now();
        let f = Germ::parse(&format!("z^{d}"), &["z"]).map_err(e2s)?;
        let mu = f.milnor_number().map_err(e2s)?;
        ensure(mu == d - 1, || format!("z^{d}: μ = {mu}"))?;
        let p = charpoly_exact(&f, &f.gradient()).map_err(e2s)?;
        let poly = p.polynomial().ok_or("P is not a polynomial")?;
        let closed = lojax_core::algebra::parse_poly(&format!("t^{} - 1/{}*w^{d}", d - 1, (d as u64).pow(d as u32)), poly.vars())
            .map_err(e2s)?;
        ensure(poly == closed, || format!("z^{d}: P = {poly}"))?;
        resultant_oracle(d, &poly)?;
        let cert = gradient_exponent(&f, &p).map_err(e2s)?;
        ensure(cert.theta == Rational64::new(d as i64 - 1, d as i64) && cert.theta == uniform_exponent(mu), || {
            format!("z^{d}: θ = {}", cert.theta)
        })?;
        let el = start.elapsed();
        ensure(el < LADDER_LIMIT, || format!("z^{d} took {el:?}"))?;
        worst = worst.max(el);
        col.mus.push(mu);
        col.certificates.push((format!("z^{d}"), cert));
        col.exact.push((f, p));
    }
    Ok(format!("d = 2..6 match t^(d-1) - (w/d)^d and the resultant oracle; slowest {worst:.2?}"))
}

fn brieskorn() -> impl Iterator<Item = (u32, u32)> {
    (2..=4).flat_map(|a| (2..=4).map(move |b| (a, b)))
}

fn c2_brieskorn(col: &mut Collected) -> Check {
    let start = Instant::now();
    for (a, b) in brieskorn() {
        let name = format!("x^{a}+y^{b}");
        let f = Germ::parse(&format!("x^{a} + y^{b}"), &["x", "y"]).map_err(e2s)?;
        let mu = f.milnor_number().map_err(e2s)?;
        let want = ((a - 1) * (b - 1)) as usize;
        ensure(mu == want, || format!("{name}: μ = {mu}, expected {want}"))?;
        let p = charpoly_exact(&f, &f.gradient()).map_err(e2s)?;
        let bound = check_order_bound(&p).map_err(e2s)?;
        ensure(bound.ok, || format!("{name}: order bound fails"))?;
        ensure(bound.initial_form_is_t_mu == Some(true), || format!("{name}: initial form is not t^μ"))?;
        let cert = gradient_exponent(&f, &p).map_err(e2s)?;
        ensure(cert.theta <= uniform_exponent(mu), || format!("{name}: θ = {} > μ/(μ+1)", cert.theta))?;
        col.mus.push(mu);
        col.certificates.push((name, cert));
        col.exact.push((f, p));
    }
    let el = start.elapsed();
    ensure(el < BRIESKORN_LIMIT, || format!("suite took {el:?}"))?;
    Ok(format!("9 germs, μ = (a-1)(b-1), in P = t^μ, θ ≤ μ/(μ+1); {el:.2?}"))
}

/// Dense binary forms of degree 2..4 with coefficients in [−3, 3].
fn random_form(rng: &mut ChaCha8Rng) -> String {
    let d: u32 = rng.random_range(2..=4);
    let terms: Vec<String> = (0..=d).map(|i| format!("({})*x^{}*y^{}", rng.random_range(-3i64..=3), i, d - i)).collect();
    terms.join(" + ")
}

fn c3_annihilation(col: &mut Collected) -> Check {
    for (f, p) in &col.exact {
        let r = verify_annihilation(p, f.f(), &f.gradient(), &[]).map_err(e2s)?;
        ensure(r.identity_holds, || format!("{}: identity not exact", f.f()))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut done, mut skipped, mut draws) = (0, 0, 0);
    while done < RANDOM_GERMS {
        draws += 1;
        ensure(draws < 500, || format!("only {done} isolated draws in 500"))?;
        let text = random_form(&mut rng);
        let f = match Germ::parse(&text, &["x", "y"]) {
            Ok(f) => f,
            Err(Error::ZeroInput(_)) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e2s(e)),
        };
        let mu = match f.milnor_number() {
            Ok(mu) => mu,
            Err(Error::NotIsolated) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e2s(e)),
        };
        let p = charpoly_exact(&f, &f.gradient()).map_err(|e| format!("{text}: {e}"))?;
        let r = verify_annihilation(&p, f.f(), &f.gradient(), &[]).map_err(|e| format!("{text}: {e}"))?;
        ensure(r.identity_holds, || format!("{text}: identity not exact"))?;
        let cert = gradient_exponent(&f, &p).map_err(e2s)?;
        col.mus.push(mu);
        col.certificates.push((text, cert));
        done += 1;
    }
    Ok(format!("{} suite polynomials and {done} random dense forms ({skipped} non-isolated draws skipped) satisfy P(grad f, f) = 0", col.exact.len()))
}

fn c4_cross_check() -> Check {
    let cfg = FibreConfig::with_seed(SEED);
    let mut worst_rel: f64 = 0.0;
    for (a, b) in brieskorn() {
        let name = format!("x^{a}+y^{b}");
        let f = Germ::parse(&format!("x^{a} + y^{b}"), &["x", "y"]).map_err(e2s)?;
        let exact = charpoly_exact(&f, &f.gradient()).map_err(e2s)?;
        let num = charpoly_numeric(&f, &f.gradient(), &default_rays(2, SEED), &default_radii(), &cfg).map_err(e2s)?;
        for j in 1..=exact.mu() {
            let oe = ord_of_coefficient(exact.coefficient(j)).map_err(e2s)?;
            let on = ord_of_coefficient(num.coefficient(j)).map_err(e2s)?;
            ensure(oe.value == on.value, || format!("{name}: ord a_{j} exact {} vs fitted {}", oe.value, on.value))?;
            if let (Order::Finite(v), Some(s)) = (on.value, on.slope) {
                ensure((s - v as f64).abs() < FIT_GUARD, || format!("{name}: a_{j} slope {s} off {v}"))?;
            }
            let CoefficientData::Exact(e) = &exact.coefficient(j).data else { return Err("exact data missing".into()) };
            let CoefficientData::Sampled(tables) = &num.coefficient(j).data else { return Err("samples missing".into()) };
            for t in tables {
                let (Some(v), Some(scale)) = (t.values[0], t.scales[0]) else { continue };
                let w: Vec<_> = t.direction.iter().map(|c| c * t.radii[0]).collect();
                let x = e.evaluate(&w).map_err(e2s)?;
                if x.norm() <= NOISE_FLOOR * scale {
                    ensure(v.norm() <= NOISE_FLOOR * scale, || format!("{name}: a_{j} = {v} where exact is 0"))?;
                } else {
                    let rel = (v - x).norm() / x.norm();
                    worst_rel = worst_rel.max(rel);
                    ensure(rel <= SAMPLE_REL_TOL, || format!("{name}: a_{j} relative error {rel:.2e}"))?;
                }
            }
        }
    }
    Ok(format!("fitted orders equal exact orders; worst relative sample error {worst_rel:.2e}"))
}

fn c5_hesse(col: &mut Collected) -> Check {
    let start = Instant::now();
    let u = Unfolding::parse("x^3 + y^3 + t*x*y", &["x", "y"], &["t"]).map_err(e2s)?;
    let grid = vec![vec![GaussRat::from_int(0)], vec![GaussRat::from_frac(1, 8)], vec![GaussRat::from_frac(1, 4)]];
    let table = mu_constancy_grid(&u, &grid).map_err(e2s)?;
    let mus: Vec<SliceMu> = table.rows.iter().map(|r| r.mu).collect();
    ensure(mus == [SliceMu::Finite(4), SliceMu::Finite(1), SliceMu::Finite(1)], || format!("μ-table {mus:?}"))?;
    ensure(table.verdict == ConstancyVerdict::NonConstant, || format!("verdict {:?}", table.verdict))?;
    let semi = semicontinuity_check(&u, &grid, &ShellConfig { points: 100, ..ShellConfig::with_seed(SEED) }).map_err(e2s)?;
    ensure(semi.pass, || "semicontinuity violated".into())?;
    let mut fractions = Vec::new();
    for t in &grid[1..] {
        let cfg = StollConfig { samples: STOLL_SAMPLES, fibre: FibreConfig { radius: 0.16, ..FibreConfig::with_seed(SEED) }, ..StollConfig::default() };
        let r = stoll_check(&u, t, &cfg).map_err(e2s)?;
        ensure(r.mu0 == 4 && r.mu_t == 1 && r.overfull_fibres == 0, || format!("sheet counts {r:?}"))?;
        ensure(r.fraction >= STOLL_FRACTION, || format!("t = {:?}: only {:.0}% of samples", r.t, 100.0 * r.fraction))?;
        fractions.push(format!("{:.0}%", 100.0 * r.fraction));
    }
    col.mus.extend([4, 1]);
    let el = start.elapsed();
    ensure(el < FAMILY_LIMIT, || format!("took {el:?}"))?;
    Ok(format!("μ-table (4,1,1), NON_CONSTANT, semicontinuity ok, 4 sheets with 1 converging in {} of samples; {el:.2?}", fractions.join("/")))
}

fn c6_morse(col: &mut Collected) -> Check {
    let start = Instant::now();
    let u = Unfolding::parse("x^2 + y^2 + t*x*y", &["x", "y"], &["t"]).map_err(e2s)?;
    let grid = default_grid(1);
    ensure(grid.iter().all(|t| t[0].norm_sqr() <= q(1, 16)), || "grid exceeds |t| ≤ 1/4".into())?;
    let table = mu_constancy_grid(&u, &grid).map_err(e2s)?;
    ensure(table.verdict == ConstancyVerdict::ConstantOnGrid, || format!("verdict {:?}", table.verdict))?;
    let sym = mu_constancy_symbolic(&u, u.mu0() as u32 + 2).map_err(e2s)?;
    ensure(sym.verdict == SymbolicVerdict::Proved, || format!("symbolic {:?}", sym.verdict))?;
    let r = uniform_exponent_verify(&u, &grid, &ShellConfig::with_seed(SEED)).map_err(e2s)?;
    ensure(r.theta == Rational64::new(1, 2), || format!("θ* = {}", r.theta))?;
    for s in &r.slices {
        ensure(s.report.verdict == lojax_core::exponent::Verdict::Bounded, || format!("t = {:?}: {:?}", s.t, s.report.verdict))?;
    }
    ensure(r.shared_constant_ok, || format!("shared constant {} driven by the innermost shell", r.shared_constant))?;
    ensure(r.joint.verdict == lojax_core::exponent::Verdict::Bounded, || format!("joint check {:?}", r.joint.verdict))?;
    col.mus.push(1);
    let el = start.elapsed();
    ensure(el < FAMILY_LIMIT, || format!("took {el:?}"))?;
    Ok(format!("CONSTANT_ON_GRID, PROVED, θ* = 1/2, {} slices BOUNDED with shared C = {:.4}, joint BOUNDED; {el:.2?}", r.slices.len(), r.shared_constant))
}

fn c7_vieta(col: &Collected) -> Check {
    let mut worst: f64 = 0.0;
    for (i, (f, p)) in col.exact.iter().enumerate() {
        let pts = polydisc_points(f.dim(), 0.1, VIETA_POINTS, SEED, 0x7000 + i as u64);
        let r = vieta_bound_check(f, p, &pts).map_err(e2s)?;
        ensure(r.samples_used == VIETA_POINTS, || format!("{}: {} samples skipped", f.f(), r.samples_skipped))?;
        ensure(r.max_ratio <= 1.0 + VIETA_TOL, || format!("{}: ratio {}", f.f(), r.max_ratio))?;
        worst = worst.max(r.max_ratio);
    }
    Ok(format!("{} germs x {VIETA_POINTS} points, max ratio {worst:.6}", col.exact.len()))
}

fn c8_determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_lojax");
    let dir = std::env::temp_dir().join(format!("lojax-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let family = dir.join("morse.json");
    std::fs::write(&family, r#"{"f": "x^2 + y^2 + t*x*y", "x_vars": ["x", "y"], "t_vars": ["t"], "grid": [["0","0"], ["1/8","0"], ["-1/4","0"], ["0","1/8"]]}"#)
        .map_err(|e| e.to_string())?;
    let fam = family.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["milnor", "--f", "x^3+y^3", "--vars", "x,y"],
        vec!["charpoly", "--f", "z^2", "--vars", "z", "--numeric"],
        vec!["exponent", "--f", "x^2+y^2", "--vars", "x,y", "--auto", "--verify"],
        vec!["verify", "--f", "z^3", "--vars", "z", "--shell-points", "200"],
        vec!["family", fam, "--shell-points", "100"],
    ];
    let run = |args: &[&str], jobs: &str| -> Result<Vec<u8>, String> {
        let out = Command::new(bin).args(args).args(["--seed", "7", "--jobs", jobs]).output().map_err(|e| e.to_string())?;
        ensure(out.status.success(), || format!("{args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))?;
        Ok(out.stdout)
    };
    for args in &runs {
        let a = run(args, "4")?;
        let b = run(args, "4")?;
        ensure(a == b, || format!("{args:?}: output differs between runs"))?;
        // the worker count is echoed, so compare the result body only
        let c = run(args, "1")?;
        let body = |s: &[u8]| -> Result<serde_json::Value, String> {
            let v: serde_json::Value = serde_json::from_slice(s).map_err(|e| e.to_string())?;
            Ok(v["result"].clone())
        };
        ensure(body(&a)? == body(&c)?, || format!("{args:?}: result depends on --jobs"))?;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} commands byte-identical across reruns and independent of --jobs", runs.len()))
}

fn c9_ranges(col: &Collected) -> Check {
    let half = Rational64::new(1, 2);
    for &mu in &col.mus {
        let u = uniform_exponent(mu);
        ensure(mu >= 1 && u >= half && u < Rational64::one(), || format!("μ = {mu}: μ/(μ+1) = {u}"))?;
    }
    let mut with_bound = 0;
    for (name, c) in &col.certificates {
        if !c.bound_ok {
            continue;
        }
        with_bound += 1;
        ensure(c.theta > Rational64::zero() && c.theta <= uniform_exponent(c.mu), || format!("{name}: θ = {} outside (0, μ/(μ+1)]", c.theta))?;
        ensure(c.theta.is_positive(), || format!("{name}: θ not positive"))?;
    }
    Ok(format!("{} values of μ, {with_bound} certificates with bound_ok", col.mus.len()))
}

fn main() {
    let mut col = Collected::default();
    let mut results: Vec<(u32, &str, Check, Duration)> = Vec::new();
    let mut record = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let r = f();
        results.push((id, name, r, start.elapsed()));
    };
    record(1, "one-variable ladder", &mut || c1_ladder(&mut col));
    record(2, "Brieskorn suite", &mut || c2_brieskorn(&mut col));
    record(3, "annihilation identity", &mut || c3_annihilation(&mut col));
    record(4, "numeric/exact cross-check", &mut c4_cross_check);
    record(5, "Hesse family", &mut || c5_hesse(&mut col));
    record(6, "Morse family", &mut || c6_morse(&mut col));
    record(7, "Viete bound", &mut || c7_vieta(&col));
    record(8, "determinism", &mut c8_determinism);
    record(9, "exponent ranges", &mut || c9_ranges(&col));

    let mut failed = 0;
    for (id, name, r, el) in &results {
        match r {
            Ok(detail) => println!("PASS  criterion {id}: {name} ({el:.2?}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {id}: {name} ({el:.2?}): {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
