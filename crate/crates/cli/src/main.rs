mod args;
mod input;
mod report;

use std::process::ExitCode;

use clap::Parser;
use lojax_core::charpoly::{
    charpoly_exact, charpoly_numeric, default_radii, default_rays, ord_of_coefficient, verify_annihilation, CharPoly,
};
use lojax_core::exponent::{
    check_order_bound, empirical_verify, gradient_exponent, ratio_to_f64, vieta_bound_check, ShellConfig, Verdict,
};
use lojax_core::family::{analyze_family, default_grid, FamilyConfig, FamilyMethod};
use lojax_core::fibres::{polydisc_points, FibreConfig};
use lojax_core::milnor::Germ;
use lojax_core::{Error, ErrorClass, Result};
use theta_arg::parse_theta;
use serde::Serialize;

use args::{Cli, Command, FibreArgs, GlobalArgs, MethodArgs, ShellArgs};
use report::{emit, Outputs, Report, RunConfig};

/// Radius of the polydisc used for identity and Viète samples.
const SAMPLE_RADIUS: f64 = 0.05;

enum Outcome {
    Ok,
    /// A report was produced but a mathematical check failed.
    Failed,
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Input => 1,
        ErrorClass::Mathematical => 2,
        ErrorClass::Resource => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("warning: could not size the worker pool: {e}");
        }
    }
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.class()))
        }
    }
}

fn method_tag(m: MethodArgs) -> FamilyMethod {
    if m.exact {
        FamilyMethod::Exact
    } else if m.numeric {
        FamilyMethod::Numeric
    } else {
        FamilyMethod::Auto
    }
}

fn method_name(m: FamilyMethod) -> &'static str {
    match m {
        FamilyMethod::Exact => "exact",
        FamilyMethod::Numeric => "numeric",
        FamilyMethod::Auto => "auto",
    }
}

fn fibre_config(g: &GlobalArgs, a: &FibreArgs) -> Result<FibreConfig> {
    let mut c = FibreConfig::with_seed(g.seed);
    if let Some(r) = a.radius {
        c.radius = r;
    }
    if let Some(t) = a.newton_tol {
        c.newton_tol = t;
    }
    c.max_starts = a.starts.or(c.max_starts);
    c.validate()?;
    Ok(c)
}

fn shell_config(g: &GlobalArgs, a: &ShellArgs) -> Result<ShellConfig> {
    let mut c = ShellConfig::with_seed(g.seed);
    if let Some(p) = a.shell_points {
        c.points = p;
    }
    if let Some(n) = a.shells {
        c.count = n;
    }
    if let Some(s) = a.shell_start {
        c.start = s;
    }
    c.validate()?;
    Ok(c)
}

fn config(g: &GlobalArgs, method: Option<FamilyMethod>, fibre: Option<FibreConfig>, shells: Option<ShellConfig>) -> RunConfig {
    RunConfig {
        seed: g.seed,
        jobs: g.jobs,
        degree_cap: g.degree_cap,
        method: method.map(method_name),
        fibre,
        shells,
        out: g.out.clone(),
    }
}

fn compute_charpoly(germ: &Germ, method: FamilyMethod, cfg: &FibreConfig, warnings: &mut Vec<String>) -> Result<CharPoly> {
    let grad = germ.gradient();
    let numeric = || charpoly_numeric(germ, &grad, &default_rays(germ.dim(), cfg.seed), &default_radii(), cfg);
    match method {
        FamilyMethod::Exact => charpoly_exact(germ, &grad),
        FamilyMethod::Numeric => numeric(),
        FamilyMethod::Auto => match charpoly_exact(germ, &grad) {
            Err(Error::GlobalLocalMismatch(why)) => {
                warnings.push(format!("exact path refused ({why}); using numeric fibres"));
                numeric()
            }
            other => other,
        },
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let g = cli.global;
    let out = g.out.as_deref();
    match cli.command {
        Command::Milnor(ga) => {
            let spec = input::germ_spec(&ga)?;
            let germ = input::load_germ(&spec, g.degree_cap)?;
            let summary = germ.summary()?;
            let cfg = config(&g, None, None, None);
            let isolated = summary.isolated;
            let warnings = if isolated { Vec::new() } else { vec!["NOT_ISOLATED: the critical point at 0 is not isolated".into()] };
            emit(&Report::new("milnor", &cfg, &spec, summary, warnings), g.compact, out, Outputs::default())?;
            Ok(if isolated { Outcome::Ok } else { Outcome::Failed })
        }
        Command::Charpoly { germ: ga, method, fibre } => {
            let spec = input::germ_spec(&ga)?;
            let germ = input::load_germ(&spec, g.degree_cap)?;
            let fcfg = fibre_config(&g, &fibre)?;
            let m = method_tag(method);
            let mut warnings = Vec::new();
            let p = compute_charpoly(&germ, m, &fcfg, &mut warnings)?;
            let orders = p.coefficients().iter().map(ord_of_coefficient).collect::<Result<Vec<_>>>()?;
            let samples = polydisc_points(germ.dim(), SAMPLE_RADIUS, 50, g.seed, 0xA2);
            let annihilation = verify_annihilation(&p, germ.f(), &germ.gradient(), &samples)?;
            let mut side = Outputs::default();
            if fibre.csv {
                if let Some(csv) = p.samples_csv() {
                    side.add("samples.csv", csv);
                }
            }
            #[derive(Serialize)]
            struct R<A, B, C> {
                charpoly: A,
                orders: B,
                annihilation: C,
            }
            let cfg = config(&g, Some(m), Some(fcfg), None);
            let result = R { charpoly: p.summary(), orders, annihilation };
            emit(&Report::new("charpoly", &cfg, &spec, result, warnings), g.compact, out, side)?;
            Ok(Outcome::Ok)
        }
        Command::Exponent { germ: ga, method, fibre, shells, verify, plot } => {
            let spec = input::germ_spec(&ga)?;
            let germ = input::load_germ(&spec, g.degree_cap)?;
            let fcfg = fibre_config(&g, &fibre)?;
            let scfg = shell_config(&g, &shells)?;
            let m = method_tag(method);
            let mut warnings = Vec::new();
            let p = compute_charpoly(&germ, m, &fcfg, &mut warnings)?;
            let certificate = gradient_exponent(&germ, &p)?;
            let order_bound = check_order_bound(&p)?;
            let mut side = Outputs::default();
            if fibre.csv {
                if let Some(csv) = p.samples_csv() {
                    side.add("samples.csv", csv);
                }
            }
            let shell_report = if verify {
                let r = empirical_verify(&germ, certificate.theta_f64(), &scfg)?;
                shell_warnings(&r.verdict, r.f_below_one, &mut warnings);
                side.add("shells.csv", r.to_csv());
                if plot {
                    side.add("shells.svg", r.to_svg(&format!("|f|^{} against |grad f| for {}", certificate.theta, germ.f())));
                }
                Some(r)
            } else {
                if plot {
                    warnings.push("--plot needs --verify; no plot written".into());
                }
                None
            };
            let failed = !order_bound.ok || shell_report.as_ref().is_some_and(|r| r.verdict == Verdict::Divergent);
            #[derive(Serialize)]
            struct R<A, B, C, D> {
                charpoly: A,
                certificate: B,
                order_bound: C,
                shells: D,
            }
            let cfg = config(&g, Some(m), Some(fcfg), verify.then_some(scfg));
            let result = R { charpoly: p.summary(), certificate, order_bound, shells: shell_report };
            emit(&Report::new("exponent", &cfg, &spec, result, warnings), g.compact, out, side)?;
            Ok(if failed { Outcome::Failed } else { Outcome::Ok })
        }
        Command::Verify { germ: ga, method, fibre, shells, theta, vieta_points, plot } => {
            let spec = input::germ_spec(&ga)?;
            let germ = input::load_germ(&spec, g.degree_cap)?;
            let fcfg = fibre_config(&g, &fibre)?;
            let scfg = shell_config(&g, &shells)?;
            let m = method_tag(method);
            let mut warnings = Vec::new();
            let p = compute_charpoly(&germ, m, &fcfg, &mut warnings)?;
            let certificate = gradient_exponent(&germ, &p)?;
            let order_bound = check_order_bound(&p)?;
            let samples = polydisc_points(germ.dim(), SAMPLE_RADIUS, vieta_points, g.seed, 0xB1);
            let annihilation = verify_annihilation(&p, germ.f(), &germ.gradient(), &samples[..samples.len().min(50)])?;
            let vieta = vieta_bound_check(&germ, &p, &samples)?;
            let tested = match &theta {
                Some(t) => parse_theta(t)?,
                None => ratio_to_f64(certificate.theta),
            };
            let shell_report = empirical_verify(&germ, tested, &scfg)?;
            shell_warnings(&shell_report.verdict, shell_report.f_below_one, &mut warnings);
            let mut side = Outputs::default();
            side.add("shells.csv", shell_report.to_csv());
            if plot {
                side.add("shells.svg", shell_report.to_svg(&format!("shell check for {}", germ.f())));
            }
            if fibre.csv {
                if let Some(csv) = p.samples_csv() {
                    side.add("samples.csv", csv);
                }
            }
            let pass = order_bound.ok && vieta.ok && shell_report.verdict != Verdict::Divergent;
            #[derive(Serialize)]
            struct R<A, B, C, D, E, F> {
                charpoly: A,
                certificate: B,
                annihilation: C,
                order_bound: D,
                vieta: E,
                shells: F,
                pass: bool,
            }
            let cfg = config(&g, Some(m), Some(fcfg), Some(scfg));
            let result = R { charpoly: p.summary(), certificate, annihilation, order_bound, vieta, shells: shell_report, pass };
            emit(&Report::new("verify", &cfg, &spec, result, warnings), g.compact, out, side)?;
            Ok(if pass { Outcome::Ok } else { Outcome::Failed })
        }
        Command::Family { file, method, shells, power_cap } => {
            let spec = input::family_spec(&file)?;
            let u = input::load_family(&spec, g.degree_cap)?;
            let grid = match &spec.grid {
                Some(entries) => input::parse_grid(entries, u.k())?,
                None => default_grid(u.k()),
            };
            let mut fcfg = FamilyConfig::with_seed(g.seed);
            fcfg.shells = shell_config(&g, &shells)?;
            fcfg.power_cap = power_cap;
            fcfg.method = method_tag(method);
            let report = analyze_family(&u, &grid, &fcfg)?;
            let mut side = Outputs::default();
            side.add("mu_table.csv", family_tables::mu_table(&report));
            side.add("semicontinuity.csv", family_tables::semicontinuity(&report));
            let failed = !report.hard_failures.is_empty();
            let warnings = report.warnings.clone();
            let cfg = RunConfig { shells: Some(fcfg.shells.clone()), fibre: Some(fcfg.fibre.clone()), ..config(&g, Some(fcfg.method), None, None) };
            #[derive(Serialize)]
            struct R<'a, A> {
                family: A,
                stoll_config: &'a lojax_core::family::StollConfig,
                hartogs_config: &'a lojax_core::family::HartogsConfig,
            }
            let result = R { family: report, stoll_config: &fcfg.stoll, hartogs_config: &fcfg.hartogs };
            emit(&Report::new("family", &cfg, &spec, result, warnings), g.compact, out, side)?;
            Ok(if failed { Outcome::Failed } else { Outcome::Ok })
        }
    }
}

fn shell_warnings(v: &Verdict, f_below_one: bool, warnings: &mut Vec<String>) {
    if !f_below_one {
        warnings.push("max |f| ≥ 1 on some shell; the shell verdict is not meaningful there".into());
    }
    match v {
        Verdict::Inconclusive => warnings.push("shell trend inconclusive".into()),
        Verdict::Divergent => warnings.push("shell sups grow toward the origin: the exponent fails".into()),
        Verdict::Bounded => {}
    }
}

mod theta_arg {
    use lojax_core::{Error, Result};

    /// `"p/q"` or a decimal, as a float in `(0, 1]`.
    pub fn parse_theta(text: &str) -> Result<f64> {
        let bad = || Error::InvalidInput(format!("θ must be a number in (0, 1], got '{text}'"));
        let v = match text.split_once('/') {
            Some((p, q)) => {
                let p: f64 = p.trim().parse().map_err(|_| bad())?;
                let q: f64 = q.trim().parse().map_err(|_| bad())?;
                p / q
            }
            None => text.trim().parse().map_err(|_| bad())?,
        };
        if !(v > 0.0 && v <= 1.0) {
            return Err(bad());
        }
        Ok(v)
    }
}

mod family_tables {
    use lojax_core::family::{FamilyReport, SliceMu};

    fn mu_field(mu: &SliceMu) -> String {
        match mu {
            SliceMu::Finite(n) => n.to_string(),
            SliceMu::NotIsolated => "NOT_ISOLATED".into(),
        }
    }

    fn write(header: &[&str], rows: Vec<Vec<String>>) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("writing to memory");
        for r in rows {
            w.write_record(&r).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flushing to memory")).expect("UTF-8")
    }

    pub fn mu_table(r: &FamilyReport) -> String {
        write(&["t", "mu"], r.grid.rows.iter().map(|row| vec![row.t.join(";"), mu_field(&row.mu)]).collect())
    }

    pub fn semicontinuity(r: &FamilyReport) -> String {
        let rows = r
            .semicontinuity
            .rows
            .iter()
            .map(|row| {
                vec![
                    row.t.join(";"),
                    mu_field(&row.mu),
                    row.ok.to_string(),
                    row.verdict.map(|v| serde_json::to_value(v).ok().and_then(|j| j.as_str().map(String::from)).unwrap_or_default()).unwrap_or_default(),
                    row.constant.and_then(lojax_core::export::json::format_f64).unwrap_or_default(),
                ]
            })
            .collect();
        write(&["t", "mu", "ok", "verdict", "constant"], rows)
    }
}
