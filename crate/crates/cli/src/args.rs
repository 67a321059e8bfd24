use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "lojax", version, about = "Milnor numbers, characteristic polynomials and gradient exponents of polynomial germs")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Seed for every random stream.
    #[arg(long, global = true, env = "LOJAX_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Degree cap for standard-basis and elimination computations.
    #[arg(long, global = true, default_value_t = lojax_core::basis::DEFAULT_DEGREE_CAP)]
    pub degree_cap: u32,

    /// Directory for report.json and the CSV/SVG side outputs.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Single-line JSON on stdout.
    #[arg(long, global = true)]
    pub compact: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Milnor number and isolatedness.
    Milnor(GermArgs),
    /// Characteristic polynomial of f with respect to its gradient.
    Charpoly {
        #[command(flatten)]
        germ: GermArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        fibre: FibreArgs,
    },
    /// Exponent θ from the characteristic polynomial.
    Exponent {
        #[command(flatten)]
        germ: GermArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        fibre: FibreArgs,
        #[command(flatten)]
        shells: ShellArgs,
        /// Also run the shell check at the certified θ.
        #[arg(long)]
        verify: bool,
        /// Write shells.svg (needs --out and --verify).
        #[arg(long)]
        plot: bool,
    },
    /// Unfolding f(x,t): μ-constancy, family polynomial, uniform exponent.
    Family {
        /// Family JSON: {"f", "x_vars", "t_vars", "grid"?}.
        file: PathBuf,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        shells: ShellArgs,
        /// Power cap N for the symbolic criterion (default μ₀ + 2).
        #[arg(long)]
        power_cap: Option<u32>,
    },
    /// Every check for one germ: identity, order bound, Viète bound, shells.
    Verify {
        #[command(flatten)]
        germ: GermArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        fibre: FibreArgs,
        #[command(flatten)]
        shells: ShellArgs,
        /// Exponent to test, e.g. 2/3 (default: the certified θ).
        #[arg(long)]
        theta: Option<String>,
        /// Polydisc points for the Viète bound.
        #[arg(long, default_value_t = 200)]
        vieta_points: usize,
        /// Write shells.svg (needs --out).
        #[arg(long)]
        plot: bool,
    },
}

#[derive(Args, Debug, Clone)]
#[command(group(ArgGroup::new("source").required(true).args(["file", "expr"])))]
pub struct GermArgs {
    /// Germ JSON: {"f": "<expr>", "vars": ["x", "y"]}.
    pub file: Option<PathBuf>,

    /// Expression, instead of a file.
    #[arg(long = "f", value_name = "EXPR")]
    pub expr: Option<String>,

    /// Comma-separated variables for --f.
    #[arg(long, value_delimiter = ',', requires = "expr")]
    pub vars: Vec<String>,
}

#[derive(Args, Debug, Clone, Copy)]
#[command(group(ArgGroup::new("method").args(["exact", "numeric", "auto"])))]
pub struct MethodArgs {
    /// Exact elimination only.
    #[arg(long)]
    pub exact: bool,
    /// Numeric fibres only.
    #[arg(long)]
    pub numeric: bool,
    /// Exact, falling back to numeric (default).
    #[arg(long)]
    pub auto: bool,
}

#[derive(Args, Debug, Clone)]
pub struct FibreArgs {
    /// Polydisc radius ρ for fibres.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Newton residual tolerance.
    #[arg(long)]
    pub newton_tol: Option<f64>,
    /// Multistart count per fibre (default 200·μ).
    #[arg(long)]
    pub starts: Option<usize>,
    /// Write samples.csv for numeric coefficients (needs --out).
    #[arg(long)]
    pub csv: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ShellArgs {
    /// Points per shell.
    #[arg(long)]
    pub shell_points: Option<usize>,
    /// Number of shells.
    #[arg(long)]
    pub shells: Option<usize>,
    /// Outer shell radius.
    #[arg(long)]
    pub shell_start: Option<f64>,
}
