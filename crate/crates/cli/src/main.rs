use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use etale_growth::groupoid::DEFAULT_BALL_BUDGET;
use etale_growth::shift::DEFAULT_ENUMERATION_BUDGET;
use etale_growth::{Error, ErrorKind};
use serde::Serialize;
use serde_json::{json, Value};

mod commands;

/// Growth, admissibility and weighted-algebra computations for shift spaces
/// and their Renault–Deaconu groupoids.
///
/// Exit status: 0 when every check passes, 1 on an inequality violation or
/// certificate failure, 2 on invalid input, 3 when a budget is exhausted.
#[derive(Debug, Parser)]
#[command(name = "etale-growth", version)]
struct Cli {
    /// Report format. Not every command has a CSV form.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// State budget for breadth-first ball enumeration.
    #[arg(long, env = "ETALE_GROWTH_BALL_BUDGET", default_value_t = DEFAULT_BALL_BUDGET, global = true)]
    ball_budget: u64,

    /// Step budget for word enumeration.
    #[arg(long, env = "ETALE_GROWTH_ENUM_BUDGET", default_value_t = DEFAULT_ENUMERATION_BUDGET, global = true)]
    enum_budget: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Languages of a shift space.
    #[command(subcommand)]
    Shift(ShiftCmd),
    /// Exact tables and bounds for the ordered prime shift.
    #[command(subcommand, name = "prime-shift")]
    PrimeShift(PrimeCmd),
    /// Balls and Følner sets in the groupoid over one orbit.
    #[command(subcommand)]
    Groupoid(GroupoidCmd),
    /// Inequality sweeps and norm estimates in the weighted convolution algebra.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Growth certificates, graph growth and filtered groupoids.
    #[command(subcommand)]
    Growth(GrowthCmd),
}

#[derive(Debug, Args, Serialize)]
struct SpecArg {
    /// Builtin name (prime, golden-mean, full2, ...) or path to a TOML spec.
    #[arg(long, default_value = "prime")]
    spec: String,
}

#[derive(Debug, Subcommand)]
enum ShiftCmd {
    /// All admissible words of one length.
    Enumerate {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        len: usize,
    },
    /// Word counts `|L_n|` and the complexity function.
    Complexity {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        max: usize,
    },
    /// Checks that the language is factorial up to `--max`; optionally
    /// reports whether one word is admissible.
    Check {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 12)]
        max: usize,
        #[arg(long)]
        word: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum PrimeCmd {
    /// Exact `|L_n|` and `p_X(n)` from the shifted-prime recursion.
    Counts {
        #[arg(long)]
        max: usize,
    },
    /// The bounds `2^π(⌊√(n/2)⌋) <= p_X(n) <= 4n³p(n)` row by row.
    Bounds {
        #[arg(long, default_value_t = 5000)]
        max: usize,
        /// Fail unless the bounds hold from this `n` on.
        #[arg(long, default_value_t = 50)]
        max_threshold: u64,
    },
    /// Cross-checks exact counts against enumeration, the bounds, and the
    /// growth of the effective degree `log p_X(n) / log n`.
    Verify {
        #[arg(long, default_value_t = 5000)]
        max: usize,
        /// Compare against enumeration for lengths up to this.
        #[arg(long, default_value_t = 16)]
        brute: usize,
        #[arg(long, default_value_t = 50)]
        max_threshold: u64,
        /// Lengths at which the effective degree must strictly increase.
        #[arg(long, value_delimiter = ',', default_value = "100,500,2000,5000")]
        degree_points: Vec<u64>,
    },
}

#[derive(Debug, Args, Serialize)]
struct OrbitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    spec: SpecArg,
    /// Base point as `preperiod|period`; `|0` is the all-zero sequence.
    #[arg(long, default_value = "|0")]
    base: String,
}

#[derive(Debug, Subcommand)]
enum GroupoidCmd {
    /// Ball sizes `|B(n)|` and level sizes `|W(n)|` at the base unit.
    Ball {
        #[command(flatten)]
        orbit: OrbitArgs,
        #[arg(long)]
        radius: usize,
    },
    /// Searches balls `F` with `|KF|/|F| <= 1 + ε` for `K = B(k_radius)`.
    Folner {
        #[command(flatten)]
        orbit: OrbitArgs,
        /// Tolerance, as a decimal or a fraction `a/b`.
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 1)]
        k_radius: u64,
        #[arg(long, default_value_t = 64)]
        max_radius: usize,
    },
}

#[derive(Debug, Args, Serialize)]
struct RegionArgs {
    #[command(flatten)]
    #[serde(flatten)]
    orbit: OrbitArgs,
    /// Region points are the ranges of `B(radius)`; arrows have length at most `radius`.
    #[arg(long, default_value_t = 6)]
    radius: usize,
    /// Longest product allowed before reporting an escape.
    #[arg(long, default_value_t = 16)]
    cap: u64,
    #[arg(long, default_value_t = 6.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Growth rate `α₀` of the bound `C exp(α₀ k^{β₀})`.
    #[arg(long, default_value_t = 2.6)]
    alpha0: f64,
    #[arg(long, default_value_t = 0.5)]
    beta0: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Lengths counted exactly when certifying fiber sums.
    #[arg(long, default_value_t = 12)]
    profile_len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CheckKind {
    All,
    Submult,
    Eq41,
    Young,
    Lemma44,
    Interp,
}

#[derive(Debug, Subcommand)]
enum AlgebraCmd {
    /// Runs inequality checks over random cases.
    Verify {
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, value_enum, default_value_t = CheckKind::All)]
        check: CheckKind,
        #[arg(long, default_value_t = 1000)]
        cases: u64,
        /// Exponents for Young's inequality.
        #[arg(long, value_delimiter = ',', default_value = "1,1.25,1.5,2,3,4")]
        exponents: Vec<f64>,
    },
    /// Lower and upper bounds on reduced operator norms of random functions.
    Norms {
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, default_value_t = 20)]
        functions: u64,
        /// Radius of the base fiber ball carrying the truncated representation.
        #[arg(long, default_value_t = 4)]
        ball_radius: usize,
    },
    /// Repeated squaring with the power-step estimate at each step.
    Powers {
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, default_value_t = 100)]
        functions: u64,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Longest support element of the random functions.
        #[arg(long, default_value_t = 2)]
        max_len: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Family {
    Polynomial,
    Subexp,
}

#[derive(Debug, Subcommand)]
enum GrowthCmd {
    /// Fits every certificate family to an `n,b` CSV series.
    Fit {
        #[arg(long)]
        input: PathBuf,
    },
    /// Verifies one certificate against an `n,b` CSV series.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Ball growth of a graph (edge list) and its coarse bound `⌈M f²⌉`.
    Graph {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        r_max: u64,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
    },
    /// Lengths from a filtration of a finite groupoid (TOML).
    Proper {
        #[arg(long)]
        input: PathBuf,
    },
}

/// What a command produced.
pub struct Outcome {
    pub passed: bool,
    pub params: Value,
    pub result: Value,
    pub csv: Option<Vec<u8>>,
}

pub struct Budgets {
    pub ball: u64,
    pub enumeration: u64,
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Input | ErrorKind::Domain => 2,
        ErrorKind::Resource => 3,
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Shift(ShiftCmd::Enumerate { .. }) => "shift enumerate",
        Command::Shift(ShiftCmd::Complexity { .. }) => "shift complexity",
        Command::Shift(ShiftCmd::Check { .. }) => "shift check",
        Command::PrimeShift(PrimeCmd::Counts { .. }) => "prime-shift counts",
        Command::PrimeShift(PrimeCmd::Bounds { .. }) => "prime-shift bounds",
        Command::PrimeShift(PrimeCmd::Verify { .. }) => "prime-shift verify",
        Command::Groupoid(GroupoidCmd::Ball { .. }) => "groupoid ball",
        Command::Groupoid(GroupoidCmd::Folner { .. }) => "groupoid folner",
        Command::Algebra(AlgebraCmd::Verify { .. }) => "algebra verify",
        Command::Algebra(AlgebraCmd::Norms { .. }) => "algebra norms",
        Command::Algebra(AlgebraCmd::Powers { .. }) => "algebra powers",
        Command::Growth(GrowthCmd::Fit { .. }) => "growth fit",
        Command::Growth(GrowthCmd::Verify { .. }) => "growth verify",
        Command::Growth(GrowthCmd::Graph { .. }) => "growth graph",
        Command::Growth(GrowthCmd::Proper { .. }) => "growth proper",
    }
}

fn render(cli: &Cli, name: &str, out: Outcome) -> Result<Vec<u8>, Error> {
    match cli.format {
        Format::Csv => out
            .csv
            .ok_or_else(|| Error::InvalidParameter(format!("{name} has no CSV report"))),
        Format::Json => {
            let report = json!({
                "command": name,
                "params": out.params,
                "passed": out.passed,
                "result": out.result,
            });
            let mut text = serde_json::to_vec_pretty(&report).expect("reports serialize");
            text.push(b'\n');
            Ok(text)
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let budgets = Budgets {
        ball: cli.ball_budget,
        enumeration: cli.enum_budget,
    };
    let name = command_name(&cli.command);
    let mut out = commands::dispatch(&cli.command, &budgets)?;
    if let Value::Object(map) = &mut out.params {
        map.insert("ball_budget".into(), json!(cli.ball_budget));
        map.insert("enum_budget".into(), json!(cli.enum_budget));
        map.insert("format".into(), json!(cli.format));
    }
    let passed = out.passed;
    let bytes = render(cli, name, out)?;
    match &cli.output {
        Some(path) => fs::write(path, bytes)?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
