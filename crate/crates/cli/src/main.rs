//! `dioph`: batch front-end for the certified computations in `dioph-core`.

mod output;
mod selftest;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use dioph::badness::{estimate_omega, records_csv};
use dioph::counting::{discrepancy_report, ratio_decimal, CountOptions, Mode, Strategy};
use dioph::covers::{cover_cost, dimension_bound, subspace_constant_c, CoverStrategy};
use dioph::fracsum::{
    dyadic_profile, growth_fit, normalized_growth, recip_product_sum, sign_flip_majorant,
    ProfileOptions, SumOptions,
};
use dioph::matrices::{
    parse_decimal, parse_matrix, parse_psi, parse_subspace, ApproxFunction, RealMatrix,
    SubspaceMatrix,
};
use dioph::selberg::{
    check_coefficients, sandwich_csv, sandwich_row, selberg_pair, verify_sandwich,
};
use dioph::{Error, Precision};

use output::{Format, Report};

const PRECISION_ENV: &str = "DIOPH_PRECISION_CAP";

#[derive(Parser, Debug)]
#[command(
    name = "dioph",
    version,
    about = "Certified computations for rational points near affine subspaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Largest working precision in bits; overrides DIOPH_PRECISION_CAP.
    #[arg(long = "precision-cap", global = true)]
    precision_cap: Option<u32>,
    /// Largest number of points a count may enumerate.
    #[arg(long, global = true, default_value_t = 1_000_000_000)]
    budget: u64,
    /// Run this subcommand's built-in examples instead.
    #[arg(long, global = true)]
    selftest: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Σ ∏ 1/‖j·row_u(M)‖ over 0 < |j| ≤ J.
    Fracsum(FracsumArgs),
    /// Dyadic box decomposition of the reciprocal sum.
    Profile(MatrixArgs),
    /// Heuristic multiplicative exponent from record minima.
    Omega(OmegaArgs),
    /// Coefficient identities and the sandwich property of the Selberg pair.
    SelbergCheck(SelbergArgs),
    /// Exact counts of points near the subspace.
    Count(CountArgs),
    /// Selberg brackets of a count.
    Sandwich(SandwichArgs),
    /// Hausdorff s-cost of the σ(p, q) cover.
    Cover(CoverArgs),
    /// d − (νn − 1)/(ν + 1).
    Dimbound(DimArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Part {
    A,
    Atilde,
}

#[derive(Args, Debug)]
struct MatrixArgs {
    /// `{"M": …}` matrix or subspace config.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Matrix taken from a subspace config.
    #[arg(long = "use", value_enum, default_value = "a")]
    part: Part,
    #[arg(long = "J")]
    j: Option<u64>,
    #[arg(long, default_value_t = 10)]
    digits: u32,
}

#[derive(Args, Debug)]
struct FracsumArgs {
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long = "use", value_enum, default_value = "a")]
    part: Part,
    /// One value or a comma list; three or more also fit the growth slope.
    #[arg(long = "J")]
    j: Option<String>,
    /// Sum the sign-flip majorant over the full cube instead.
    #[arg(long)]
    majorant: bool,
    #[arg(long, default_value_t = 10)]
    digits: u32,
}

#[derive(Args, Debug)]
struct OmegaArgs {
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long = "use", value_enum, default_value = "a")]
    part: Part,
    #[arg(long = "J")]
    j: Option<u64>,
    /// Print the record minima instead of the summary.
    #[arg(long)]
    records: bool,
    #[arg(long, default_value_t = 10)]
    digits: u32,
}

#[derive(Args, Debug)]
struct SelbergArgs {
    /// One value or a comma list in (0, 1/2].
    #[arg(long)]
    delta: Option<String>,
    /// One value or a comma list.
    #[arg(long = "J")]
    j: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    grid: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    A,
    N,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Screened,
    Exact,
}

#[derive(Args, Debug)]
struct CountArgs {
    /// Subspace config.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "a")]
    mode: ModeArg,
    /// q for mode A; one value or a comma list.
    #[arg(long = "q")]
    q: Option<String>,
    /// Q for mode N; one value or a comma list.
    #[arg(long = "Q")]
    big_q: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long, value_enum, default_value = "screened")]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 4)]
    digits: u32,
}

#[derive(Args, Debug)]
struct SandwichArgs {
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "a")]
    mode: ModeArg,
    #[arg(long = "q")]
    q: Option<String>,
    #[arg(long = "Q")]
    big_q: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    /// Polynomial degree; defaults to ⌈κ/δ⌉.
    #[arg(long = "J")]
    j: Option<usize>,
    #[arg(long, default_value = "4")]
    kappa: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CoverArg {
    Perq,
    Dyadic,
}

#[derive(Args, Debug)]
struct CoverArgs {
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// ψ config file; alternatively `--nu` for ψ(q) = q^{−ν}.
    #[arg(long)]
    psi: Option<PathBuf>,
    #[arg(long)]
    nu: Option<String>,
    /// Replace ψ by max(ψ(q), q^{−η}).
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    s: Option<f64>,
    /// Inclusive `lo..hi` over q (perq) or k (dyadic).
    #[arg(long)]
    range: Option<String>,
    #[arg(long, value_enum, default_value = "perq")]
    strategy: CoverArg,
}

#[derive(Args, Debug)]
struct DimArgs {
    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Core(e) if e.is_precision() => 2,
            Failure::Core(Error::BudgetExceeded { .. }) => 3,
            Failure::Core(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(s) => f.write_str(s),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn need<T>(v: Option<T>, flag: &str) -> Outcome<T> {
    v.ok_or_else(|| Failure::Input(format!("missing required flag --{flag}")))
}

fn read(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn list<T: std::str::FromStr>(text: &str, flag: &str) -> Outcome<Vec<T>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Failure::Input(format!("--{flag}: cannot parse {p:?}")))
        })
        .collect()
}

fn rational(text: &str) -> Outcome<BigRational> {
    Ok(parse_decimal(text)?)
}

fn delta_arg(text: Option<&String>) -> Outcome<BigRational> {
    let delta = rational(need(text, "delta")?)?;
    if !delta.is_positive() || delta > BigRational::new(1.into(), 2.into()) {
        return Err(Error::DeltaOutOfRange(format!("delta = {delta} must lie in (0, 1/2]")).into());
    }
    Ok(delta)
}

fn load_matrix(path: Option<&PathBuf>, part: Part) -> Outcome<RealMatrix> {
    let text = read(need(path, "matrix")?)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("invalid JSON: {e}")))?;
    if value.get("M").is_some() {
        return Ok(parse_matrix(&text)?);
    }
    let s = parse_subspace(&text)?;
    Ok(match part {
        Part::A => s.a().clone(),
        Part::Atilde => s.atilde().clone(),
    })
}

fn load_subspace(path: Option<&PathBuf>) -> Outcome<SubspaceMatrix> {
    Ok(parse_subspace(&read(need(path, "matrix")?)?)?)
}

fn sizes(mode: ModeArg, q: Option<&String>, big_q: Option<&String>) -> Outcome<Vec<u64>> {
    let text = match mode {
        ModeArg::A => need(q.or(big_q), "q")?,
        ModeArg::N => need(big_q.or(q), "Q")?,
    };
    let v: Vec<u64> = list(text, "q")?;
    if v.contains(&0) {
        return Err(Failure::Input("q and Q must be at least 1".into()));
    }
    Ok(v)
}

fn mode_of(m: ModeArg) -> Mode {
    match m {
        ModeArg::A => Mode::A,
        ModeArg::N => Mode::N,
    }
}

fn ratio_str(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn precision_cap(flag: Option<u32>) -> Outcome<u32> {
    if let Some(c) = flag {
        return Ok(c);
    }
    match std::env::var(PRECISION_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("{PRECISION_ENV}: cannot parse {v:?}"))),
        Err(_) => Ok(Precision::default().cap),
    }
}

struct Ctx {
    precision: Precision,
    budget: u64,
}

impl Ctx {
    fn sum(&self) -> SumOptions {
        SumOptions {
            precision: self.precision,
            ..SumOptions::default()
        }
    }

    fn count(&self, strategy: Strategy) -> CountOptions {
        CountOptions {
            precision: self.precision,
            budget: self.budget,
            strategy,
            ..CountOptions::default()
        }
    }
}

fn fracsum(a: &FracsumArgs, ctx: &Ctx) -> Outcome<Report> {
    let js: Vec<u64> = list(need(a.j.as_ref(), "J")?, "J")?;
    if js.contains(&0) {
        return Err(Failure::Input("--J must be at least 1".into()));
    }
    let m = load_matrix(a.matrix.as_ref(), a.part)?;
    let opts = ctx.sum();
    let mut rows = Vec::new();
    for &j in &js {
        let sum = if a.majorant {
            sign_flip_majorant(&m, j, &opts)?
        } else {
            recip_product_sum(&m, j, &opts)?
        };
        rows.push((j, sum));
    }
    let slope = if js.len() >= 3 && !a.majorant {
        Some(growth_fit(&m, &js, &opts)?.fit.slope)
    } else {
        None
    };
    let mut csv = String::from("J,sum,radius,normalized,slope\n");
    for (j, sum) in &rows {
        let _ = writeln!(
            csv,
            "{j},{},{:.3e},{:.6},{}",
            sum.to_decimal(a.digits),
            sum.radius_f64(),
            normalized_growth(sum, *j),
            slope.map_or(String::new(), |s| format!("{s:.6}"))
        );
    }
    Ok(Report::new(csv).meta("kind", if a.majorant { "majorant" } else { "reciprocal" }))
}

fn profile(a: &MatrixArgs, ctx: &Ctx) -> Outcome<Report> {
    let j = need(a.j, "J")?;
    let m = load_matrix(a.matrix.as_ref(), a.part)?;
    let p = dyadic_profile(
        &m,
        j,
        &ProfileOptions {
            sum: ctx.sum(),
            keep_members: false,
        },
    )?;
    Ok(Report::new(p.to_csv(a.digits))
        .meta("total_count", p.total_count())
        .meta("excluded", p.excluded.len())
        .meta("packing_violations", p.packing_violations()?.len())
        .meta("box_index_violations", p.box_index_violations()?.len()))
}

fn omega(a: &OmegaArgs, ctx: &Ctx) -> Outcome<Report> {
    let j = need(a.j, "J")?;
    let m = load_matrix(a.matrix.as_ref(), a.part)?;
    let e = estimate_omega(&m, j, ctx.precision)?;
    let csv = if a.records {
        records_csv(&e.records, a.digits)
    } else {
        format!(
            "omega_hat,records_used,max_residual\n{:.6},{},{:.6}\n",
            e.omega_hat, e.records_used, e.max_residual
        )
    };
    Ok(Report::new(csv).meta("heuristic", true))
}

fn selberg_check(a: &SelbergArgs) -> Outcome<Report> {
    let deltas: Vec<f64> = list(need(a.delta.as_ref(), "delta")?, "delta")?;
    let js: Vec<usize> = list(need(a.j.as_ref(), "J")?, "J")?;
    let mut csv =
        String::from("delta,J,b0_plus,b0_minus,coeff_pass,sandwich_pass,worst_violation,vacuous\n");
    let mut all = true;
    for &delta in &deltas {
        for &j in &js {
            let pair = selberg_pair(delta, j)?;
            let coeff =
                check_coefficients(&pair.0, 1e-12).pass && check_coefficients(&pair.1, 1e-12).pass;
            let sw = verify_sandwich(&pair, a.grid)?;
            all &= coeff && sw.pass;
            let _ = writeln!(
                csv,
                "{delta},{j},{:.12},{:.12},{coeff},{},{:.3e},{}",
                pair.0.coeff(0),
                pair.1.coeff(0),
                sw.pass,
                sw.worst_violation,
                pair.1.is_vacuous()
            );
        }
    }
    Ok(Report::new(csv).meta("all_pass", all))
}

fn count_cmd(a: &CountArgs, ctx: &Ctx) -> Outcome<Report> {
    let delta = delta_arg(a.delta.as_ref())?;
    let sizes = sizes(a.mode, a.q.as_ref(), a.big_q.as_ref())?;
    let s = load_subspace(a.matrix.as_ref())?;
    let strategy = match a.strategy {
        StrategyArg::Screened => Strategy::Screened,
        StrategyArg::Exact => Strategy::Exact,
    };
    let r = discrepancy_report(&s, &sizes, &delta, mode_of(a.mode), &ctx.count(strategy))?;
    Ok(Report::new(r.to_csv(a.digits))
        .meta("max_normalized", ratio_decimal(&r.max_normalized, a.digits)))
}

fn degree_for(delta: &BigRational, j: Option<usize>, kappa: &BigRational) -> Outcome<usize> {
    if let Some(j) = j {
        return Ok(j);
    }
    if !kappa.is_positive() {
        return Err(Failure::Input("--kappa must be positive".into()));
    }
    (kappa / delta)
        .ceil()
        .to_integer()
        .to_usize()
        .ok_or_else(|| Failure::Input("degree ⌈κ/δ⌉ is too large".into()))
}

fn sandwich_cmd(a: &SandwichArgs, ctx: &Ctx) -> Outcome<Report> {
    let delta = delta_arg(a.delta.as_ref())?;
    let kappa = rational(&a.kappa)?;
    let j = degree_for(&delta, a.j, &kappa)?;
    let sizes = sizes(a.mode, a.q.as_ref(), a.big_q.as_ref())?;
    let s = load_subspace(a.matrix.as_ref())?;
    let opts = ctx.count(Strategy::Screened);
    let rows = sizes
        .iter()
        .map(|&q| sandwich_row(&s, mode_of(a.mode), q, &delta, j, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Report::new(sandwich_csv(&rows)).meta("kappa", ratio_str(&kappa)))
}

fn range_arg(text: &str) -> Outcome<std::ops::RangeInclusive<u64>> {
    let bad = || Failure::Input(format!("--range: expected lo..hi, got {text:?}"));
    let (lo, hi) = text.split_once("..").ok_or_else(bad)?;
    let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn cover_cmd(a: &CoverArgs, ctx: &Ctx) -> Outcome<Report> {
    let s_exp = need(a.s, "s")?;
    let range = range_arg(need(a.range.as_ref(), "range")?)?;
    let mut psi = match (&a.psi, &a.nu) {
        (Some(path), None) => parse_psi(&read(path)?)?,
        (None, Some(nu)) => ApproxFunction::power_nu(rational(nu)?)?,
        _ => return Err(Failure::Input("give exactly one of --psi and --nu".into())),
    };
    if let Some(eta) = &a.eta {
        psi = ApproxFunction::truncated(psi, rational(eta)?)?;
    }
    let sub = load_subspace(a.matrix.as_ref())?;
    let strategy = match a.strategy {
        CoverArg::Perq => CoverStrategy::PerQ,
        CoverArg::Dyadic => CoverStrategy::Dyadic,
    };
    let cost = cover_cost(
        &sub,
        &psi,
        s_exp,
        range,
        strategy,
        &ctx.count(Strategy::Screened),
    )?;
    Ok(Report::new(cost.to_csv())
        .meta("C", ratio_str(&subspace_constant_c(&sub)))
        .meta("strategy", strategy.name())
        .meta("q0", cost.q0)
        .meta("partial_sum", format!("{:.6e}", cost.partial_sum)))
}

fn dimbound(a: &DimArgs) -> Outcome<Report> {
    let nu = rational(need(a.nu.as_ref(), "nu")?)?;
    let n = need(a.n, "n")?;
    let d = need(a.d, "d")?;
    let b = dimension_bound(&nu, n, d)?;
    let csv = format!(
        "n,d,nu,bound,bound_exact\n{n},{d},{},{},{}\n",
        ratio_str(&nu),
        ratio_decimal(&b, 10),
        ratio_str(&b)
    );
    Ok(Report::new(csv))
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Fracsum(_) => "fracsum",
        Command::Profile(_) => "profile",
        Command::Omega(_) => "omega",
        Command::SelbergCheck(_) => "selberg-check",
        Command::Count(_) => "count",
        Command::Sandwich(_) => "sandwich",
        Command::Cover(_) => "cover",
        Command::Dimbound(_) => "dimbound",
    }
}

fn run(cli: &Cli) -> Outcome<String> {
    let cap = precision_cap(cli.precision_cap)?;
    let start = Precision::default().start.min(cap);
    if cap < 64 {
        return Err(Failure::Input(
            "precision cap must be at least 64 bits".into(),
        ));
    }
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Input("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Input(format!("thread pool: {e}")))?;
    }
    let ctx = Ctx {
        precision: Precision::new(start, cap),
        budget: cli.budget,
    };
    if cli.selftest {
        let (text, ok) = selftest::run(name(&cli.command));
        return if ok {
            Ok(text)
        } else {
            Err(Failure::Input(format!("{text}selftest failed")))
        };
    }
    let report = match &cli.command {
        Command::Fracsum(a) => fracsum(a, &ctx)?,
        Command::Profile(a) => profile(a, &ctx)?,
        Command::Omega(a) => omega(a, &ctx)?,
        Command::SelbergCheck(a) => selberg_check(a)?,
        Command::Count(a) => count_cmd(a, &ctx)?,
        Command::Sandwich(a) => sandwich_cmd(a, &ctx)?,
        Command::Cover(a) => cover_cmd(a, &ctx)?,
        Command::Dimbound(a) => dimbound(a)?,
    };
    let report = report
        .meta("version", env!("CARGO_PKG_VERSION"))
        .meta("subcommand", name(&cli.command))
        .meta("precision_start", ctx.precision.start)
        .meta("precision_cap", ctx.precision.cap);
    Ok(report.render(cli.format))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
