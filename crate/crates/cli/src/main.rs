use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use degen_bernstein::combinatorics::{degenerate_exp_series, StirlingKind, StirlingTable};
use degen_bernstein::families::{Family, FamilyContext, FamilyQuery};
use degen_bernstein::monte_carlo::{mc_degenerate_moment, mc_sum_moment, McConfig, McEstimate, DEFAULT_SAMPLES};
use degen_bernstein::random_variable::parse_law;
use degen_bernstein::verify::{Perturbation, TheoremId, Verifier, VerifyOptions};
use degen_bernstein::{Law, RandomVariable, Rational, TruncatedSeries};

const DEFAULT_LAWS: [&str; 5] = ["det:1", "bernoulli:p=1/3", "binomial:m=3,p=1/2", "poisson:a=2", "discrete:0:1/2,2:1/2"];

/// Exact probabilistic degenerate Bernstein polynomials and related families.
///
/// Values are polynomials in x, so x is not restricted to [0, 1]; the
/// probabilistic reading of B^Y_{k,n}(x | lambda) as a mass needs x in [0, 1].
#[derive(Parser)]
#[command(name = "degen-bernstein", version)]
struct Cli {
    /// Pretty-print JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one family member exactly.
    Eval(EvalArgs),
    /// Dump a Stirling number table.
    Table(TableArgs),
    /// Dump a truncated generating function.
    Series(SeriesArgs),
    /// Certify identities on degree-exceeding grids.
    Verify(VerifyArgs),
    /// Monte Carlo estimate of a degenerate moment, compared with the exact value.
    #[command(subcommand)]
    Mc(McCommand),
}

#[derive(Args)]
struct DistArg {
    /// Distribution of Y: poisson:a=A, bernoulli:p=P, binomial:m=M,p=P, discrete:v:p,..., det:C
    #[arg(long, default_value = "det:1")]
    dist: String,
    /// Accept parameters outside the probabilistic range (formal variable).
    #[arg(long)]
    formal: bool,
}

impl DistArg {
    fn variable(&self) -> Result<RandomVariable, String> {
        make_variable(&self.dist, self.formal)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalFamily {
    #[value(alias = "prob-bernstein")]
    Bernstein,
    #[value(alias = "prob-stirling2")]
    Stirling2,
    #[value(alias = "prob-bell")]
    Bell,
    #[value(alias = "prob-bernoulli")]
    Bernoulli,
    #[value(alias = "prob-bernoulli-order")]
    BernoulliOrder,
    #[value(alias = "prob-euler")]
    Euler,
}

impl EvalFamily {
    fn family(self) -> Family {
        match self {
            EvalFamily::Bernstein => Family::ProbBernstein,
            EvalFamily::Stirling2 => Family::ProbStirling2,
            EvalFamily::Bell => Family::ProbBell,
            EvalFamily::Bernoulli => Family::ProbBernoulli,
            EvalFamily::BernoulliOrder => Family::ProbBernoulliOrder,
            EvalFamily::Euler => Family::ProbEuler,
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    family: EvalFamily,
    #[command(flatten)]
    dist: DistArg,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, value_parser = parse_rational)]
    x: Option<Rational>,
    #[arg(long, value_parser = parse_rational, default_value = "0")]
    lambda: Rational,
    /// Order of the Bernoulli family.
    #[arg(long)]
    r: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableKind {
    First,
    Second,
    DegenerateSecond,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    kind: TableKind,
    #[arg(long)]
    nmax: u32,
    /// Required for the degenerate kind.
    #[arg(long, value_parser = parse_rational)]
    lambda: Option<Rational>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesKind {
    /// E[e_lambda^Y(t)] through degenerate moments.
    Mgf,
    /// E[e_lambda^Y(t)] through the closed form of the law.
    MgfClosed,
    /// e_lambda^x(t).
    DegenerateExp,
    /// (E - 1)^k / k!.
    Stirling,
    /// exp(x (E - 1)).
    Bell,
    /// (t / (E - 1))^r E^x.
    Bernoulli,
    /// 2 / (E + 1) E^x.
    Euler,
    /// (x)_{k,lambda} t^k / k! E^(1-x).
    Bernstein,
}

#[derive(Args)]
struct SeriesArgs {
    kind: SeriesKind,
    #[command(flatten)]
    dist: DistArg,
    /// Truncation order: coefficients of t^0 through t^order.
    #[arg(long)]
    order: u32,
    #[arg(long, value_parser = parse_rational, default_value = "0")]
    lambda: Rational,
    #[arg(long, value_parser = parse_rational)]
    x: Option<Rational>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, default_value_t = 1)]
    r: u32,
    /// Report n! [t^n] instead of [t^n].
    #[arg(long)]
    egf: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum PerturbArg {
    None,
    DropLast,
    DropFirst,
}

#[derive(Args)]
struct VerifyArgs {
    /// Identity to certify, e.g. T2.10, Eq15, EulerAltSum.
    #[arg(long, conflicts_with = "all", required_unless_present = "all")]
    theorem: Option<String>,
    /// Run every identity against every applicable law.
    #[arg(long)]
    all: bool,
    /// Law of Y; repeatable with --all. Defaults to det:1 for one identity
    /// and to a fixed five-law set for --all.
    #[arg(long)]
    dist: Vec<String>,
    /// Poisson rate; selects a Poisson law.
    #[arg(long, value_parser = parse_rational, conflicts_with_all = ["dist", "p"])]
    alpha: Option<Rational>,
    /// Success probability; selects a Bernoulli law, or a binomial law with --m.
    #[arg(long, value_parser = parse_rational, conflicts_with = "dist")]
    p: Option<Rational>,
    /// Binomial trial count.
    #[arg(long, requires = "p")]
    m: Option<u32>,
    #[arg(long, default_value_t = 6)]
    nmax: u32,
    /// Apply an off-by-one corruption to the explicit formula.
    #[arg(long, value_enum, conflicts_with = "perturb_seed")]
    perturb: Option<PerturbArg>,
    /// Choose the corruption from a seed.
    #[arg(long)]
    perturb_seed: Option<u64>,
    /// Maximum number of mismatching nodes listed per report.
    #[arg(long, default_value_t = 20)]
    max_witnesses: usize,
}

#[derive(Subcommand)]
enum McCommand {
    /// E[(Y)_{n,lambda}].
    Moment(McMomentArgs),
    /// E[(Y_1 + ... + Y_k)_{m,lambda}] for independent copies of Y.
    Sum(McSumArgs),
}

#[derive(Args)]
struct McCommon {
    #[command(flatten)]
    dist: DistArg,
    #[arg(long, value_parser = parse_rational, default_value = "0")]
    lambda: Rational,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct McMomentArgs {
    #[arg(long)]
    n: u32,
    #[command(flatten)]
    common: McCommon,
}

#[derive(Args)]
struct McSumArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    m: u32,
    #[command(flatten)]
    common: McCommon,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| e.to_string())
}

fn make_variable(dist: &str, formal: bool) -> Result<RandomVariable, String> {
    let law = parse_law(dist).map_err(|e| e.to_string())?;
    let y = if formal { RandomVariable::formal(law) } else { RandomVariable::new(law) };
    y.map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Unverified,
}

type CmdResult = Result<String, (Option<String>, Failure)>;

fn usage<E: ToString>(e: E) -> (Option<String>, Failure) {
    (None, Failure::Usage(e.to_string()))
}

fn json<T: Serialize>(value: &T, pretty: bool) -> String {
    let out = if pretty { serde_json::to_string_pretty(value) } else { serde_json::to_string(value) };
    out.expect("report types serialize")
}

#[derive(Serialize)]
struct EvalOutput<'a> {
    value: Rational,
    family: &'static str,
    query: &'a FamilyQuery,
}

fn run_eval(args: EvalArgs, pretty: bool) -> CmdResult {
    let y = args.dist.variable().map_err(usage)?;
    let family = args.family.family();
    if let Some(k) = args.k {
        if k > args.n {
            return Err(usage(format!("k must not exceed n (k = {k}, n = {})", args.n)));
        }
    }
    let query = FamilyQuery { family, y, lambda: args.lambda, n: args.n, k: args.k, r: args.r, x: args.x };
    let value = query.evaluate().map_err(usage)?;
    Ok(json(&EvalOutput { value, family: family.name(), query: &query }, pretty))
}

#[derive(Serialize)]
struct TableEntry<'a> {
    n: u32,
    k: u32,
    value: &'a Rational,
}

#[derive(Serialize)]
struct TableOutput<'a> {
    kind: StirlingKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<&'a Rational>,
    nmax: u32,
    entries: Vec<TableEntry<'a>>,
}

fn run_table(args: TableArgs, pretty: bool) -> CmdResult {
    let kind = match args.kind {
        TableKind::First => StirlingKind::First,
        TableKind::Second => StirlingKind::Second,
        TableKind::DegenerateSecond => StirlingKind::DegenerateSecond,
    };
    if kind == StirlingKind::DegenerateSecond && args.lambda.is_none() {
        return Err(usage("the degenerate table needs --lambda"));
    }
    let table = StirlingTable::build(kind, args.nmax, args.lambda.as_ref());
    match args.format {
        Format::Json => {
            let entries = table.entries().map(|(n, k, value)| TableEntry { n, k, value }).collect();
            let out = TableOutput { kind, lambda: table.lambda(), nmax: args.nmax, entries };
            Ok(json(&out, pretty))
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["n", "k", "value"]).map_err(usage)?;
            for (n, k, value) in table.entries() {
                w.write_record([n.to_string(), k.to_string(), value.to_string()]).map_err(usage)?;
            }
            let bytes = w.into_inner().map_err(usage)?;
            let text = String::from_utf8(bytes).expect("csv output is utf-8");
            Ok(text.trim_end().to_string())
        }
    }
}

#[derive(Serialize)]
struct SeriesOutput {
    series: &'static str,
    order: u32,
    egf: bool,
    coefficients: Vec<Rational>,
}

fn run_series(args: SeriesArgs, pretty: bool) -> CmdResult {
    let y = args.dist.variable().map_err(usage)?;
    let order = args.order as usize;
    let need_x = || args.x.clone().ok_or_else(|| usage("this series needs --x"));
    let need_k = || args.k.ok_or_else(|| usage("this series needs --k"));
    let ctx = || FamilyContext::new(y.clone(), args.lambda.clone(), args.order);
    let (name, series): (&'static str, TruncatedSeries) = match args.kind {
        SeriesKind::Mgf => ("mgf", y.mgf_series(&args.lambda, order)),
        SeriesKind::MgfClosed => ("mgf-closed", y.mgf_series_closed_form(&args.lambda, order)),
        SeriesKind::DegenerateExp => ("degenerate-exp", degenerate_exp_series(&need_x()?, &args.lambda, order)),
        SeriesKind::Stirling => ("stirling", ctx().stirling_gf(need_k()?).map_err(usage)?.clone()),
        SeriesKind::Bell => ("bell", ctx().bell_gf(&need_x()?).map_err(usage)?),
        SeriesKind::Bernoulli => {
            let x = args.x.clone().unwrap_or_default();
            ("bernoulli", (*ctx().bernoulli_gf(args.r, &x).map_err(usage)?).clone())
        }
        SeriesKind::Euler => {
            let x = args.x.clone().unwrap_or_default();
            ("euler", (*ctx().euler_gf(&x).map_err(usage)?).clone())
        }
        SeriesKind::Bernstein => ("bernstein", ctx().bernstein_gf(need_k()?, &need_x()?).map_err(usage)?),
    };
    let series = series.truncate(order);
    let coefficients = if args.egf {
        (0..=order).map(|n| series.extract_egf(n).expect("within order")).collect()
    } else {
        series.into_coeffs()
    };
    Ok(json(&SeriesOutput { series: name, order: args.order, egf: args.egf, coefficients }, pretty))
}

fn verify_laws(args: &VerifyArgs) -> Result<Vec<RandomVariable>, String> {
    let rv = |law: Law| RandomVariable::new(law).map_err(|e| e.to_string());
    if let Some(alpha) = &args.alpha {
        return Ok(vec![rv(Law::Poisson { alpha: alpha.clone() })?]);
    }
    if let Some(p) = &args.p {
        let law = match args.m {
            Some(trials) => Law::Binomial { trials, p: p.clone() },
            None => Law::Bernoulli { p: p.clone() },
        };
        return Ok(vec![rv(law)?]);
    }
    let names: Vec<&str> = if !args.dist.is_empty() {
        args.dist.iter().map(String::as_str).collect()
    } else if args.all {
        DEFAULT_LAWS.to_vec()
    } else {
        vec!["det:1"]
    };
    names.into_iter().map(|d| make_variable(d, false)).collect()
}

fn run_verify(args: VerifyArgs, pretty: bool) -> CmdResult {
    let laws = verify_laws(&args).map_err(usage)?;
    let perturbation = match (args.perturb, args.perturb_seed) {
        (_, Some(seed)) => Perturbation::seeded(seed),
        (Some(PerturbArg::DropLast), _) => Perturbation::DropLast,
        (Some(PerturbArg::DropFirst), _) => Perturbation::DropFirst,
        _ => Perturbation::None,
    };
    let opts = VerifyOptions::new(args.nmax).perturbation(perturbation).max_witnesses(Some(args.max_witnesses));
    let verifier = Verifier::new();
    if args.all {
        let suite = if perturbation == Perturbation::None {
            verifier.verify_all(&laws, args.nmax, Some(args.max_witnesses)).map_err(usage)?
        } else {
            return Err(usage("--all runs unperturbed; perturb one identity at a time"));
        };
        let text = json(&suite, pretty);
        return if suite.all_pass { Ok(text) } else { Err((Some(text), Failure::Unverified)) };
    }
    let id: TheoremId = args.theorem.as_deref().unwrap_or_default().parse().map_err(usage)?;
    let spec = id.spec();
    let y = if spec.law_free { RandomVariable::one() } else { laws[0].clone() };
    if !spec.applicable_laws.contains(&y.kind()) {
        let hint = match id {
            TheoremId::T2_8 | TheoremId::T2_9 => " (use --alpha)",
            TheoremId::T2_10 => " (use --p)",
            TheoremId::T2_11 => " (use --m and --p)",
            _ => "",
        };
        return Err(usage(format!("{id} does not apply to {y}{hint}")));
    }
    let outcome = verifier.certify_with(id, &y, &opts).map_err(usage)?;
    let text = json(&outcome, pretty);
    if outcome.status == degen_bernstein::verify::Status::Fail {
        Err((Some(text), Failure::Unverified))
    } else {
        Ok(text)
    }
}

#[derive(Serialize)]
struct McOutput {
    estimate: f64,
    stderr: f64,
    exact: Rational,
    /// `null` when the estimate has zero spread and differs from the exact value.
    z: Option<f64>,
    samples: u64,
    seed: u64,
    dist: RandomVariable,
    lambda: Rational,
}

impl McOutput {
    fn new(est: McEstimate, exact: Rational, cfg: &McConfig, lambda: Rational) -> Self {
        McOutput {
            estimate: est.estimate,
            stderr: est.stderr,
            z: est.z_score(&exact),
            exact,
            samples: est.samples,
            seed: cfg.seed,
            dist: cfg.variable.clone(),
            lambda,
        }
    }
}

fn run_mc(cmd: McCommand, pretty: bool) -> CmdResult {
    let common = match &cmd {
        McCommand::Moment(a) => &a.common,
        McCommand::Sum(a) => &a.common,
    };
    let y = common.dist.variable().map_err(usage)?;
    let cfg = McConfig::new(y.clone(), common.seed).samples(common.samples);
    let lambda = common.lambda.clone();
    let out = match &cmd {
        McCommand::Moment(a) => {
            let est = mc_degenerate_moment(&cfg, a.n, &lambda).map_err(usage)?;
            McOutput::new(est, y.degenerate_moment(a.n, &lambda), &cfg, lambda)
        }
        McCommand::Sum(a) => {
            let est = mc_sum_moment(&cfg, a.k, a.m, &lambda).map_err(usage)?;
            McOutput::new(est, y.sum_degenerate_moment(a.k, a.m, &lambda), &cfg, lambda)
        }
    };
    Ok(json(&out, pretty))
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("DEGEN_BERNSTEIN_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("DEGEN_BERNSTEIN_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("error: invalid usage"));
            return ExitCode::from(2);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let pretty = cli.pretty;
    let result = match cli.command {
        Command::Eval(a) => run_eval(a, pretty),
        Command::Table(a) => run_table(a, pretty),
        Command::Series(a) => run_series(a, pretty),
        Command::Verify(a) => run_verify(a, pretty),
        Command::Mc(c) => run_mc(c, pretty),
    };
    let mut stdout = io::stdout().lock();
    match result {
        Ok(text) => {
            let _ = writeln!(stdout, "{text}");
            ExitCode::SUCCESS
        }
        Err((text, failure)) => {
            if let Some(text) = text {
                let _ = writeln!(stdout, "{text}");
            }
            match failure {
                Failure::Usage(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(2)
                }
                Failure::Unverified => {
                    eprintln!("error: verification failed");
                    ExitCode::from(1)
                }
            }
        }
    }
}
