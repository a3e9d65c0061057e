//! Command-line front end: population generation, single-assignment
//! intervals, and the two table experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;

use randinfer::estimators::{Estimator, Population};
use randinfer::harness::datagen::{draw_assignment, draw_reveal_order, gen_population, treated_count};
use randinfer::harness::experiment::{
    run_experiment1, run_experiment2, ExperimentConfig, TableRow,
};
use randinfer::harness::report::{rows_to_csv, rows_to_json, OutputFormat};
use randinfer::harness::{ci_for_assignment, CiReport};
use randinfer::martingale::{Budgets, McConfig};
use randinfer::rng::{derive_rng, tags};
use randinfer::stein::{mc_bias, BiasEstimate};
use randinfer::swap::SwapConfig;
use randinfer::Result;

const DEFAULT_EXHAUSTIVE_THRESHOLD: u64 = 2_000_000;
const DEFAULT_RHO: f64 = 0.3;

#[derive(Parser)]
#[command(name = "randinfer", version, about = "Finite-sample design-based inference")]
struct Cli {
    /// Output format for tables and reports.
    #[arg(long, global = true, default_value = "csv")]
    format: FormatArg,
    /// Worker threads (0 = all available).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Subtract the estimated Monte Carlo noise from the variance proxy.
    #[arg(long, global = true, default_value_t = false)]
    denoise_v: bool,
    /// Enumerate all assignments for the bias bound when the pair count is
    /// at most this threshold; sample otherwise.
    #[arg(long, global = true, default_value_t = DEFAULT_EXHAUSTIVE_THRESHOLD)]
    exhaustive_threshold: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Dim,
    Ols,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Dim => Estimator::Dim,
            EstimatorArg::Ols => Estimator::OlsRa,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic population and write it as JSON.
    Gen(GenArgs),
    /// Build a finite-sample interval for one random assignment of a stored
    /// population.
    Ci(CiArgs),
    /// Difference-in-means table across population sizes.
    Exp1(Exp1Args),
    /// Regression-adjustment table across (n, gamma) cells.
    Exp2(Exp2Args),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CiArgs {
    /// Population JSON produced by `gen`.
    #[arg(long)]
    pop: PathBuf,
    #[arg(long, value_enum)]
    estimator: EstimatorArg,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Monte Carlo budgets as B_S,B_pair,B_I,B_cond.
    #[arg(long, value_parser = parse_budgets)]
    budgets: Option<Budgets>,
    /// Enable the range upper-confidence inflation with this failure mass.
    #[arg(long)]
    ucb_eta: Option<f64>,
}

#[derive(Args)]
struct Exp1Args {
    /// Population sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
    n_list: Vec<usize>,
    /// Outer replicates.
    #[arg(long = "R", default_value_t = 5)]
    r_outer: usize,
    /// Inner assignments per replicate.
    #[arg(long = "N", default_value_t = 200)]
    n_inner: usize,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_parser = parse_budgets)]
    budgets: Option<Budgets>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Exp2Args {
    #[arg(long, value_delimiter = ',', default_value = "25")]
    n_list: Vec<usize>,
    /// Design width exponents, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,1,1.5")]
    gamma_list: Vec<f64>,
    #[arg(long = "R", default_value_t = 5)]
    r_outer: usize,
    #[arg(long = "N", default_value_t = 100)]
    n_inner: usize,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_parser = parse_budgets)]
    budgets: Option<Budgets>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_budgets(s: &str) -> std::result::Result<Budgets, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err("expected four comma-separated values B_S,B_pair,B_I,B_cond".into());
    }
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok(Budgets {
        b_s: parse(parts[0])?,
        b_pair: parse(parts[1])?,
        b_i: parse(parts[2])?,
        b_cond: parse(parts[3])?,
    })
}

/// The `ci` report plus the drawn design, with 1-based unit indices.
#[derive(serde::Serialize)]
struct CiOutput {
    estimator: &'static str,
    n: usize,
    n1: usize,
    /// 1-based treated unit indices.
    treated: Vec<usize>,
    /// 1-based reveal order.
    reveal_order: Vec<usize>,
    bias: BiasEstimate,
    report: CiReport,
}

fn run_ci(cli: &Cli, args: &CiArgs) -> Result<String> {
    let text = std::fs::read_to_string(&args.pop)?;
    let pop = Population::from_json(&text)?;
    let est: Estimator = args.estimator.into();
    let n1 = treated_count(pop.n, DEFAULT_RHO);
    let mut a_rng = derive_rng(args.seed, &[tags::ASSIGNMENT, 0]);
    let treated = draw_assignment(pop.n, n1, &mut a_rng);
    let mut o_rng = derive_rng(args.seed, &[tags::REVEAL, 0]);
    let order = draw_reveal_order(pop.n, &treated, &mut o_rng)?;
    let budgets = args.budgets.unwrap_or(Budgets::FULL);
    let mc = McConfig {
        budgets,
        denoise_v: cli.denoise_v,
        ucb: args.ucb_eta.is_some(),
        eta: args.ucb_eta.unwrap_or(0.05),
        delta_max: None,
        swap: SwapConfig::default(),
    };
    let bias = match est {
        Estimator::Dim => BiasEstimate::zero(),
        Estimator::OlsRa => {
            let stream = derive_rng(args.seed, &[tags::BIAS_ASSIGNMENT]).random::<u64>();
            mc_bias(&pop, est, n1, &budgets, cli.exhaustive_threshold, &mc.swap, stream)?
        }
    };
    let stream = derive_rng(args.seed, &[tags::CI, 0]).random::<u64>();
    let report = ci_for_assignment(&pop, est, &order, args.delta, &mc, &bias, stream)?;
    let out = CiOutput {
        estimator: match est {
            Estimator::Dim => "dim",
            Estimator::OlsRa => "ols",
        },
        n: pop.n,
        n1,
        treated: treated.iter().map(|&i| i + 1).collect(),
        reveal_order: order.permutation().iter().map(|&i| i + 1).collect(),
        bias,
        report,
    };
    match OutputFormat::from(cli.format) {
        OutputFormat::Json => rows_to_json(&out),
        OutputFormat::Csv => {
            let mut s = String::from(
                "estimator,n,n1,estimate,tau,radius,sqrt_term,range_term,bias_term,\
v_hat,r_hat,delta,covered\n",
            );
            use std::fmt::Write as _;
            let r = &out.report;
            let _ = write!(
                s,
                "{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{}\n",
                out.estimator,
                out.n,
                out.n1,
                r.estimate,
                r.tau,
                r.radius,
                r.sqrt_term,
                r.range_term,
                r.bias_term,
                r.v_hat,
                r.r_hat,
                r.delta,
                r.covered
            );
            Ok(s)
        }
    }
}

fn write_table(
    format: OutputFormat,
    rows: &[TableRow],
    out: &PathBuf,
) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => rows_to_csv(rows),
        OutputFormat::Json => rows_to_json(&rows)?,
    };
    std::fs::write(out, text)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    randinfer::par::configure_threads(cli.threads);
    match &cli.command {
        Command::Gen(args) => {
            let pop = gen_population(args.n, args.gamma, args.theta, args.seed)?;
            std::fs::write(&args.out, pop.to_json()?)?;
            eprintln!(
                "wrote population n={} p={} gamma={} -> {}",
                pop.n,
                pop.p,
                pop.gamma,
                args.out.display()
            );
        }
        Command::Ci(args) => {
            print!("{}", run_ci(cli, args)?);
        }
        Command::Exp1(args) => {
            let cfg = ExperimentConfig {
                n_list: args.n_list.clone(),
                gamma_list: vec![0.0],
                r_outer: args.r_outer,
                n_inner: args.n_inner,
                delta: args.delta,
                seed: args.seed,
                budgets: args.budgets.unwrap_or(Budgets::FULL),
                denoise_v: cli.denoise_v,
                exhaustive_threshold: cli.exhaustive_threshold,
                ..Default::default()
            };
            let rows = run_experiment1(&cfg)?;
            write_table(cli.format.into(), &rows, &args.out)?;
            eprintln!("wrote {} rows -> {}", rows.len(), args.out.display());
        }
        Command::Exp2(args) => {
            let cfg = ExperimentConfig {
                n_list: args.n_list.clone(),
                gamma_list: args.gamma_list.clone(),
                r_outer: args.r_outer,
                n_inner: args.n_inner,
                delta: args.delta,
                seed: args.seed,
                budgets: args.budgets.unwrap_or(Budgets::FULL),
                denoise_v: cli.denoise_v,
                exhaustive_threshold: cli.exhaustive_threshold,
                ..Default::default()
            };
            let cells = run_experiment2(&cfg)?;
            let rows: Vec<TableRow> = cells.iter().map(|c| c.row.clone()).collect();
            match OutputFormat::from(cli.format) {
                OutputFormat::Csv => write_table(OutputFormat::Csv, &rows, &args.out)?,
                // JSON keeps the surrogate ordering fractions alongside each row.
                OutputFormat::Json => std::fs::write(&args.out, rows_to_json(&cells)?)?,
            }
            eprintln!("wrote {} cells -> {}", cells.len(), args.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
