//! Command-line front end of the `rspacing` library.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rspacing::check::{run_check, CheckOptions};
use rspacing::coverage::{CoverageEvaluator, CoveragePlan};
use rspacing::density::DensityModel;
use rspacing::ecdf::{sci, Ecdf};
use rspacing::estimate::{quantile_stderr, Method};
use rspacing::estimator::{build_estimate, EstimatorRequest};
use rspacing::limit::{default_truncation, LimitLawEstimate, LimitLawSpec, LimitType};
use rspacing::simulation::{simulate_kth_max_rspacing, SimulationSpec};
use rspacing::spacings::{Boundary, SpacingQuery};
use rspacing::stream::{Runner, LOW_REPLICATES};
use rspacing::tables::{run_figure, run_table, write_cells_csv, write_series_csv, TableOptions};
use rspacing::Error;

#[derive(Parser, Debug)]
#[command(
    name = "rspacing",
    version,
    about = "Maximal r-spacing distributions and sequencing coverage planning"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Master seed of every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo replicates (command-specific default).
    #[arg(long, global = true)]
    replicates: Option<usize>,
    /// Estimator tag, e.g. gamma-tail, density-integral, monte-carlo.
    #[arg(long, global = true)]
    method: Option<Method>,
    #[arg(long, global = true, value_enum, default_value_t = Output::Csv)]
    output: Output,
    /// JSON file: a density model, or a coverage plan for `plan`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum BoundaryArg {
    WithEnds,
    Interior,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::WithEnds => Boundary::WithEnds,
            BoundaryArg::Interior => Boundary::Interior,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum LawArg {
    Gumbel,
    Frechet,
    Weibull,
}

#[derive(Args, Debug)]
struct QueryArgs {
    /// Number of points.
    #[arg(long)]
    n: u64,
    /// Spacing order.
    #[arg(long, default_value_t = 1)]
    r: u32,
    /// Rank of the spacing (1 = maximum).
    #[arg(long, default_value_t = 1)]
    k: u64,
    /// Inline density JSON, e.g. '{"kind":"triangle"}'. Defaults to uniform on [0, 1].
    #[arg(long)]
    density: Option<String>,
    /// Spacing convention of the simulation.
    #[arg(long, value_enum, default_value_t = BoundaryArg::WithEnds)]
    boundary: BoundaryArg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// CDF of the k-th maximal r-spacing at given spacing values.
    Cdf {
        #[command(flatten)]
        query: QueryArgs,
        /// Spacing values (comma separated).
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
    },
    /// Quantiles of the k-th maximal r-spacing.
    Quantile {
        #[command(flatten)]
        query: QueryArgs,
        /// Probability levels (comma separated).
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.25,0.5,0.75,0.95")]
        p: Vec<f64>,
    },
    /// Direct simulation: empirical quantiles, or the full ECDF with --values.
    Simulate {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.25,0.5,0.75,0.95")]
        p: Vec<f64>,
        /// Emit every replicate value as an ECDF instead of quantiles.
        #[arg(long)]
        values: bool,
    },
    /// CDF of an extremal-type limit law of the k-th largest term.
    LimitLaw {
        /// Extremal type.
        #[arg(long, value_enum)]
        law: LawArg,
        /// Index of the Fréchet or Weibull law.
        #[arg(long)]
        a: Option<f64>,
        /// Rank of the term (1 = largest).
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Number of consecutive gaps per term.
        #[arg(long, default_value_t = 1)]
        r: u32,
        /// Evaluation points on the normalized scale (comma separated).
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        /// Number of terms kept; defaults to max(10^4, 20 r / min x).
        #[arg(long)]
        truncation: Option<usize>,
    },
    /// Minimal read count for a coverage plan given by --config.
    Plan {
        /// Also report the probability of fewer than k poorly covered regions.
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Regenerate a reference table (1-5) or figure series (1-2).
    Tables {
        /// Table number, 1-5.
        #[arg(long, conflicts_with = "figure", required_unless_present = "figure")]
        table: Option<u8>,
        /// Figure number, 1-2; emits the plotted series.
        #[arg(long)]
        figure: Option<u8>,
    },
    /// Run the invariant suite; exits 1 if any check fails.
    Check,
}

/// Input problems exit with 2, failures of a computation or check with 1.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_)
        | Error::InvalidQuery(_)
        | Error::InvalidModel(_)
        | Error::Unsorted { .. }
        | Error::NotApplicable(_)
        | Error::ExactUnstable { .. }
        | Error::Config(_)
        | Error::Json(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn runner(common: &Common) -> rspacing::Result<Runner> {
    match common.threads {
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(t) => Ok(Runner::with_threads(t)),
        None => Ok(Runner::default()),
    }
}

fn replicates(common: &Common, default: usize) -> usize {
    let r = common.replicates.unwrap_or(default);
    warn_if_low(r);
    r
}

fn warn_if_low(replicates: usize) {
    if replicates < LOW_REPLICATES {
        eprintln!("warning: low replicates ({replicates} < {LOW_REPLICATES}); Monte Carlo errors will be large");
    }
}

fn announce_seed(common: &Common) {
    eprintln!("seed: {}", common.seed);
}

fn read_config(common: &Common) -> rspacing::Result<Option<String>> {
    common
        .config
        .as_ref()
        .map(|p| {
            std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))
        })
        .transpose()
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> rspacing::Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid {what} JSON: {e}")))
}

fn density(common: &Common, query: &QueryArgs) -> rspacing::Result<DensityModel> {
    match (query.density.clone(), read_config(common)?) {
        (Some(_), Some(_)) => Err(Error::Config(
            "give the density by --density or --config, not both".into(),
        )),
        (Some(text), None) | (None, Some(text)) => parse_json(&text, "density"),
        (None, None) => Ok(DensityModel::unit_uniform()),
    }
}

fn request(
    common: &Common,
    query: &QueryArgs,
    default_reps: usize,
) -> rspacing::Result<EstimatorRequest> {
    let mut req = EstimatorRequest::new(density(common, query)?, query.n, query.r, query.k);
    req.method = common.method;
    req.boundary = query.boundary.into();
    req.seed = common.seed;
    req.replicates = default_reps;
    Ok(req)
}

fn finish_stochastic(common: &Common, req: &mut EstimatorRequest) {
    if req.method().is_stochastic() {
        req.replicates = replicates(common, req.replicates);
        announce_seed(common);
    }
}

#[derive(Serialize)]
struct CdfRow {
    x: f64,
    cdf: f64,
    stderr: Option<f64>,
    method: Method,
}

#[derive(Serialize)]
struct QuantileRow {
    level: f64,
    quantile: f64,
    stderr: Option<f64>,
    method: Method,
}

fn opt(v: Option<f64>) -> String {
    v.map(sci).unwrap_or_default()
}

fn emit<T: Serialize>(
    output: Output,
    header: &[&str],
    rows: &[T],
    cells: impl Fn(&T) -> Vec<String>,
) -> rspacing::Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match output {
        Output::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
        Output::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(header).map_err(csv_err)?;
            for row in rows {
                w.write_record(cells(row)).map_err(csv_err)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(io::Error::other(e))
}

fn run(cli: &Cli) -> rspacing::Result<ExitCode> {
    let common = &cli.common;
    let runner = runner(common)?;
    match &cli.command {
        Command::Cdf { query, x } => {
            let mut req = request(common, query, 10_000)?;
            finish_stochastic(common, &mut req);
            let est = build_estimate(&req, &runner)?;
            let rows: Vec<CdfRow> = x
                .iter()
                .map(|&x| CdfRow {
                    x,
                    cdf: est.eval(x),
                    stderr: est.stderr(x),
                    method: est.method(),
                })
                .collect();
            emit(
                common.output,
                &["x", "cdf", "stderr", "method"],
                &rows,
                |r| vec![sci(r.x), sci(r.cdf), opt(r.stderr), r.method.to_string()],
            )?;
        }
        Command::Quantile { query, p } => {
            let mut req = request(common, query, 10_000)?;
            finish_stochastic(common, &mut req);
            let est = build_estimate(&req, &runner)?;
            let rows = p
                .iter()
                .map(|&level| {
                    Ok(QuantileRow {
                        level,
                        quantile: est.quantile(level)?,
                        stderr: quantile_stderr(&est, level)?,
                        method: est.method(),
                    })
                })
                .collect::<rspacing::Result<Vec<_>>>()?;
            emit(
                common.output,
                &["level", "quantile", "stderr", "method"],
                &rows,
                |r| {
                    vec![
                        r.level.to_string(),
                        sci(r.quantile),
                        opt(r.stderr),
                        r.method.to_string(),
                    ]
                },
            )?;
        }
        Command::Simulate { query, p, values } => {
            if common.method.is_some_and(|m| m != Method::MonteCarlo) {
                return Err(Error::Config(
                    "simulate only runs the monte-carlo method".into(),
                ));
            }
            let reps = replicates(common, 10_000);
            announce_seed(common);
            let spec = SimulationSpec::new(
                SpacingQuery::new(query.n, query.r, query.k)?,
                density(common, query)?,
                query.boundary.into(),
                reps,
                common.seed,
            )?;
            let ecdf = Ecdf::from_sorted(simulate_kth_max_rspacing(&spec, &runner)?)?;
            if *values {
                match common.output {
                    Output::Csv => ecdf.write_csv(io::stdout().lock())?,
                    Output::Json => {
                        let mut out = io::stdout().lock();
                        serde_json::to_writer(&mut out, ecdf.values())?;
                        writeln!(out)?;
                    }
                }
            } else {
                let qs = ecdf.quantiles(p)?;
                let rows = p
                    .iter()
                    .zip(qs)
                    .map(|(&level, quantile)| {
                        Ok(QuantileRow {
                            level,
                            quantile,
                            stderr: Some(ecdf.quantile_stderr(level)?),
                            method: Method::MonteCarlo,
                        })
                    })
                    .collect::<rspacing::Result<Vec<_>>>()?;
                emit(
                    common.output,
                    &["level", "quantile", "stderr", "method"],
                    &rows,
                    |r| {
                        vec![
                            r.level.to_string(),
                            sci(r.quantile),
                            opt(r.stderr),
                            r.method.to_string(),
                        ]
                    },
                )?;
            }
        }
        Command::LimitLaw {
            law,
            a,
            k,
            r,
            x,
            truncation,
        } => {
            let law = match (law, a) {
                (LawArg::Gumbel, None) => LimitType::Gumbel,
                (LawArg::Gumbel, Some(_)) => {
                    return Err(Error::Config("the Gumbel law takes no --a".into()))
                }
                (LawArg::Frechet, Some(a)) => LimitType::Frechet { a: *a },
                (LawArg::Weibull, Some(a)) => LimitType::Weibull { a: *a },
                (_, None) => return Err(Error::Config("Fréchet and Weibull laws need --a".into())),
            };
            let reps = replicates(common, rspacing::limit::DEFAULT_REPLICATES);
            announce_seed(common);
            let x_min = x
                .iter()
                .copied()
                .filter(|v| *v > 0.0)
                .fold(f64::INFINITY, f64::min);
            let spec = LimitLawSpec {
                law,
                k: *k,
                r: *r,
                truncation: truncation.unwrap_or_else(|| default_truncation(*r, x_min)),
                replicates: reps,
                master_seed: common.seed,
            };
            let est = LimitLawEstimate::build(&spec, &runner)?;
            let rows: Vec<CdfRow> = x
                .iter()
                .map(|&x| CdfRow {
                    x,
                    cdf: est.cdf(x),
                    stderr: Some(est.stderr(x)),
                    method: Method::LimitProcess,
                })
                .collect();
            emit(
                common.output,
                &["x", "cdf", "stderr", "method"],
                &rows,
                |r| vec![sci(r.x), sci(r.cdf), opt(r.stderr), r.method.to_string()],
            )?;
        }
        Command::Plan { k } => {
            let text = read_config(common)?
                .ok_or_else(|| Error::Config("plan needs --config FILE".into()))?;
            let mut plan: CoveragePlan = parse_json(&text, "coverage plan")?;
            if let Some(m) = common.method {
                plan.method = Some(m);
            }
            if let Some(reps) = common.replicates {
                plan.replicates = reps;
            }
            if common.seed != 0 {
                plan.seed = common.seed;
            }
            let method = plan.resolved_method();
            if method.is_stochastic() {
                warn_if_low(plan.replicates);
                eprintln!("seed: {}", plan.seed);
            }
            let eval = CoverageEvaluator::new(&plan, 1, &runner)?;
            let req = eval.required_reads()?;
            let uncovered = if *k > 1 {
                Some(CoverageEvaluator::new(&plan, *k, &runner)?.probability(req.n_min)?)
            } else {
                None
            };
            #[derive(Serialize)]
            struct PlanRow {
                n_min: u64,
                fold: u64,
                fold_exact: f64,
                prob_at_n_min: f64,
                method: Method,
                k: usize,
                prob_fewer_than_k_uncovered: Option<f64>,
            }
            let row = PlanRow {
                n_min: req.n_min,
                fold: req.fold,
                fold_exact: req.fold_exact,
                prob_at_n_min: req.prob_at_n_min,
                method,
                k: *k,
                prob_fewer_than_k_uncovered: uncovered,
            };
            match common.output {
                Output::Json => {
                    let mut out = io::stdout().lock();
                    serde_json::to_writer_pretty(&mut out, &row)?;
                    writeln!(out)?;
                }
                Output::Csv => emit(
                    Output::Csv,
                    &[
                        "n_min",
                        "fold",
                        "fold_exact",
                        "prob_at_n_min",
                        "method",
                        "k",
                        "prob_fewer_than_k_uncovered",
                    ],
                    &[row],
                    |r| {
                        vec![
                            r.n_min.to_string(),
                            r.fold.to_string(),
                            sci(r.fold_exact),
                            sci(r.prob_at_n_min),
                            r.method.to_string(),
                            r.k.to_string(),
                            opt(r.prob_fewer_than_k_uncovered),
                        ]
                    },
                )?,
            }
        }
        Command::Tables { table, figure } => {
            if common.method.is_some() || common.config.is_some() {
                return Err(Error::Config(
                    "tables take neither --method nor --config".into(),
                ));
            }
            let mut opts = TableOptions {
                seed: common.seed,
                runner,
                ..TableOptions::default()
            };
            if let Some(reps) = common.replicates {
                opts = opts.with_replicates(replicates(common, reps));
            }
            announce_seed(common);
            let mut out = io::stdout().lock();
            match (table, figure) {
                (Some(t), _) => {
                    let cells = run_table(*t, &opts)?;
                    match common.output {
                        Output::Csv => write_cells_csv(&cells, &mut out)?,
                        Output::Json => {
                            serde_json::to_writer_pretty(&mut out, &cells)?;
                            writeln!(out)?;
                        }
                    }
                }
                (None, Some(f)) => {
                    let points = run_figure(*f, &opts)?;
                    match common.output {
                        Output::Csv => write_series_csv(&points, &mut out)?,
                        Output::Json => {
                            serde_json::to_writer_pretty(&mut out, &points)?;
                            writeln!(out)?;
                        }
                    }
                }
                (None, None) => unreachable!("clap requires --table or --figure"),
            }
        }
        Command::Check => {
            let opts = CheckOptions {
                seed: common.seed,
                replicates: replicates(common, CheckOptions::default().replicates),
                runner,
            };
            announce_seed(common);
            let report = run_check(&opts)?;
            let mut out = io::stdout().lock();
            match common.output {
                Output::Json => {
                    serde_json::to_writer_pretty(&mut out, &report)?;
                    writeln!(out)?;
                }
                Output::Csv => {
                    let mut w = csv::Writer::from_writer(&mut out);
                    w.write_record(["check", "result", "detail"])
                        .map_err(csv_err)?;
                    for item in &report.items {
                        w.write_record([
                            item.name.as_str(),
                            if item.pass { "pass" } else { "FAIL" },
                            item.detail.as_str(),
                        ])
                        .map_err(csv_err)?;
                    }
                    w.flush()?;
                }
            }
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
