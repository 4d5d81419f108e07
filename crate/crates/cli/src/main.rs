//! `factor-approx`: solve the benchmark problems with factor approximants,
//! reproduce the accuracy tables and dump curve data.

mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use factor_approx::constraints::ShootingOptions;
use factor_approx::problems::{solve_problem_with, Benchmark, ProblemSpec};
use factor_approx::tables::{curve, sweep, Metric, SweepOptions, Table, TableName};
use serde_json::json;

use config::{Format, MetricArg, RunConfig};
use output::{render_solutions, render_table, SolveRecord};

const EXIT_USAGE: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "factor-approx", version, about = "Self-similar factor approximants for ODE benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build approximants and print their parameters.
    #[command(long_about = "Build approximants and print their parameters.\n\n\
        CSV columns: problem, epsilon, order, item, re, im. Items are c (prefactor scale), \
        A_i and n_i (power factors), b_j (exponential rates), theta_m (shooting parameters), \
        residual_m (condition residuals) and D (maximal defect on the diagnostic grid).\n\n\
        Exit code 3 with a JSON error record on stderr if any solve fails.")]
    Solve(RunArgs),
    /// Reproduce a published table or sweep orders and epsilons.
    #[command(long_about = "Reproduce a published table (--name table1..table5) or sweep \
        --orders x --eps for one --problem.\n\n\
        CSV columns: k, then D per epsilon; with --metric error (and for table1, table2) \
        also Delta (maximal error) and delta = Delta/D. table3 has k, D_phi, D_root. \
        Epsilon-suffixed names like D(eps=10) are used when several epsilons are present. \
        Cells that could not be computed are empty.")]
    Table(RunArgs),
    /// Pointwise defect or error on the diagnostic grid.
    #[command(long_about = "Pointwise defect or error on the diagnostic grid, for plotting.\n\n\
        CSV columns: the native variable (x, t or r), then defect_k<k> or error_k<k> per order. \
        Points where an approximant cannot be evaluated are empty.")]
    Curve(RunArgs),
    /// List the benchmark problems.
    #[command(long_about = "List the benchmark problems.\n\nCSV columns: name, variable, min_order, equation.")]
    ListProblems(OutputArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// JSON run configuration; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    output: OutputArgs,
    /// Problem name (see list-problems).
    #[arg(long)]
    problem: Option<String>,
    /// Approximation orders, comma separated.
    #[arg(long = "orders", visible_alias = "order", value_delimiter = ',')]
    orders: Option<Vec<usize>>,
    /// Values of epsilon, comma separated.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Initial value for the logistic problem.
    #[arg(long)]
    p0: Option<f64>,
    /// Table name: table1..table5.
    #[arg(long)]
    name: Option<String>,
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    /// Points in the diagnostic grid.
    #[arg(long)]
    grid_points: Option<usize>,
    /// Nonzero seeds jitter the shooting scan grid.
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance on the condition residual at an accepted root.
    #[arg(long)]
    tol: Option<f64>,
}

/// Error carrying its exit code and a JSON record for stderr.
struct Failure {
    code: u8,
    record: serde_json::Value,
}

fn usage(message: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_USAGE, record: json!({ "error": "usage", "message": message.to_string() }) }
}

fn io(message: impl std::fmt::Display) -> Failure {
    Failure { code: 1, record: json!({ "error": "io", "message": message.to_string() }) }
}

fn base_config(args: &OutputArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path).map_err(|e| usage(format!("config {}: {e}", path.display())))?,
        None => RunConfig::default(),
    };
    if let Some(f) = args.format {
        cfg.format = f;
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    Ok(cfg)
}

fn merge(args: RunArgs) -> Result<RunConfig, Failure> {
    let mut cfg = base_config(&args.output)?;
    if args.problem.is_some() {
        cfg.problem = args.problem;
    }
    if let Some(o) = args.orders {
        cfg.orders = o;
    }
    if let Some(e) = args.eps {
        cfg.epsilons = e;
    }
    if args.p0.is_some() {
        cfg.p0 = args.p0;
    }
    if args.name.is_some() {
        cfg.name = args.name;
    }
    if args.metric.is_some() {
        cfg.metric = args.metric;
    }
    if args.grid_points.is_some() {
        cfg.grid_points = args.grid_points;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.tol.is_some() {
        cfg.tol = args.tol;
    }
    Ok(cfg)
}

fn shooting(cfg: &RunConfig) -> Result<ShootingOptions, Failure> {
    let mut opts = ShootingOptions { seed: cfg.seed, ..Default::default() };
    if let Some(t) = cfg.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(usage(format!("tolerance must be positive, got {t}")));
        }
        opts.root_tol = t;
    }
    Ok(opts)
}

fn sweep_options(cfg: &RunConfig) -> Result<SweepOptions, Failure> {
    Ok(SweepOptions { grid_points: cfg.grid_points, shooting: shooting(cfg)? })
}

fn benchmark(cfg: &RunConfig) -> Result<Benchmark, Failure> {
    let name = cfg.problem.as_deref().ok_or_else(|| usage("--problem is required"))?;
    Benchmark::from_name(name).map_err(usage)
}

fn orders(cfg: &RunConfig) -> Result<&[usize], Failure> {
    if cfg.orders.is_empty() {
        return Err(usage("at least one order is required (--orders)"));
    }
    Ok(&cfg.orders)
}

fn epsilons(cfg: &RunConfig) -> Vec<f64> {
    if cfg.epsilons.is_empty() {
        vec![1.0]
    } else {
        cfg.epsilons.clone()
    }
}

fn spec(cfg: &RunConfig, b: Benchmark, eps: f64) -> Result<ProblemSpec, Failure> {
    let mut s = ProblemSpec::new(b, eps).map_err(usage)?;
    if let Some(p0) = cfg.p0 {
        s = s.with_p0(p0).map_err(usage)?;
    }
    if let Some(n) = cfg.grid_points {
        s = s.with_grid_points(n).map_err(usage)?;
    }
    Ok(s)
}

/// Output text plus any solver failures to report after it is written.
type Produced = (String, Vec<serde_json::Value>);

fn cmd_solve(cfg: &RunConfig) -> Result<Produced, Failure> {
    let b = benchmark(cfg)?;
    let ks = orders(cfg)?;
    let opts = shooting(cfg)?;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for eps in epsilons(cfg) {
        let p = spec(cfg, b, eps)?;
        for &k in ks {
            match solve_problem_with(&p, k, &opts) {
                Ok(s) => records.push(SolveRecord::new(&s)),
                Err(e) => failures.push(json!({
                    "error": "solver",
                    "problem": p.name(),
                    "order": k,
                    "epsilon": eps,
                    "p0": p.p0,
                    "message": e.to_string(),
                })),
            }
        }
    }
    let text = render_solutions(&records, cfg.format).map_err(io)?;
    Ok((text, failures))
}

fn cmd_table(cfg: &RunConfig) -> Result<Produced, Failure> {
    let opts = sweep_options(cfg)?;
    let table: Table = match &cfg.name {
        Some(name) => TableName::from_name(name).map_err(usage)?.compute(&opts),
        None => {
            let b = benchmark(cfg)?;
            let ks = orders(cfg)?;
            let eps = epsilons(cfg);
            for &e in &eps {
                spec(cfg, b, e)?;
            }
            let errors = cfg.metric == Some(MetricArg::Error);
            sweep(b, &eps, cfg.p0, ks, errors, &opts)
        }
    };
    Ok((render_table(&table, cfg.format).map_err(io)?, Vec::new()))
}

fn cmd_curve(cfg: &RunConfig) -> Result<Produced, Failure> {
    let b = benchmark(cfg)?;
    let ks = orders(cfg)?;
    let eps = epsilons(cfg);
    if eps.len() != 1 {
        return Err(usage("curve takes a single --eps"));
    }
    let p = spec(cfg, b, eps[0])?;
    let metric = match cfg.metric.unwrap_or(MetricArg::Defect) {
        MetricArg::Defect => Metric::Defect,
        MetricArg::Error => Metric::Error,
    };
    let table = curve(&p, ks, metric, &sweep_options(cfg)?).map_err(|e| Failure {
        code: EXIT_SOLVER,
        record: json!({ "error": "solver", "problem": p.name(), "epsilon": p.epsilon, "message": e.to_string() }),
    })?;
    Ok((render_table(&table, cfg.format).map_err(io)?, Vec::new()))
}

fn cmd_list(cfg: &RunConfig) -> Result<Produced, Failure> {
    let rows: Vec<(&str, &str, usize, &str)> = Benchmark::ALL
        .iter()
        .map(|&b| {
            let p = ProblemSpec::new(b, 1.0).expect("unit epsilon is valid");
            (b.name(), b.variable(), p.min_order(), b.summary())
        })
        .collect();
    let text = match cfg.format {
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|r| json!({ "name": r.0, "variable": r.1, "min_order": r.2, "equation": r.3 }))
                .collect();
            serde_json::to_string_pretty(&v).map_err(io)? + "\n"
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["name", "variable", "min_order", "equation"]).map_err(io)?;
            for r in &rows {
                w.write_record([r.0, r.1, &r.2.to_string(), r.3]).map_err(io)?;
            }
            String::from_utf8(w.into_inner().map_err(io)?).map_err(io)?
        }
        Format::Text => rows.iter().map(|r| format!("{:<18} {}\n", r.0, r.3)).collect(),
    };
    Ok((text, Vec::new()))
}

fn run(cli: Cli) -> Result<Vec<serde_json::Value>, Failure> {
    let (cfg, produce): (RunConfig, fn(&RunConfig) -> Result<Produced, Failure>) = match cli.command {
        Command::Solve(a) => (merge(a)?, cmd_solve),
        Command::Table(a) => (merge(a)?, cmd_table),
        Command::Curve(a) => (merge(a)?, cmd_curve),
        Command::ListProblems(a) => (base_config(&a)?, cmd_list),
    };
    let (text, failures) = produce(&cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| io(format!("{}: {e}", path.display())))?,
        None => std::io::stdout().write_all(text.as_bytes()).map_err(io)?,
    }
    Ok(failures)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            for f in failures {
                eprintln!("{f}");
            }
            ExitCode::from(EXIT_SOLVER)
        }
        Err(f) => {
            eprintln!("{}", f.record);
            ExitCode::from(f.code)
        }
    }
}
