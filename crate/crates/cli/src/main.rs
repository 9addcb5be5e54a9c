use std::path::{Path, PathBuf};
use std::process::ExitCode;

use capra::io::{instance_to_value, load_instance, load_solution, pretty, solution_to_value, Format};
use capra::oracle::{exact_cvrp, CVRP_LIMIT};
use capra::{
    generate_instance, solve_best, solve_classical, solve_new, verify_solution, ClusterParams, DemandModel, Error, Instance,
    PipelineConfig, TspBackend, Variant,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "capra", version, about = "Capacitated vehicle routing approximation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and write the solution with a run report.
    Solve {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Best)]
        algo: Algo,
        #[command(flatten)]
        opts: SolveOpts,
        /// Output file (standard output if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a random instance.
    Gen {
        /// Number of customers.
        #[arg(short, long)]
        n: usize,
        /// `uniform`, `unit:K` or `clustered:M:SPREAD`.
        #[arg(long, default_value = "uniform")]
        model: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a solution file; exits 1 on any violation.
    Verify {
        input: PathBuf,
        solution: PathBuf,
        /// Override the variant stored in the solution file.
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
    },
    /// Solve exactly by enumeration.
    Oracle {
        input: PathBuf,
        #[arg(long, default_value_t = CVRP_LIMIT)]
        max_n: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve every instance in a directory and print a cost table.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        opts: SolveOpts,
        /// Largest instance compared against the exact optimum.
        #[arg(long, default_value_t = CVRP_LIMIT)]
        max_n: usize,
    },
}

#[derive(Args, Clone)]
struct SolveOpts {
    #[arg(long, value_enum, default_value_t = VariantArg::General)]
    variant: VariantArg,
    #[arg(long, value_enum, default_value_t = Backend::Christofides)]
    tsp: Backend,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Recorded in the report; all algorithms are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Best,
    Classical,
    New,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    General,
    Unit,
    Splittable,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::General => Variant::General,
            VariantArg::Unit => Variant::Unit,
            VariantArg::Splittable => Variant::Splittable,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Christofides,
    Doubletree,
    Exact,
}

impl From<Backend> for TspBackend {
    fn from(b: Backend) -> Self {
        match b {
            Backend::Christofides => TspBackend::Christofides,
            Backend::Doubletree => TspBackend::DoubleTree,
            Backend::Exact => TspBackend::Exact,
        }
    }
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn config(opts: &SolveOpts) -> Result<PipelineConfig, Failure> {
    let defaults = ClusterParams::<f64>::default();
    let mut params = ClusterParams::new(opts.tau.unwrap_or(defaults.tau()), opts.rho.unwrap_or(defaults.rho()))?;
    if let Some(g) = opts.gamma {
        params = params.with_gamma(g)?;
    }
    Ok(PipelineConfig::default().with_params(params).with_backend(opts.tsp.into()).with_variant(opts.variant.into()))
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    load_instance(path, Format::from_path(path)).map_err(|e| Failure { code: 1, message: format!("{}: {e}", path.display()) })
}

fn emit(output: Option<&Path>, value: &Value) -> Result<(), Failure> {
    let text = pretty(value);
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_model(spec: &str) -> Result<DemandModel, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || usage(format!("invalid model `{spec}`; expected uniform, unit:K or clustered:M:SPREAD"));
    match parts.as_slice() {
        ["uniform"] => Ok(DemandModel::Uniform),
        ["unit", k] => Ok(DemandModel::Unit(k.parse().map_err(|_| bad())?)),
        ["clustered", m, spread] => {
            Ok(DemandModel::Clustered { m: m.parse().map_err(|_| bad())?, spread: spread.parse().map_err(|_| bad())? })
        }
        _ => Err(bad()),
    }
}

fn solve(inst: &Instance, algo: Algo, config: &PipelineConfig) -> Result<(capra::Solution, capra::RunReport), Failure> {
    Ok(match algo {
        Algo::Best => solve_best(inst, config)?,
        Algo::Classical => solve_classical(inst, config)?,
        Algo::New => solve_new(inst, config)?,
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { input, algo, opts, output } => {
            let config = config(&opts)?;
            let inst = read_instance(&input)?;
            let (sol, report) = solve(&inst, algo, &config)?;
            let mut value = solution_to_value(&sol, config.variant);
            let mut report = report.to_json();
            report["config"]["seed"] = json!(opts.seed);
            value["report"] = report;
            emit(output.as_deref(), &value)?;
            log::info!("{}: cost {:.6} with {} tours", inst.name(), sol.cost(), sol.len());
        }
        Command::Gen { n, model, seed, output } => {
            let generated = generate_instance::<f64>(n, parse_model(&model)?, seed)?;
            emit(output.as_deref(), &instance_to_value(&generated.instance))?;
        }
        Command::Verify { input, solution, variant } => {
            let inst = read_instance(&input)?;
            let (sol, stored) = load_solution(&inst, &solution)?;
            let variant = variant.map_or(stored, Variant::from);
            let report = verify_solution(&inst, &sol, variant);
            if !report.is_feasible() {
                for v in &report.violations {
                    eprintln!("violation: {v}");
                }
                return Err(Failure { code: 1, message: format!("{} violation(s)", report.violations.len()) });
            }
            println!("ok: cost {:.6}, ratio to lower bound {:.4}", report.recomputed_cost, report.ratio);
        }
        Command::Oracle { input, max_n, output } => {
            let inst = read_instance(&input)?;
            let sol = exact_cvrp(&inst, max_n)?;
            emit(output.as_deref(), &solution_to_value(&sol, Variant::General))?;
        }
        Command::Bench { dir, opts, max_n } => bench(&dir, &config(&opts)?, max_n)?,
    }
    Ok(())
}

struct Row {
    name: String,
    n: usize,
    lower: f64,
    opt: Option<f64>,
    classical: f64,
    new: Option<f64>,
    best: f64,
    winner: String,
}

fn bench(dir: &Path, config: &PipelineConfig, max_n: usize) -> Result<(), Failure> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "vrp" || e == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure { code: 1, message: format!("no .vrp or .json instances in {}", dir.display()) });
    }
    let bench_one = |path: &PathBuf| -> Result<Row, Failure> {
        let inst = read_instance(path)?;
        let (sol, report) = solve_best(&inst, config)?;
        let opt = if inst.n() <= max_n { Some(exact_cvrp(&inst, max_n)?.cost()) } else { None };
        Ok(Row {
            name: path.file_name().map_or_else(String::new, |s| s.to_string_lossy().into_owned()),
            n: inst.n(),
            lower: report.lower_bound,
            opt,
            classical: report.classical_cost.unwrap_or(report.final_cost),
            new: report.new_cost,
            best: sol.cost(),
            winner: report.winner.to_string(),
        })
    };
    let rows: Vec<Result<Row, Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = files.iter().map(|p| scope.spawn(move || bench_one(p))).collect();
        handles.into_iter().map(|h| h.join().expect("bench worker panicked")).collect()
    });
    println!("{:<28} {:>5} {:>12} {:>12} {:>12} {:>12} {:>12} {:>8} {:>10}", "instance", "n", "lower", "opt", "classical", "new", "best", "ratio", "winner");
    let fmt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
    for row in rows {
        let row = row?;
        let reference = row.opt.unwrap_or(row.lower);
        let ratio = if reference > 0.0 { row.best / reference } else { 1.0 };
        println!(
            "{:<28} {:>5} {:>12.3} {:>12} {:>12.3} {:>12} {:>12.3} {:>8.4} {:>10}",
            row.name,
            row.n,
            row.lower,
            fmt(row.opt),
            row.classical,
            fmt(row.new),
            row.best,
            ratio,
            row.winner
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CAPRA_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
