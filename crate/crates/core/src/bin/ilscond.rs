use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use ilscond::cond::{kappa_2ils, kappa_componentwise, kappa_mixed, CondParams};
use ilscond::estimators::{estimate_kappa2_pce, estimate_kappa2_ssce, estimate_kappa_inf_ssce, SsceConfig};
use ilscond::experiments::{
    example3_kind, gen_example1, gen_example2, gen_example3, render_table, run_experiment, write_csv, write_json, Example,
    ExperimentConfig,
};
use ilscond::io::{read_problem, write_problem, ProblemFile};
use ilscond::structured::{
    kappa_2ils_structured, kappa_componentwise_structured, kappa_mixed_structured, StructuredParams,
};
use ilscond::{Error, Result};

#[derive(Parser)]
#[command(name = "ilscond", version, about = "Partial condition numbers for indefinite least squares problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test problem and write it as a problem file.
    Gen(GenArgs),
    /// Print the exact condition numbers of a problem file.
    Exact(FileArgs),
    /// Run the statistical estimators on a problem file.
    Estimate(EstimateArgs),
    /// Normwise estimator accuracy (example 1).
    Table1(TableArgs),
    /// Mixed and componentwise estimator accuracy (example 2).
    Table2(TableArgs),
    /// Structured against unstructured condition numbers (example 3).
    Table3(TableArgs),
    /// Structured versus unstructured ratios for one problem.
    Compare(CompareArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Example generator: 1, 2 or 3.
    #[arg(long, default_value = "1")]
    example: String,
    #[arg(long, default_value_t = 60)]
    m: usize,
    #[arg(long, default_value_t = 36)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    p: usize,
    /// Exponent with κ(A) = n^l (example 1).
    #[arg(long, default_value_t = 0.0)]
    l: f64,
    /// Target κ(A) (example 2).
    #[arg(long, default_value_t = 1e2)]
    kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path, stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FileArgs {
    file: PathBuf,
    /// Print JSON instead of aligned text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    file: FileArgs,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    /// Comma-separated exponents l (table1).
    #[arg(long, value_delimiter = ',')]
    l: Option<Vec<f64>>,
    /// Comma-separated target κ(A) values (table2).
    #[arg(long, value_delimiter = ',')]
    kappa: Option<Vec<f64>>,
    /// Comma-separated residual norms.
    #[arg(long, value_delimiter = ',')]
    rho: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// Larger problem sizes and more trials.
    #[arg(long)]
    full: bool,
    /// Write per-trial records here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct CompareArgs {
    /// Problem file with a structure kind in its header; an example 3
    /// problem is generated when absent.
    file: Option<PathBuf>,
    #[arg(long, default_value_t = 24)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn load(path: &Path) -> Result<ProblemFile> {
    read_problem(BufReader::new(File::open(path)?))
}

fn print_values(values: &[(&str, f64)], as_json: bool) -> Result<()> {
    let mut out = io::stdout().lock();
    if as_json {
        let obj: Map<String, Value> = values.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        serde_json::to_writer_pretty(&mut out, &obj)?;
        writeln!(out)?;
    } else {
        for (k, v) in values {
            writeln!(out, "{k:<24} {v:.6e}")?;
        }
    }
    Ok(())
}

fn gen(args: &GenArgs) -> Result<()> {
    let example: Example = args.example.parse()?;
    let (problem, structure) = match example {
        Example::Ex1 => (gen_example1(args.m, args.n, args.p, args.l, args.rho, args.seed)?.problem, None),
        Example::Ex2 => (gen_example2(args.m, args.n, args.p, args.kappa, args.rho, args.seed)?.problem, None),
        Example::Ex3 => (gen_example3(args.n, args.rho, args.seed)?.0.problem, Some(example3_kind())),
    };
    let file = ProblemFile { a: problem.a().clone(), b: problem.b().clone(), split: problem.split(), structure };
    match &args.out {
        Some(path) => write_problem(&file, create(path)?),
        None => write_problem(&file, io::stdout().lock()),
    }
}

fn structured_values(file: &ProblemFile) -> Result<Option<[(&'static str, f64); 3]>> {
    let Some(kind) = &file.structure else { return Ok(None) };
    let problem = file.problem()?;
    let sp = StructuredParams::structured_a(kind, &file.a, &file.b)?;
    let params = CondParams::default();
    Ok(Some([
        ("kappa_2ils_structured", kappa_2ils_structured(&problem, &params, &sp)?),
        ("kappa_mixed_structured", kappa_mixed_structured(&problem, &params, &sp)?),
        ("kappa_comp_structured", kappa_componentwise_structured(&problem, &params, &sp)?),
    ]))
}

fn exact(args: &FileArgs) -> Result<()> {
    let file = load(&args.file)?;
    let problem = file.problem()?;
    let params = CondParams::default();
    let mut values = vec![
        ("kappa_2ils", kappa_2ils(&problem, &params)?),
        ("kappa_mixed", kappa_mixed(&problem, &params)?),
        ("kappa_comp", kappa_componentwise(&problem, &params)?),
    ];
    if let Some(s) = structured_values(&file)? {
        values.extend(s);
    }
    print_values(&values, args.json)
}

fn estimate(args: &EstimateArgs) -> Result<()> {
    let problem = load(&args.file.file)?.problem()?;
    let params = CondParams::default();
    let pce = estimate_kappa2_pce(&problem, &params, args.delta, args.epsilon, args.seed)?;
    let cfg = SsceConfig { k: args.k, seed: args.seed, ..SsceConfig::default() };
    let ssce = estimate_kappa2_ssce(&problem, &params, &cfg)?;
    let inf = estimate_kappa_inf_ssce(&problem, &params, &cfg)?;
    let values = [
        ("kappa_2ils_pce", pce.value),
        ("pce_alpha1", pce.interval.alpha1),
        ("pce_alpha2", pce.interval.alpha2),
        ("pce_iterations", pce.interval.iterations as f64),
        ("kappa_2ils_ssce", ssce),
        ("kappa_mixed_ssce", inf.mixed),
        ("kappa_comp_ssce", inf.componentwise),
    ];
    print_values(&values, args.file.json)
}

fn table(mut config: ExperimentConfig, args: &TableArgs) -> Result<()> {
    if let Some(v) = args.m {
        config.m = v;
    }
    if let Some(v) = args.n {
        config.n = v;
        if config.example == Example::Ex3 {
            (config.m, config.p) = (2 * v, v);
        }
    }
    if let Some(v) = args.p {
        config.p = v;
    }
    match config.example {
        Example::Ex1 => config.kappa_grid = args.l.clone().unwrap_or(config.kappa_grid),
        Example::Ex2 => config.kappa_grid = args.kappa.clone().unwrap_or(config.kappa_grid),
        Example::Ex3 => {}
    }
    if let Some(v) = &args.rho {
        config.rho_grid = v.clone();
    }
    config.trials = args.trials.unwrap_or(config.trials);
    config.seed = args.seed;
    config.delta = args.delta.unwrap_or(config.delta);
    config.epsilon = args.epsilon.unwrap_or(config.epsilon);
    config.k = args.k.unwrap_or(config.k);
    if args.full {
        log::warn!("--full runs the larger sizes; expect minutes of runtime");
    }

    let report = run_experiment(&config)?;
    if let Some(path) = &args.out {
        let w = create(path)?;
        match args.format {
            Format::Csv => write_csv(&report.records, w)?,
            Format::Json => write_json(&report, w)?,
        }
    }
    print!("{}", render_table(&report));
    Ok(())
}

fn compare(args: &CompareArgs) -> Result<()> {
    let file = match &args.file {
        Some(path) => load(path)?,
        None => {
            let (planted, _) = gen_example3(args.n, args.rho, args.seed)?;
            let p = planted.problem;
            ProblemFile { a: p.a().clone(), b: p.b().clone(), split: p.split(), structure: Some(example3_kind()) }
        }
    };
    let Some(s) = structured_values(&file)? else {
        return Err(ilscond::Error::InvalidParameter("compare needs a structure kind in the problem header".into()));
    };
    let problem = file.problem()?;
    let params = CondParams::default();
    let plain = [kappa_2ils(&problem, &params)?, kappa_mixed(&problem, &params)?, kappa_componentwise(&problem, &params)?];
    let values = [
        ("kappa_2ils", plain[0]),
        (s[0].0, s[0].1),
        ("r_N", plain[0] / s[0].1),
        ("kappa_mixed", plain[1]),
        (s[1].0, s[1].1),
        ("r_M", plain[1] / s[1].1),
        ("kappa_comp", plain[2]),
        (s[2].0, s[2].1),
        ("r_C", plain[2] / s[2].1),
    ];
    print_values(&values, args.json)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Exact(a) => exact(a),
        Command::Estimate(a) => estimate(a),
        Command::Table1(a) => table(ExperimentConfig::table1(a.full), a),
        Command::Table2(a) => table(ExperimentConfig::table2(a.full), a),
        Command::Table3(a) => table(ExperimentConfig::table3(a.full), a),
        Command::Compare(a) => compare(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        // a closed stdout (e.g. piped into `head`) is not a failure
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
