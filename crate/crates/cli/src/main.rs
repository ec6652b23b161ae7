use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pskk::estimator::SYMBOL_FLOOR;
use pskk::harness::{
    convergence_study, render_plot_svg, slopes_by_method, write_report_csv, GaussianMixture,
    MethodSpec, MiseConfig, ParamSource, PskkStudyParams, StudyConfig,
};
use pskk::lattice::is_prime;
use pskk::points::{read_csv, write_csv};
use pskk::{
    cbc_construct, fit_with, FitOptions, KernelParams, PointSet, PskkModel, ScheduleConfig,
};

mod value;

use value::{parse_count, AutoOr, CountList, ParamList};

#[derive(Parser, Debug)]
#[command(
    name = "pskk",
    version,
    about = "Periodic scaled Korobov kernel density estimation"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "PSKK_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a rank-1 lattice generating vector by CBC.
    Cbc(CbcArgs),
    /// Fit a model to samples.
    Fit(FitArgs),
    /// Evaluate a fitted model at points.
    Eval(EvalArgs),
    /// MISE convergence sweep against a benchmark mixture.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct CbcArgs {
    #[arg(long)]
    dim: usize,
    /// Prime number of lattice points.
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 2)]
    alpha: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Decay prior and rate slack used to resolve `auto` parameters.
#[derive(Args, Debug, Clone)]
struct ScheduleArgs {
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Cap on the automatically chosen node count.
    #[arg(long, default_value_t = 4001)]
    n_max: u64,
}

impl ScheduleArgs {
    fn config(&self, alpha: usize) -> Result<ScheduleConfig, CliError> {
        match (self.beta, self.q) {
            (Some(beta), Some(q)) => Ok(ScheduleConfig {
                alpha,
                beta,
                q,
                epsilon: self.epsilon,
                eta: self.eta,
                n_max: self.n_max,
            }),
            _ => Err(CliError::Usage(
                "'auto' parameters need the decay prior: pass --beta and --q".into(),
            )),
        }
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct SolverArgs {
    /// Smallest accepted ratio of the extreme Gram symbol moduli; 0 accepts
    /// any positive symbol.
    #[arg(long, default_value_t = SYMBOL_FLOOR)]
    symbol_floor: f64,
}

impl SolverArgs {
    fn options(&self) -> Result<FitOptions, CliError> {
        if (0.0..1.0).contains(&self.symbol_floor) {
            Ok(FitOptions {
                symbol_floor: self.symbol_floor,
            })
        } else {
            Err(CliError::Usage(format!(
                "--symbol-floor must lie in [0, 1), got {}",
                self.symbol_floor
            )))
        }
    }
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Sample CSV, one point per row.
    #[arg(long)]
    samples: PathBuf,
    #[arg(long, default_value_t = 2)]
    alpha: usize,
    /// Box half-width or `auto`.
    #[arg(long)]
    a: AutoOr<f64>,
    /// Prime node count or `auto`.
    #[arg(long)]
    n: AutoOr<u64>,
    /// Regularisation or `auto`.
    #[arg(long)]
    lambda: AutoOr<f64>,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Point CSV, one point per row.
    #[arg(long)]
    points: PathBuf,
    /// Output CSV with one density value per row; standard output when
    /// omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// gm2d, gm4d, gm5d or gm6d.
    #[arg(long)]
    example: String,
    /// Sample sizes, e.g. `1e2,1e3,1e4`.
    #[arg(long)]
    m: CountList,
    #[arg(long, value_delimiter = ',', default_value = "pskk,kde")]
    methods: Vec<String>,
    #[arg(long, default_value_t = 2)]
    alpha: usize,
    /// Half-width: a number, one value per M, or `auto`.
    #[arg(long, default_value = "auto")]
    a: ParamList<f64>,
    /// Node count: a number, one value per M, or `auto`.
    #[arg(long, default_value = "auto")]
    n: ParamList<u64>,
    /// Regularisation: a number, one value per M, or `auto`.
    #[arg(long, default_value = "auto")]
    lambda: ParamList<f64>,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Replications.
    #[arg(long, default_value_t = 20)]
    s: usize,
    /// log2 of the Sobol' grid size.
    #[arg(long, default_value_t = 16)]
    t: u32,
    /// Integration half-width for estimators without bounded support.
    #[arg(long, default_value_t = 6.0)]
    l: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo samples for the mass outside the PSKK box.
    #[arg(long, default_value = "1e6", value_parser = parse_count)]
    exterior_samples: usize,
    /// Use the plain Sobol' grid in every replication instead of a random
    /// digital shift per replication.
    #[arg(long)]
    unshifted: bool,
    /// Report CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG plot of MISE against M.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Write 0 in the runtime column so repeated runs give identical files.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug)]
enum CliError {
    /// Invalid arguments; exit code 2.
    Usage(String),
    /// Failure while running; exit code 3.
    Runtime(String),
}

impl From<pskk::Error> for CliError {
    fn from(e: pskk::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn check_alpha(alpha: usize) -> Result<(), CliError> {
    if (1..=pskk::kernel::MAX_ALPHA).contains(&alpha) {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--alpha must be in 1..={}, got {alpha}",
            pskk::kernel::MAX_ALPHA
        )))
    }
}

fn check_prime(n: u64) -> Result<(), CliError> {
    if is_prime(n) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--n {n} is not prime")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--{name} must be finite and > 0, got {v}"
        )))
    }
}

fn cmd_cbc(args: &CbcArgs) -> Result<(), CliError> {
    check_alpha(args.alpha)?;
    if args.dim == 0 {
        return Err(CliError::Usage("--dim must be >= 1".into()));
    }
    check_prime(args.n)?;
    let lattice = cbc_construct(args.dim, args.n, args.alpha)?;
    let mut out = output(args.out.as_deref())?;
    out.write_all(lattice.to_text(args.alpha).as_bytes())?;
    out.flush()?;
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> Result<(), CliError> {
    check_alpha(args.alpha)?;
    if let AutoOr::Value(a) = args.a {
        check_positive("a", a)?;
    }
    if let AutoOr::Value(n) = args.n {
        check_prime(n)?;
    }
    if let AutoOr::Value(lambda) = args.lambda {
        check_positive("lambda", lambda)?;
    }
    let options = args.solver.options()?;
    let any_auto = args.a.is_auto() || args.n.is_auto() || args.lambda.is_auto();
    let sched_cfg = if any_auto {
        Some(args.schedule.config(args.alpha)?)
    } else {
        None
    };

    let samples: PointSet = read_csv(open(&args.samples)?)?;
    let sched = match sched_cfg {
        Some(cfg) => Some(cfg.resolve(samples.len())?),
        None => None,
    };
    let pick = |v: AutoOr<f64>, auto: fn(&pskk::Schedule) -> f64| match v {
        AutoOr::Value(x) => x,
        AutoOr::Auto => auto(sched.as_ref().expect("resolved when any parameter is auto")),
    };
    let a = pick(args.a, |s| s.a);
    let lambda = pick(args.lambda, |s| s.lambda);
    let n = match args.n {
        AutoOr::Value(n) => n,
        AutoOr::Auto => sched.as_ref().expect("resolved").n,
    };

    let kp = KernelParams::new(args.alpha, a, samples.dim())?;
    let model = fit_with(&samples, &kp, n, lambda, None, &options)?;
    let mut out = create(&args.out)?;
    out.write_all(model.to_text()?.as_bytes())?;
    out.flush()?;
    println!("M = {}", samples.len());
    println!("a = {a}");
    println!("N = {n}");
    println!("lambda = {lambda:e}");
    println!("mass = {}", model.mass());
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.model)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", args.model.display())))?;
    let model = PskkModel::from_text(&text)?;
    let points = read_csv(open(&args.points)?)?;
    let values = model.evaluate_many(&points)?;
    let out = output(args.out.as_deref())?;
    write_csv(out, &PointSet::new(1, values)?)?;
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let truth =
        GaussianMixture::example(&args.example).map_err(|e| CliError::Usage(e.to_string()))?;
    let ms = &args.m.0;
    if ms.is_empty() {
        return Err(CliError::Usage("--m needs at least one sample size".into()));
    }
    if args.s < 2 {
        return Err(CliError::Usage("--s must be >= 2".into()));
    }
    check_positive("l", args.l)?;
    let mut methods = Vec::new();
    for name in &args.methods {
        match name.as_str() {
            "pskk" => {
                check_alpha(args.alpha)?;
                let params = PskkStudyParams {
                    alpha: args.alpha,
                    a: args.a.source(ms.len(), "a")?,
                    n: args.n.source(ms.len(), "n")?,
                    lambda: args.lambda.source(ms.len(), "lambda")?,
                    schedule: ScheduleConfig::default(),
                    fit: args.solver.options()?,
                };
                let auto = [
                    matches!(params.a, ParamSource::Auto),
                    matches!(params.n, ParamSource::Auto),
                    matches!(params.lambda, ParamSource::Auto),
                ];
                let schedule = if auto.iter().any(|x| *x) {
                    args.schedule.config(args.alpha)?
                } else {
                    ScheduleConfig {
                        alpha: args.alpha,
                        ..ScheduleConfig::default()
                    }
                };
                args.n.for_each_value(check_prime)?;
                args.a.for_each_value(|v| check_positive("a", v))?;
                args.lambda
                    .for_each_value(|v| check_positive("lambda", v))?;
                methods.push(MethodSpec::Pskk(PskkStudyParams { schedule, ..params }));
            }
            "kde" => methods.push(MethodSpec::Kde),
            other => {
                return Err(CliError::Usage(format!(
                    "unknown method '{other}' (expected pskk or kde)"
                )))
            }
        }
    }

    let cfg = StudyConfig {
        truth,
        ms: ms.clone(),
        methods,
        mise: MiseConfig {
            replications: args.s,
            l: args.l,
            t: args.t,
            seed: args.seed,
            exterior_samples: args.exterior_samples,
            shifted: !args.unshifted,
        },
    };
    let reports = convergence_study(&cfg)?;
    let out = output(args.out.as_deref())?;
    write_report_csv(out, &reports, !args.no_timing)?;
    for (name, slope) in slopes_by_method(&reports) {
        eprintln!("{name}: fitted slope {slope:.3}");
    }
    if let Some(path) = &args.plot {
        let title = format!("MISE vs M, {}", args.example);
        let svg = render_plot_svg(&reports, &title)?;
        let mut f = create(path)?;
        f.write_all(svg.as_bytes())?;
        f.flush()?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    match &cli.command {
        Command::Cbc(a) => cmd_cbc(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
