use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mcprop::app::AppId;
use mcprop::bench::config::{ExperimentConfig, DEFAULT_SEED, OUT_DIR_ENV};
use mcprop::bench::{demo, report_pareto, run_experiment};
use mcprop::mc::SummaryStats;
use mcprop::metrics::{GroundTruthCache, GROUND_TRUTH_SAMPLES};
use mcprop::{Error, Result};

#[derive(Parser)]
#[command(
    name = "mcprop",
    version,
    about = "Monte Carlo and deterministic uncertainty propagation benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one application/method pair over its parameter grid.
    Run(RunArgs),
    /// Summarize run CSVs into a table and Pareto plots.
    Report {
        #[arg(required = true)]
        csvs: Vec<PathBuf>,
        #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
        out: PathBuf,
    },
    /// Estimate 2/π by dropping needles.
    Buffon {
        #[arg(short, long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Plot input density, transform and output density.
    PlotPushforward {
        #[arg(long, default_value = "convergence-challenge")]
        app: String,
        #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
        out: PathBuf,
    },
    /// Fit the simulated generators to a named target and report quality.
    PprvgFit {
        #[arg(long)]
        target: String,
        #[arg(short = 'k', long = "k", default_value_t = 8)]
        k: usize,
        #[arg(short, long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Generate (or verify) a cached ground truth.
    GroundTruth {
        #[arg(long)]
        app: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = GROUND_TRUTH_SAMPLES)]
        gt_samples: usize,
        #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// convergence-challenge, poiseuille or buffon.
    #[arg(long)]
    app: Option<String>,
    /// monte-carlo, dirac-prop, spot or grappa.
    #[arg(long)]
    method: Option<String>,
    /// Comma-separated n (or r) values.
    #[arg(long, value_delimiter = ',')]
    params: Option<Vec<u64>>,
    /// Repetitions per parameter value.
    #[arg(long)]
    reps: Option<u32>,
    /// Master seed; per-run and ground-truth seeds derive from it.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    /// Pause between repetitions, in seconds.
    #[arg(long)]
    delay_s: Option<f64>,
    /// Ground-truth sample count.
    #[arg(long)]
    gt_samples: Option<usize>,
    /// Number of response functions in the Grappa basis.
    #[arg(long)]
    grappa_k: Option<usize>,
    /// Keep ground truths in memory only.
    #[arg(long)]
    no_cache: bool,
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => {
            let app = args
                .app
                .as_deref()
                .ok_or_else(|| Error::Config("--app is required".into()))?;
            let method = args
                .method
                .as_deref()
                .ok_or_else(|| Error::Config("--method is required".into()))?;
            ExperimentConfig::new(app.parse()?, method.parse()?)
        }
    };
    if let Some(v) = args.app {
        cfg.app = v;
    }
    if let Some(v) = args.method {
        cfg.method = v;
    }
    if let Some(v) = args.params {
        cfg.params = v;
    }
    if let Some(v) = args.reps {
        cfg.repetitions = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.out {
        cfg.out = v;
    }
    if let Some(v) = args.delay_s {
        cfg.delay_s = v;
    }
    if let Some(v) = args.gt_samples {
        cfg.gt_samples = v;
    }
    if let Some(v) = args.grappa_k {
        cfg.grappa_k = v;
    }
    let exp = cfg.validate()?;
    let cache = (!args.no_cache).then(|| GroundTruthCache::new(exp.out.join("ground-truth")));
    let out = run_experiment(&exp, cache.as_ref())?;
    let series = mcprop::bench::report::build_series(&out.records)?;
    print!("{}", mcprop::bench::report::table(&series));
    println!("records: {}", out.csv_path.display());
    for p in &out.representations {
        println!("representation: {}", p.display());
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Report { csvs, out } => {
            let r = report_pareto(&csvs, &out)?;
            print!("{}", r.table);
            for t in &r.trends {
                println!("{t}");
            }
            for p in &r.svgs {
                println!("plot: {}", p.display());
            }
            Ok(())
        }
        Command::Buffon { n, seed } => {
            let r = demo::buffon(n, seed)?;
            println!(
                "n = {}  estimate = {:.6}  2/pi = {:.6}  error = {:+.6}  (3 sigma = {:.6})",
                r.n,
                r.estimate,
                std::f64::consts::FRAC_2_PI,
                r.error,
                r.tolerance
            );
            Ok(())
        }
        Command::PlotPushforward { app, out } => {
            let app: AppId = app.parse()?;
            std::fs::create_dir_all(&out)?;
            let path = out.join(format!("pushforward-{app}.svg"));
            std::fs::write(&path, demo::pushforward_svg(app)?)?;
            println!("plot: {}", path.display());
            Ok(())
        }
        Command::PprvgFit { target, k, n, seed } => {
            let r = demo::pprvg_fit(&target, k, n, seed)?;
            println!("target: {}  K = {}  n = {}", r.target, r.k, r.n);
            println!("grappa residual (L2 on grid): {:.3e}", r.residual);
            println!("grappa monotonicity defect:   {:.3e}", r.monotonicity_defect);
            println!("grappa W1:                    {:.6}", r.grappa_w1);
            match r.spot_w1 {
                Some(w) => println!("spot W1:                      {w:.6}"),
                None => println!("spot W1:                      n/a (target is not Gaussian)"),
            }
            println!("sampling noise floor W1:      {:.6}", r.noise_floor_w1);
            Ok(())
        }
        Command::GroundTruth {
            app,
            seed,
            gt_samples,
            out,
        } => {
            let app: AppId = app.parse()?;
            let cache = GroundTruthCache::new(out.join("ground-truth"));
            let gt = cache.get(app, seed, gt_samples)?;
            let stats = SummaryStats::from_values(gt.values())?;
            println!("{}", cache.path(app, seed, gt_samples).display());
            println!(
                "n = {}  mean = {:.6}  std-dev = {:.6}",
                gt.len(),
                stats.mean,
                stats.std_dev()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
