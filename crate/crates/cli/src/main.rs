use std::fmt;
use std::fs;
use std::io;
use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand};

use apriesz_core::Error;

mod commands;
mod config;
mod output;

use config::{ExperimentConfig, MethodChoice, StrategyChoice};
use output::OutputDir;

#[derive(Parser)]
#[command(name = "apriesz", version, about = "Generalized Riesz products and flatness experiments")]
struct Cli {
    /// TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "APRIESZ_THREADS")]
    threads: Option<usize>,
    /// Result directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Integration method: auto, tensor or monte-carlo.
    #[arg(long, global = true, value_parser = ["auto", "tensor", "monte-carlo"])]
    method: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact unit-mass, Riesz-property and σ̂-monotonicity checks.
    RieszCheck {
        #[arg(long)]
        stages: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        indices: Option<Vec<usize>>,
    },
    /// Subsequence scan of ∫∏|P_{n_j}|.
    BourgainScan {
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long, value_parser = ["greedy", "fixed-stride"])]
        strategy: Option<String>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        start: Option<usize>,
        #[arg(long)]
        stride: Option<usize>,
    },
    /// Σ sqrt(1 - ‖P_k‖₁²) over the stages.
    Guenais {
        #[arg(long)]
        stages: Option<usize>,
    },
    /// ∫Q|P_m| against ∫Q·∫|P_m|.
    Fejer {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        indices: Option<Vec<usize>>,
    },
    /// Normalized sums of independent characters against the complex Gaussian.
    KacClt {
        #[arg(long)]
        q: Option<usize>,
    },
    /// Exact joint cosine moments.
    KacMoments {
        #[arg(long, value_delimiter = ',')]
        l: Option<Vec<u32>>,
    },
    /// Flatness ratio and ultraflat deviation of the configured family.
    Flatness,
    /// Local distortion against global mean along the Prikhod'ko schedule.
    Prikhodko {
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<u64>>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
    },
    /// Degree and height inequalities of the stages.
    DegreeReport {
        #[arg(long, value_delimiter = ',')]
        indices: Option<Vec<usize>>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::RieszCheck { .. } => "riesz-check",
            Command::BourgainScan { .. } => "bourgain-scan",
            Command::Guenais { .. } => "guenais",
            Command::Fejer { .. } => "fejer",
            Command::KacClt { .. } => "kac-clt",
            Command::KacMoments { .. } => "kac-moments",
            Command::Flatness => "flatness",
            Command::Prikhodko { .. } => "prikhodko",
            Command::DegreeReport { .. } => "degree-report",
        }
    }

    /// Folds flag overrides into the config so the resolved config replays
    /// the run on its own.
    fn apply(&self, cfg: &mut ExperimentConfig) {
        let a = &mut cfg.analysis;
        match self {
            Command::RieszCheck { stages, indices } => {
                set(&mut a.stages, stages.map(Some));
                set(&mut a.indices, indices.clone());
            }
            Command::BourgainScan { k_max, strategy, window, start, stride } => {
                set(&mut a.k_max, *k_max);
                set(
                    &mut a.strategy,
                    strategy.as_deref().map(|s| match s {
                        "fixed-stride" => StrategyChoice::FixedStride,
                        _ => StrategyChoice::Greedy,
                    }),
                );
                set(&mut a.window, *window);
                set(&mut a.start, *start);
                set(&mut a.stride, *stride);
            }
            Command::Guenais { stages } => set(&mut a.stages, stages.map(Some)),
            Command::Fejer { m, indices } => {
                set(&mut a.m, m.map(Some));
                set(&mut a.indices, indices.clone());
            }
            Command::KacClt { q } => set(&mut a.q, *q),
            Command::KacMoments { l } => set(&mut a.l, l.clone()),
            Command::Flatness => {}
            Command::Prikhodko { sizes, a: lo, b: hi } => {
                set(&mut a.sizes, sizes.clone());
                set(&mut a.a, *lo);
                set(&mut a.b, *hi);
            }
            Command::DegreeReport { indices } => set(&mut a.indices, indices.clone()),
        }
    }

    fn run(&self, cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), Failure> {
        match self {
            Command::RieszCheck { .. } => commands::riesz_check(cfg, out),
            Command::BourgainScan { .. } => commands::bourgain(cfg, out),
            Command::Guenais { .. } => commands::guenais(cfg, out),
            Command::Fejer { .. } => commands::fejer(cfg, out),
            Command::KacClt { .. } => commands::kac_clt(cfg, out),
            Command::KacMoments { .. } => commands::kac_moments(cfg, out),
            Command::Flatness => commands::flatness(cfg, out),
            Command::Prikhodko { .. } => commands::prikhodko(cfg, out),
            Command::DegreeReport { .. } => commands::degrees(cfg, out),
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Debug)]
pub enum Failure {
    Core(Error, Option<String>),
    Io(io::Error),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Core(e, _) => match e {
                Error::SupportCap { .. } | Error::Budget(_) | Error::TensorDimension { .. } | Error::ExponentOverflow => 3,
                Error::Integration(_) | Error::Inconsistency(_) | Error::NonFinite => 4,
                _ => 2,
            },
            Failure::Io(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Core(e, Some(ctx)) => write!(f, "{ctx}: {e}"),
            Failure::Core(e, None) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e, None)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Failure::Core(Error::Config(format!("cannot read {}: {e}", path.display())), None)
            })?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    cfg.resolve_seed(cli.seed);
    set(&mut cfg.analysis.samples, cli.samples);
    set(
        &mut cfg.analysis.method,
        cli.method.as_deref().map(|m| match m {
            "tensor" => MethodChoice::Tensor,
            "monte-carlo" => MethodChoice::MonteCarlo,
            _ => MethodChoice::Auto,
        }),
    );
    if let Some(out) = &cli.out {
        cfg.output.dir = out.display().to_string();
    }
    cli.command.apply(&mut cfg);
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let cfg = load_config(cli)?;
    let resolved = cfg.to_toml()?;
    let mut out = OutputDir::create(PathBuf::from(&cfg.output.dir).as_path())?;
    let name = cli.command.name();
    cli.command.run(&cfg, &mut out)?;
    out.write_bytes("config.resolved.toml", resolved.as_bytes())?;
    out.write_manifest(name, &resolved, cfg.seed(), rayon::current_num_threads())?;
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("apriesz {}: {e}", cli.command.name());
        process::exit(e.exit_code());
    }
}
