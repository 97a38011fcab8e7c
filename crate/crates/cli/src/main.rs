//! `bsclab`: seeded experiments over the core library, written as JSON or
//! CSV reports. The exit status is 0 exactly when every check passes.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use bsclab::report::{Format, ReportDocument};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "bsclab",
    version,
    about = "Noisy-channel compression and energy experiments"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Base seed; trial i uses seed + i.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Report file; only the summary is printed when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Worker threads for trial fan-out.
    #[arg(long, global = true, env = "BSCLAB_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Json => Format::Json,
            OutputFormat::Csv => Format::Csv,
        }
    }
}

/// Chunk parameter overrides shared by the compressor subcommands.
#[derive(Args, Debug, Clone, Default)]
pub struct ChunkFlags {
    /// Chunk depth γ (even).
    #[arg(long)]
    pub gamma: Option<usize>,
    /// Error budget θ of full-size chunks.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Normalizer t of the high-error branch.
    #[arg(long = "t-cap")]
    pub t_cap: Option<f64>,
    /// Noise level at and above which rounds are sent directly.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkMode {
    Brw,
    Ubrw,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compress seeded protocols over a sweep of ε and T.
    Compress {
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        epsilon: Vec<f64>,
        /// Protocol lengths T.
        #[arg(long, value_delimiter = ',', default_value = "40")]
        rounds: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Protocol file; a seeded binary-input protocol when absent.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[command(flatten)]
        chunk: ChunkFlags,
    },
    /// Exact and sampled chunk laws, compared.
    ChunkVerify {
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 20)]
        gamma: usize,
        #[arg(long)]
        theta: Option<f64>,
        /// Normalizer t; the smallest admissible value when absent.
        #[arg(long = "t-cap")]
        t_cap: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 50_000)]
        samples: u64,
    },
    /// Biased or unbiased random walks.
    Walk {
        #[arg(long, value_enum, default_value_t = WalkMode::Brw)]
        mode: WalkMode,
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
    /// Bits sampled against a shared prior on a (p, q) grid.
    SamplePrior {
        /// Target probabilities, paired with --q.
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.25,0.01,0.6,0.05")]
        p: Vec<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.2,0.25,0.002,0.25,0.005"
        )]
        q: Vec<f64>,
        /// Grid resolution n_i.
        #[arg(long = "grid-n", default_value_t = 512)]
        grid_n: u64,
        #[arg(long, default_value_t = 50_000)]
        samples: u64,
    },
    /// External information cost of a protocol file.
    Icost {
        #[arg(long)]
        spec: PathBuf,
        /// `uniform` or a comma-separated row-major table of weights.
        #[arg(long, default_value = "uniform")]
        mu: String,
    },
    /// Both constructions relating energy to information cost.
    Equiv {
        /// Variable-noise protocol; a seeded random one when absent.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value = "uniform")]
        mu: String,
        /// Grid resolution n of the simulating protocol.
        #[arg(long = "grid-n", default_value_t = 256)]
        grid_n: u64,
        #[arg(long, default_value_t = 50_000)]
        samples: u64,
    },
    /// The acceptance battery.
    Suite {
        /// Fraction of the full sample sizes.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Criteria to run; all when absent.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

fn run(cli: Cli) -> Result<ReportDocument> {
    let c = &cli.common;
    match cli.command {
        Command::Compress {
            epsilon,
            rounds,
            trials,
            spec,
            chunk,
        } => commands::compress(c, &epsilon, &rounds, trials, spec.as_deref(), &chunk),
        Command::ChunkVerify {
            epsilon,
            gamma,
            theta,
            t_cap,
            beta,
            samples,
        } => commands::chunk_verify(c, epsilon, gamma, theta, t_cap, beta, samples),
        Command::Walk { mode, a, b, trials } => commands::walk(c, mode, a, b, trials),
        Command::SamplePrior {
            p,
            q,
            grid_n,
            samples,
        } => commands::sample_prior(c, &p, &q, grid_n, samples),
        Command::Icost { spec, mu } => commands::icost(&spec, &mu),
        Command::Equiv {
            spec,
            mu,
            grid_n,
            samples,
        } => commands::equiv(c, spec.as_deref(), &mu, grid_n, samples),
        Command::Suite { scale, only } => commands::suite(c, scale, &only),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("warning: worker pool not configured: {e}");
        }
    }
    let out = cli.common.out.clone();
    let format = cli.common.format;
    let start = Instant::now();
    let result = run(cli).and_then(|mut doc| {
        doc.wall_clock_seconds = start.elapsed().as_secs_f64();
        if let Some(path) = &out {
            doc.emit(path, format.into())
                .with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(doc)
    });
    match result {
        Ok(doc) => {
            commands::print_summary(&doc);
            if doc.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
