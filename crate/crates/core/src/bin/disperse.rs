use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};

use disperse::harness::{run_experiment, ExperimentConfig, ExperimentKind, RunOptions};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Exponents,
    Tensor,
    Solve,
    Decay,
    Contraction,
    Scaling,
    Strichartz,
    Degiorgi,
    Fundamental,
}

impl From<Command> for ExperimentKind {
    fn from(c: Command) -> Self {
        match c {
            Command::Exponents => ExperimentKind::Exponents,
            Command::Tensor => ExperimentKind::Tensor,
            Command::Solve => ExperimentKind::Solve,
            Command::Decay => ExperimentKind::Decay,
            Command::Contraction => ExperimentKind::Contraction,
            Command::Scaling => ExperimentKind::Scaling,
            Command::Strichartz => ExperimentKind::Strichartz,
            Command::Degiorgi => ExperimentKind::Degiorgi,
            Command::Fundamental => ExperimentKind::Fundamental,
        }
    }
}

/// Dispersive-estimate experiments for monomial-flux conservation laws.
///
/// Exit status: 0 when every audit passes, 2 when an audit fails, 1 on error.
#[derive(Debug, Parser)]
#[command(name = "disperse", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON configuration; the built-in setup is used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Halve all spacings this many times.
    #[arg(long, default_value_t = 0)]
    refine: u32,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed for random initial data.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write a snapshot CSV for every record time.
    #[arg(long)]
    snapshots: bool,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .context("configuring the thread pool")?;
    }
    let kind = ExperimentKind::from(cli.command);
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<ExperimentConfig>(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::builtin(kind),
    };
    cfg = cfg.refined(cli.refine);
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let report = run_experiment(kind, &cfg, RunOptions { snapshots: cli.snapshots })?;
    let paths = report.write(&cli.out)?;
    print!("{}", report.summary());
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
