use std::error::Error as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spectroscopy::pipeline::{self, Command, PipelineConfig, RunOptions, CONFIG_TEMPLATE};
use spectroscopy::Error;

/// Investor-strategy spectroscopy: replay order flow, account net returns,
/// benchmark against random timing and fit the scaling laws.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Pipeline configuration file.
    #[arg(long, global = true, default_value = "spectroscopy.toml")]
    config: PathBuf,
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Master seed, overriding every seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Write an annotated configuration template to --config.
    Init {
        #[arg(long)]
        force: bool,
    },
    /// Generate a synthetic corpus (orders, stocks, calendar, ground truth).
    Synth,
    /// Replay order flow into fills.
    Replay,
    /// Ledger and stylized-fact analysis of real investors.
    Analyze,
    /// Random-timing benchmark.
    Counterfactual,
    /// Fit, consistency and figure reports only.
    Report,
    /// Every stage, full bundle.
    Run,
}

fn load(cli: &Cli) -> Result<PipelineConfig, Error> {
    let mut cfg = PipelineConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let command = match cli.command {
        Sub::Init { force } => {
            if cli.config.exists() && !force {
                return Err(Error::Config(format!(
                    "{} already exists (use --force to overwrite)",
                    cli.config.display()
                )));
            }
            std::fs::write(&cli.config, CONFIG_TEMPLATE).map_err(|source| Error::File {
                path: cli.config.clone(),
                source,
            })?;
            println!("wrote {}", cli.config.display());
            return Ok(());
        }
        Sub::Synth => {
            let cfg = load(cli)?;
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("synth"));
            let files = pipeline::synth_corpus_files(&cfg, cli.workers)?;
            pipeline::write_bundle(&out, &files)?;
            println!("wrote synthetic corpus to {}", out.display());
            return Ok(());
        }
        Sub::Replay => Command::Replay,
        Sub::Analyze => Command::Analyze,
        Sub::Counterfactual => Command::Counterfactual,
        Sub::Report => Command::Report,
        Sub::Run => Command::Run,
    };
    let cfg = load(cli)?;
    let summary = pipeline::execute(
        &cfg,
        command,
        &RunOptions {
            workers: cli.workers,
        },
    )?;
    println!(
        "{}: wrote {} files to {} ({} diagnostics)",
        command.name(),
        summary.files.len(),
        summary.out_dir.display(),
        summary.diagnostics
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SPECTROSCOPY_LOG", "warn"))
        .init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = e.source();
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(if matches!(e, Error::Config(_)) { 2 } else { 1 })
        }
    }
}
