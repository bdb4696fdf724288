use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use logloom::pipeline::{Pipeline, PipelineError, RunConfig, Stage};

#[derive(Parser)]
#[command(name = "logloom", version, about = "Label-free log anomaly detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Seed for training, clustering and window sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Mine templates and write the structured log.
    Parse(Common),
    /// Turn templates into vectors.
    Encode(Common),
    /// Build one graph per window.
    Graph(Common),
    /// Train the graph autoencoder.
    Train(Common),
    /// Embed nodes and cluster them.
    Detect(Common),
    /// Score the clustering and write the JSON report.
    Report(Common),
    /// Run every stage whose outputs are missing.
    Run {
        #[command(flatten)]
        common: Common,
        /// Rerun every stage.
        #[arg(long)]
        all: bool,
    },
}

fn pipeline(common: &Common) -> Result<Pipeline, PipelineError> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.set_seed(seed);
    }
    if let Some(out) = &common.out {
        cfg.set_out(out);
    }
    Ok(Pipeline::new(cfg))
}

fn execute(command: Command) -> Result<(), PipelineError> {
    let (common, stage) = match &command {
        Command::Parse(c) => (c, Stage::Parse),
        Command::Encode(c) => (c, Stage::Encode),
        Command::Graph(c) => (c, Stage::Graph),
        Command::Train(c) => (c, Stage::Train),
        Command::Detect(c) => (c, Stage::Detect),
        Command::Report(c) => (c, Stage::Report),
        Command::Run { common, all } => {
            for line in pipeline(common)?.run(*all)? {
                println!("{line}");
            }
            return Ok(());
        }
    };
    let summary = pipeline(common)?.run_stage(stage)?;
    println!("{stage}: {summary}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
