use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fnbound_cli::commands::{
    cmd_bound_viz, cmd_formulas, cmd_run, cmd_saliency, cmd_sweep_feature_noise,
    cmd_sweep_label_noise, cmd_sweep_sigma_delta, CommandIo,
};
use fnbound_cli::config::load_config;

/// Noise-robustness experiment harness: trains small dense networks under
/// label and feature corruption and reports accuracy sweeps, bound curves,
/// and saliency maps as CSV (plus optional SVG charts).
#[derive(Parser)]
#[command(name = "fnbound", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config (JSON)
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Output directory for report files; the FNBOUND_OUT environment
    /// variable overrides this when set
    #[arg(long, default_value = "reports", value_name = "DIR")]
    out: PathBuf,
    /// Worker threads for sweep cells
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Config override as dotted.path=json, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Also write SVG charts next to the CSV files
    #[arg(long)]
    svg: bool,
}

impl CommonArgs {
    fn io(&self) -> CommandIo {
        let out_dir = match std::env::var("FNBOUND_OUT") {
            Ok(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.out.clone(),
        };
        CommandIo { out_dir, jobs: self.jobs.max(1), svg: self.svg }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train one network as configured and write its epoch curves
    Run(CommonArgs),
    /// Sweep additive Gaussian feature-noise std against label-noise rate
    SweepSigmaDelta(CommonArgs),
    /// Sweep feature-noise kinds over the severity ladder
    SweepFeatureNoise(CommonArgs),
    /// Sweep label-noise kinds over rates, with and without feature noise
    SweepLabelNoise(CommonArgs),
    /// Train run ensembles and write per-epoch divergence and bound curves
    BoundViz(CommonArgs),
    /// Write saliency maps for chosen test samples
    Saliency {
        #[command(flatten)]
        common: CommonArgs,
        /// Test-set sample indices
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
        samples: Vec<usize>,
    },
    /// Evaluate one closed-form quantity: NAME key=value ...
    Formulas {
        /// Formula name followed by key=value parameters
        #[arg(required = true)]
        query: Vec<String>,
    },
}

fn dispatch(command: &Command) -> fnbound_core::Result<()> {
    match command {
        Command::Run(args) => cmd_run(&load_config(&args.config, &args.sets)?, &args.io()),
        Command::SweepSigmaDelta(args) => {
            cmd_sweep_sigma_delta(&load_config(&args.config, &args.sets)?, &args.io())
        }
        Command::SweepFeatureNoise(args) => {
            cmd_sweep_feature_noise(&load_config(&args.config, &args.sets)?, &args.io())
        }
        Command::SweepLabelNoise(args) => {
            cmd_sweep_label_noise(&load_config(&args.config, &args.sets)?, &args.io())
        }
        Command::BoundViz(args) => {
            cmd_bound_viz(&load_config(&args.config, &args.sets)?, &args.io())
        }
        Command::Saliency { common, samples } => {
            cmd_saliency(&load_config(&common.config, &common.sets)?, samples, &common.io())
        }
        Command::Formulas { query } => cmd_formulas(query),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_configuration() { 2 } else { 3 })
        }
    }
}
