use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tempseg::{
    cmd_eval, cmd_fuse, cmd_synth, configure_threads, load_synth_config, CliError, CliResult,
    ExperimentSpec, PredictionSet, ReportFormat,
};
use tempseg_core::segio::config::parse_list;
use tempseg_core::segio::FusionSettings;
use tempseg_core::Method;

/// Temporal fusion of per-frame segmentation scores.
#[derive(Parser)]
#[command(name = "tempseg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic sequence with ground-truth masks.
    Synth {
        /// Synth config file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fuse a sequence and write one label map per frame.
    Fuse {
        #[arg(long)]
        manifest: PathBuf,
        /// baseline, image_buffer or attention
        #[arg(long)]
        method: Method,
        /// Fusion config file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        report_format: String,
        #[command(flatten)]
        overrides: FusionFlags,
    },
    /// Score fused label maps against the manifest's masks.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        /// NAME=DIR, repeatable.
        #[arg(long = "pred", required = true)]
        preds: Vec<String>,
        /// Category name or index; defaults to the first target category.
        #[arg(long)]
        category: Option<String>,
        /// Directory for the per-method CSVs.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct FusionFlags {
    /// Comma-separated weights, newest frame first.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    buffer_size: Option<usize>,
    /// Comma-separated target category names.
    #[arg(long)]
    targets: Option<String>,
}

impl FusionFlags {
    fn into_settings(self) -> CliResult<FusionSettings> {
        let weights = match self.weights {
            Some(w) => Some(parse_list("weights", &w).map_err(tempseg_core::Error::from)?),
            None => None,
        };
        Ok(FusionSettings {
            buffer_size: self.buffer_size,
            weights,
            threshold: self.threshold,
            targets: self
                .targets
                .map(|t| t.split(',').map(|s| s.trim().to_string()).collect()),
        })
    }
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads(std::env::var("TEMPSEG_THREADS").ok().as_deref())?;
    match cli.command {
        Command::Synth { config, seed, out } => {
            let config = load_synth_config(config.as_deref(), seed)?;
            let manifest = cmd_synth(&config, &out)?;
            println!("{}", manifest.display());
        }
        Command::Fuse {
            manifest,
            method,
            config,
            out,
            report_format,
            overrides,
        } => {
            let spec = ExperimentSpec {
                manifest,
                method,
                config,
                out_dir: out,
                report_format: report_format.parse::<ReportFormat>()?,
                overrides: overrides.into_settings()?,
            };
            let n = cmd_fuse(&spec)?;
            eprintln!(
                "{}: wrote {n} label maps to {}",
                spec.method,
                spec.out_dir.display()
            );
        }
        Command::Eval {
            manifest,
            preds,
            category,
            out,
        } => {
            let preds = preds
                .iter()
                .map(|p| p.parse())
                .collect::<Result<Vec<PredictionSet>, CliError>>()?;
            let result = cmd_eval(&manifest, &preds, category.as_deref(), &out)?;
            print!("{}", result.table);
            for p in &result.csv_paths {
                eprintln!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
