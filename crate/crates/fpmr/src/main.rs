use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fpmr::config::Format;
use fpmr::{emit_outputs, load_config, run_with, Error, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "fpmr", version, about = "Fokker-Planck magnetic resonance simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its outputs.
    Run {
        #[command(flatten)]
        common: Common,
        /// Double the active grids until outputs change by less than TOL.
        #[arg(long, value_name = "TOL", num_args = 0..=1, default_missing_value = "1e-3")]
        converge: Option<f64>,
    },
    /// Run the time-sliced reference simulation instead.
    Oracle {
        #[command(flatten)]
        common: Common,
    },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output formats, overriding the config.
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Vec<CliFormat>,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliFormat {
    Csv,
    Json,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        if let Some(n) = self.threads {
            // Fails only if a pool already exists, which cannot happen here.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        let mut cfg = load_config(&self.config)?;
        if let Some(out) = &self.out {
            cfg.output.directory = out.clone();
        }
        if !self.format.is_empty() {
            cfg.output.formats = self
                .format
                .iter()
                .map(|f| match f {
                    CliFormat::Csv => Format::Csv,
                    CliFormat::Json => Format::Json,
                })
                .collect();
        }
        cfg.output.plot |= self.plot;
        Ok(cfg)
    }
}

fn execute(common: &Common, opts: RunOptions) -> Result<(), Error> {
    let cfg = common.load()?;
    let mut result = run_with(&cfg, &opts)?;
    result.report.outputs = emit_outputs(&result.tables, &cfg.output)?;
    println!("{}", serde_json::to_string_pretty(&result.report).expect("reports serialise"));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { common, converge } => execute(
            common,
            RunOptions {
                converge: *converge,
                oracle: false,
            },
        ),
        Command::Oracle { common } => execute(
            common,
            RunOptions {
                converge: None,
                oracle: true,
            },
        ),
        Command::Validate { config } => load_config(config).map(|cfg| {
            println!("{} config is valid", cfg.experiment.kind());
        }),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
