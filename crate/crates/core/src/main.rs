use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use osml_elm::cli::{self, Command, ConfigFile, RunConfig};
use osml_elm::Error;

/// Online sequential multi-label extreme learning machine.
#[derive(Debug, Parser)]
#[command(name = "osml-elm", version)]
struct Cli {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Train on a stream (initial block, then recursive block updates) and write a model file.
    Train {
        /// Training dataset.
        data: Option<PathBuf>,
        /// Optional held-out dataset to score after training.
        #[arg(long)]
        test: Option<PathBuf>,
        #[command(flatten)]
        shared: Shared,
    },
    /// Score a model file on a dataset and write `name<TAB>value` metrics.
    Eval {
        model: Option<PathBuf>,
        data: Option<PathBuf>,
        #[command(flatten)]
        shared: Shared,
    },
    /// k-fold cross-validation with per-fold normalizers and seeds.
    Cv {
        data: Option<PathBuf>,
        /// Fold file: one line of 0-based test indices per fold.
        #[arg(long)]
        fold_file: Option<PathBuf>,
        #[command(flatten)]
        shared: Shared,
    },
    /// Per-block timing of a streaming training run.
    Bench {
        data: Option<PathBuf>,
        /// Seconds between block arrivals; reports whether processing keeps up.
        #[arg(long)]
        arrival_interval: Option<f64>,
        #[command(flatten)]
        shared: Shared,
    },
}

#[derive(Debug, Args)]
struct Shared {
    /// Hidden neuron count.
    #[arg(long)]
    hidden: Option<usize>,
    /// sigmoid | sine | hardlim
    #[arg(long)]
    activation: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Ridge added to HᵀH in the initial solve.
    #[arg(long)]
    ridge: Option<f64>,
    /// Initial block size N0 (default: 2 × hidden).
    #[arg(long = "init-block")]
    init_block: Option<usize>,
    /// Stream block size.
    #[arg(long)]
    block: Option<usize>,
    /// Shuffle the stream order with this seed.
    #[arg(long)]
    shuffle_seed: Option<u64>,
    /// Number of label columns M.
    #[arg(long)]
    labels: Option<usize>,
    /// Number of features D (sparse format).
    #[arg(long)]
    features: Option<usize>,
    /// csv | sparse
    #[arg(long)]
    format: Option<String>,
    /// CSV input has a header line.
    #[arg(long)]
    header: bool,
    /// Fit feature scaling on: init | train | off
    #[arg(long)]
    norm_fit: Option<String>,
    /// Output path (model file for train, metrics file for eval).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of folds for cv.
    #[arg(long)]
    folds: Option<usize>,
    /// Recalibrate the threshold after every stream block.
    #[arg(long)]
    recalibrate: bool,
}

impl Shared {
    fn into_config(self) -> ConfigFile {
        ConfigFile {
            hidden_count: self.hidden,
            activation: self.activation,
            seed: self.seed,
            ridge: self.ridge,
            init_block_size: self.init_block,
            block_size: self.block,
            shuffle_seed: self.shuffle_seed,
            label_count: self.labels,
            feature_count: self.features,
            format: self.format,
            has_header: self.header.then_some(true),
            normalizer_fit: self.norm_fit,
            output: self.out,
            folds: self.folds,
            recalibrate_threshold: self.recalibrate.then_some(true),
            ..Default::default()
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Cmd::Train { data, test, shared } => {
            let flags = ConfigFile {
                data,
                test,
                ..shared.into_config()
            };
            let cfg = RunConfig::resolve(flags.over(file), Command::Train)?;
            print!("{}", cli::cmd_train(&cfg)?);
        }
        Cmd::Eval {
            model,
            data,
            shared,
        } => {
            let flags = ConfigFile {
                model,
                test: data,
                ..shared.into_config()
            };
            let cfg = RunConfig::resolve(flags.over(file), Command::Eval)?;
            print!("{}", cli::cmd_eval(&cfg)?.to_table());
        }
        Cmd::Cv {
            data,
            fold_file,
            shared,
        } => {
            let flags = ConfigFile {
                data,
                fold_file,
                ..shared.into_config()
            };
            let cfg = RunConfig::resolve(flags.over(file), Command::Cv)?;
            print!("{}", cli::cmd_cv(&cfg)?);
        }
        Cmd::Bench {
            data,
            arrival_interval,
            shared,
        } => {
            let flags = ConfigFile {
                data,
                arrival_interval,
                ..shared.into_config()
            };
            let cfg = RunConfig::resolve(flags.over(file), Command::Bench)?;
            print!("{}", cli::cmd_bench(&cfg)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
