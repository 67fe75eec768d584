use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use mirlab_cli::commands::{
    cmd_compare, cmd_generate, cmd_report, cmd_train, CliError, ExperimentConfig,
};
use mirlab_cli::artifacts;

/// MIR cut separation experiments: generate instance families, train a
/// constraint classifier, and compare the full and reduced separators.
#[derive(Parser)]
#[command(name = "mirlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Output directory for artifacts.
    #[arg(long, env = "MIRLAB_OUT")]
    out: PathBuf,
    /// Root seed recorded in every artifact.
    #[arg(long, default_value_t = 0, env = "MIRLAB_SEED")]
    seed: u64,
    /// Time limit per separation solve, in seconds.
    #[arg(long, default_value_t = 600, env = "MIRLAB_SEP_TIME_LIMIT")]
    sep_time_limit: u64,
    /// Time limit per cutting loop, in seconds.
    #[arg(long, default_value_t = 3 * 3600, env = "MIRLAB_LOOP_TIME_LIMIT")]
    loop_time_limit: u64,
    /// Maximum separation rounds per loop.
    #[arg(long, default_value_t = 1_000_000, env = "MIRLAB_MAX_ROUNDS")]
    max_rounds: usize,
    /// Node limit per separation solve.
    #[arg(long, default_value_t = 200_000, env = "MIRLAB_SEP_NODE_LIMIT")]
    sep_node_limit: u64,
    /// Binary-expansion bits in the separation objective.
    #[arg(long, default_value_t = 6, env = "MIRLAB_EPS_BITS")]
    eps_bits: usize,
    /// Worker threads for per-variation parallelism.
    #[arg(long, default_value_t = 1, env = "MIRLAB_WORKERS")]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a perturbed family and run the full separator on it.
    Generate {
        /// Base instance in MPS format.
        #[arg(long, env = "MIRLAB_BASE")]
        base: PathBuf,
        /// Number of variations with distinct LP optima.
        #[arg(long, default_value_t = 20, env = "MIRLAB_FAMILY_SIZE")]
        family_size: usize,
        /// Keep threshold on final gap closed, in percent.
        #[arg(long, default_value_t = 5.0, env = "MIRLAB_MIN_GAP")]
        min_gap: f64,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Train the gradient-boosted row classifier on a dataset.
    Train {
        /// Dataset CSV produced by generate.
        #[arg(long)]
        dataset: PathBuf,
        /// Fraction of variations on the training side.
        #[arg(long, default_value_t = 0.8, env = "MIRLAB_SPLIT")]
        split: f64,
        /// Boosting rounds.
        #[arg(long, default_value_t = 100)]
        trees: usize,
        /// Maximum tree depth.
        #[arg(long, default_value_t = 5)]
        depth: usize,
        /// Shrinkage per boosting round.
        #[arg(long, default_value_t = 0.1)]
        learning_rate: f64,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run full and reduced separators over a family and log both.
    Compare {
        /// Family manifest from generate.
        #[arg(long)]
        manifest: PathBuf,
        /// Model file from train.
        #[arg(long)]
        model: PathBuf,
        /// Split file from train.
        #[arg(long)]
        split_file: PathBuf,
        /// Classifier probability threshold.
        #[arg(long, default_value_t = 0.5, env = "MIRLAB_THRESHOLD")]
        threshold: f64,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Aggregate a comparison into figure-ready per-round statistics.
    Report {
        /// Comparison CSV from compare.
        #[arg(long)]
        compare: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn experiment_config(common: &CommonOpts) -> ExperimentConfig {
    ExperimentConfig {
        out_dir: common.out.clone(),
        seed: common.seed,
        sep_time_limit: Duration::from_secs(common.sep_time_limit),
        loop_time_limit: Duration::from_secs(common.loop_time_limit),
        max_rounds: common.max_rounds,
        sep_node_limit: common.sep_node_limit,
        eps_bits: common.eps_bits,
        workers: common.workers,
        ..ExperimentConfig::default()
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate {
            base,
            family_size,
            min_gap,
            common,
        } => {
            let config = ExperimentConfig {
                base_path: base,
                family_size,
                min_gap_pct: min_gap,
                ..experiment_config(&common)
            };
            let out = cmd_generate(&config)?;
            println!(
                "generated {} kept / {} discarded / {} failed variations",
                out.kept, out.discarded, out.failed
            );
            println!("manifest: {}", out.manifest_path.display());
            println!("traces:   {}", out.traces_path.display());
            println!("dataset:  {}", out.dataset_path.display());
        }
        Command::Train {
            dataset,
            split,
            trees,
            depth,
            learning_rate,
            common,
        } => {
            let config = ExperimentConfig {
                split_fraction: split,
                hyperparams: mirlab::learning::GbtHyperparams {
                    num_trees: trees,
                    max_depth: depth,
                    learning_rate,
                },
                ..experiment_config(&common)
            };
            let out = cmd_train(&dataset, &common.out, &config)?;
            if out.single_class {
                eprintln!("warning: training labels were single-class; model is constant");
            }
            println!(
                "trained on {} observations, evaluated on {}",
                out.train_samples, out.test_samples
            );
            println!("model: {}", out.model_path.display());
            println!("split: {}", out.split_path.display());
            println!("eval:  {}", out.eval_path.display());
        }
        Command::Compare {
            manifest,
            model,
            split_file,
            threshold,
            common,
        } => {
            let config = ExperimentConfig {
                threshold,
                ..experiment_config(&common)
            };
            let out = cmd_compare(&manifest, &model, &split_file, &common.out, &config)?;
            println!("compared {} variations", out.variations);
            println!("compare: {}", out.compare_path.display());
        }
        Command::Report { compare, common } => {
            let path = cmd_report(&compare, &common.out, common.seed)?;
            let (_, rows) = artifacts::read_report(&path)?;
            println!("report: {} ({} rows)", path.display(), rows.len());
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
