//! `polarbench` — encode datasets with missing values, benchmark encodings
//! under cross-validation, and check the library's numeric identities.
//!
//! Exit codes: 0 success, 1 I/O, 2 configuration, 3 internal invariant
//! violation.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{CliError, ConfigFor, PartialConfig};

#[derive(Parser)]
#[command(
    name = "polarbench",
    version,
    about = "Polar encoding of missing values: encode datasets and benchmark encodings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode datasets and write the encoded matrices
    Encode(RunArgs),
    /// Run the cross-validated encoding comparison and write reports
    Bench(RunArgs),
    /// Check the numeric identities the encodings are built on
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file with `key = value` lines; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input dataset path(s)
    #[arg(long, value_delimiter = ',')]
    data: Vec<String>,
    /// Schema sidecar per dataset ("-" infers kinds from the data)
    #[arg(long, value_delimiter = ',')]
    schema: Vec<String>,
    /// Tokens read as missing values (default: "?" and the empty string)
    #[arg(long, value_delimiter = ',')]
    missing_markers: Vec<String>,
    /// Encodings to use: polar-boscovich, polar-euclidean,
    /// impute-indicator, impute-only (bench default: all)
    #[arg(long, value_delimiter = ',')]
    encoding: Vec<String>,
    /// Classifiers to run: nn, nn-d, frnn, cart (default: all)
    #[arg(long, value_delimiter = ',')]
    classifier: Vec<String>,
    /// Neighbour count for nn, nn-d and frnn
    #[arg(long)]
    k: Option<usize>,
    /// Minkowski order for nn and nn-d distances (frnn always uses p = 1)
    #[arg(long)]
    p: Option<f64>,
    /// Cost-complexity pruning threshold for cart
    #[arg(long)]
    alpha: Option<f64>,
    /// Cross-validation folds
    #[arg(long)]
    folds: Option<usize>,
    /// Cross-validation repeats
    #[arg(long)]
    repeats: Option<usize>,
    /// Seed for every random choice in the run
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (falls back to $POLARBENCH_OUT, then ".")
    #[arg(long)]
    out: Option<String>,
    /// Worker threads for benchmark fold cells (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Seed for the randomised identity checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Radial perturbation injected into the Euclidean map (negative
    /// control for the check harness)
    #[arg(long, default_value_t = 0.0, hide = true)]
    perturb_euclidean: f64,
}

impl RunArgs {
    fn into_partial(self) -> (Option<PathBuf>, PartialConfig) {
        let some_if_nonempty = |v: Vec<String>| if v.is_empty() { None } else { Some(v) };
        let partial = PartialConfig {
            data: some_if_nonempty(self.data),
            schema: some_if_nonempty(self.schema),
            missing_markers: some_if_nonempty(self.missing_markers),
            encoding: some_if_nonempty(self.encoding),
            classifier: some_if_nonempty(self.classifier),
            k: self.k,
            p: self.p,
            alpha: self.alpha,
            folds: self.folds,
            repeats: self.repeats,
            seed: self.seed,
            out: self.out,
            threads: self.threads,
        };
        (self.config, partial)
    }
}

fn resolve(args: RunArgs, usage: ConfigFor) -> Result<config::RunConfig, CliError> {
    let (config_path, flags) = args.into_partial();
    let base = match config_path {
        Some(path) => PartialConfig::from_file(&path)?,
        None => PartialConfig::default(),
    };
    base.overlaid(flags).finalize(usage)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Encode(args) => commands::cmd_encode(&resolve(args, ConfigFor::Encode)?),
        Command::Bench(args) => commands::cmd_bench(&resolve(args, ConfigFor::Bench)?),
        Command::Selftest(args) => commands::cmd_selftest(args.seed, args.perturb_euclidean),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}
