use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use drsub::harness::{
    emit_csv, load_ratings, ratings_to_tsv, run_experiment, write_csv, ExperimentConfig, RatingsFormat,
    SyntheticRatings,
};
use drsub::Error;

/// Stochastic gradient and mirror ascent for submodular maximization.
#[derive(Parser)]
#[command(name = "drsub", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run experiments and write their CSV rows.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Directory for CSVs of configs without an `output` key (default: stdout).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Check configs without running them.
    Validate {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// Write a seeded synthetic ratings file (`user item rating`).
    GenSynthetic {
        #[arg(long, default_value_t = 500)]
        users: usize,
        #[arg(long, default_value_t = 200)]
        items: usize,
        #[arg(long, default_value_t = 0.1)]
        density: f64,
        #[arg(long, default_value_t = 5)]
        max_rating: u32,
        #[arg(long, default_value_t = 4)]
        latent_dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (default: stdout).
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Parse a ratings file and print what was found.
    Inspect {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Movielens)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Movielens,
    Tsv,
}

impl From<Format> for RatingsFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Movielens => RatingsFormat::Movielens,
            Format::Tsv => RatingsFormat::Tsv,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Capability(_) | Error::Input(_) => 2,
        Error::Data(_) | Error::Io(_) => 3,
        Error::Diagnostic(_) => 1,
    }
}

fn load(path: &Path) -> drsub::Result<ExperimentConfig> {
    let cfg = ExperimentConfig::from_file(path)?;
    cfg.validate().map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })?;
    Ok(cfg)
}

fn run(cli: Cli) -> drsub::Result<()> {
    match cli.command {
        Command::Run { configs, out_dir } => {
            let cfgs = configs.iter().map(|p| load(p)).collect::<drsub::Result<Vec<_>>>()?;
            for cfg in cfgs {
                let records = run_experiment(&cfg)?;
                let target =
                    cfg.output.clone().or_else(|| out_dir.as_ref().map(|d| d.join(format!("{}.csv", cfg.id()))));
                match target {
                    Some(path) => {
                        emit_csv(&records, &path)?;
                        eprintln!("{}: {} rows -> {}", cfg.id(), records.len(), path.display());
                    }
                    None => write_csv(&records, std::io::stdout().lock())?,
                }
            }
        }
        Command::Validate { configs } => {
            for path in &configs {
                let cfg = load(path)?;
                println!(
                    "{}: ok ({} run(s))",
                    path.display(),
                    cfg.budgets().len() * cfg.horizons().len() * cfg.repeats
                );
            }
        }
        Command::GenSynthetic { users, items, density, max_rating, latent_dim, seed, out } => {
            let params = SyntheticRatings { users, items, density, max_rating, latent_dim };
            let ratings = params.generate(seed)?;
            let text = ratings_to_tsv(&ratings);
            match out {
                Some(path) => std::fs::write(&path, text)?,
                None => std::io::stdout().lock().write_all(text.as_bytes())?,
            }
        }
        Command::Inspect { path, format } => {
            let (ratings, report) = load_ratings(&path, format.into())?;
            println!("lines      {}", report.lines);
            println!("parsed     {}", report.parsed);
            println!("malformed  {}", report.malformed);
            if !report.malformed_examples.is_empty() {
                println!("  e.g. lines {:?}", report.malformed_examples);
            }
            println!("users      {}", report.users);
            println!("items      {}", report.items);
            println!("max rating {}", report.max_rating);
            let density = ratings.entries().len() as f64 / (report.users * report.items) as f64;
            println!("density    {density:.4}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
