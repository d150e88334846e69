use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use trifree::comm::Mode;
use trifree::io::{write_graph, write_partition};
use trifree_harness::report::{fits_to_csv, read_rows, refit, write_csv};
use trifree_harness::runner::build_instance;
use trifree_harness::{run_experiment, Axis, ExperimentConfig, ProtocolId};

#[derive(Parser)]
#[command(name = "trifree", version, about = "Triangle-freeness protocols in the coordinator model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the instances of an experiment as graph and partition files.
    Gen(GenArgs),
    /// Run an experiment and write its CSV.
    Run(RunArgs),
    /// Recompute summaries and log-log fits from a result CSV.
    Fit(FitArgs),
}

#[derive(Args)]
struct Overrides {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
}

impl Overrides {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        Ok(config)
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    common: Overrides,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Overrides,
    /// CSV path; defaults to the config's output, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    protocol: Option<ProtocolId>,
    #[arg(long)]
    mode: Option<Mode>,
}

#[derive(Args)]
struct FitArgs {
    /// CSV written by `run`.
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fit along this axis over all cells (n, d or k).
    #[arg(long)]
    sweep: Option<String>,
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn gen(args: GenArgs) -> Result<()> {
    let config = args.common.load()?;
    fs::create_dir_all(&args.out)?;
    for cell in 0..config.grid.len() {
        for trial in 0..config.trials {
            let p = build_instance(&config, cell, trial)?;
            let stem = args.out.join(format!("cell{cell}-trial{trial}"));
            write_graph(p.graph(), BufWriter::new(File::create(stem.with_extension("graph"))?))?;
            write_partition(&p, BufWriter::new(File::create(stem.with_extension("partition"))?))?;
        }
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = args.common.load()?;
    if let Some(p) = args.protocol {
        config.protocol = p;
    }
    if let Some(m) = args.mode {
        config.mode = Some(m);
    }
    config.validate()?;
    let result = run_experiment(&config)?;
    let out = args.out.or(config.output.clone());
    let mut w = sink(out.as_ref())?;
    write_csv(&result, &mut w)?;
    w.flush()?;
    for f in &result.fits {
        eprintln!("slope along {}: {:.4} +- {:.4} ({} points)", f.axis.as_str(), f.fit.slope, f.fit.stderr, f.fit.points);
    }
    Ok(())
}

fn fit(args: FitArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let rows = read_rows(&text)?;
    let sweep = match args.sweep.as_deref() {
        None => None,
        Some("n") => Some(Axis::N),
        Some("d") => Some(Axis::D),
        Some("k") => Some(Axis::K),
        Some(other) => anyhow::bail!("unknown axis `{other}`"),
    };
    let (_, fits) = refit(&rows, sweep);
    if fits.is_empty() {
        anyhow::bail!("no axis has 4 or more distinct grid values");
    }
    let mut w = sink(args.out.as_ref())?;
    w.write_all(fits_to_csv(&fits).as_bytes())?;
    w.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run(a),
        Command::Fit(a) => fit(a),
    }
}
