//! `clustersim`: sweeps, thresholds, superoperators, Kraus decompositions and
//! the validation suite for the decohered four-qubit cluster.
//!
//! Exit codes: 0 success, 1 validation failure, 2 bad input or unmet
//! precondition.

mod commands;
mod config;
mod format;
mod grid;
mod sweep;

use std::f64::consts::FRAC_PI_4;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use clustersim::{ChannelKind, InitialState, RotationSpec};

use commands::Source;
use config::{parse_channel, ConfigFile, Format, Metric, Subset, SweepConfig};
use grid::{parse_value, Grid};

#[derive(Parser)]
#[command(name = "clustersim", version, about = "Four-qubit cluster decoherence and logical-gate simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a metric over a parameter grid and write CSV or JSON rows.
    Sweep(SweepArgs),
    /// Locate the noise strength where a bipartite negativity vanishes.
    Esd(EsdArgs),
    /// Print the logical superoperator as JSON.
    Superop(SuperopArgs),
    /// Print the Choi matrix and canonical Kraus decomposition as JSON.
    Kraus(LogicalArgs),
    /// Run the acceptance criteria; exit 1 if any fails.
    Validate(ValidateArgs),
    /// Draw Haar-random rotations.
    HaarSample(HaarArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON file with any of the flag names as keys; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// dephasing, amp or depol.
    #[arg(long)]
    channel: Option<String>,
    #[arg(long, value_enum)]
    metric: Option<Metric>,
    /// Qubits on one side of the cut, e.g. `1,2`.
    #[arg(long)]
    subset: Option<Subset>,
    /// Grids are `start:stop:steps` or a single value; `pi` is understood.
    #[arg(long)]
    alpha: Option<Grid>,
    #[arg(long)]
    beta: Option<Grid>,
    #[arg(long)]
    p: Option<Grid>,
    #[arg(long)]
    theta1: Option<Grid>,
    #[arg(long)]
    theta2: Option<Grid>,
    #[arg(long)]
    theta3: Option<Grid>,
    /// Replace the theta grids by this many Haar-random rotations.
    #[arg(long)]
    haar: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl SweepArgs {
    fn into_config(self) -> anyhow::Result<SweepConfig> {
        let base = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let flags = ConfigFile {
            channel: self.channel,
            metric: self.metric,
            subset: self.subset,
            alpha: self.alpha,
            beta: self.beta,
            p: self.p,
            theta1: self.theta1,
            theta2: self.theta2,
            theta3: self.theta3,
            haar: self.haar,
            seed: self.seed,
            jobs: self.jobs,
            out: self.out,
            format: self.format,
        };
        SweepConfig::resolve(base.overlay(flags))
    }
}

#[derive(Args)]
struct EsdArgs {
    #[arg(long, value_parser = parse_channel)]
    channel: ChannelKind,
    #[arg(long, default_value = "1")]
    subset: Subset,
    #[arg(long, value_parser = parse_value, default_value_t = FRAC_PI_4)]
    alpha: f64,
    #[arg(long, value_parser = parse_value, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// csv prints `esd p=<value>` or `no-esd`.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct LogicalArgs {
    #[arg(long, value_parser = parse_channel)]
    channel: ChannelKind,
    #[arg(long, value_parser = parse_value, default_value_t = 0.0)]
    p: f64,
    #[arg(long, value_parser = parse_value, default_value_t = 0.0)]
    theta1: f64,
    #[arg(long, value_parser = parse_value, default_value_t = 0.0)]
    theta2: f64,
    #[arg(long, value_parser = parse_value, default_value_t = 0.0)]
    theta3: f64,
    #[command(flatten)]
    output: OutputArgs,
}

impl LogicalArgs {
    fn checked(&self) -> anyhow::Result<(f64, RotationSpec)> {
        let finite = [self.p, self.theta1, self.theta2, self.theta3].iter().all(|x| x.is_finite());
        if !finite {
            anyhow::bail!("p and angles must be finite");
        }
        if !(0.0..=1.0).contains(&self.p) {
            anyhow::bail!("p = {} outside [0, 1]", self.p);
        }
        Ok((self.p, RotationSpec::new(self.theta1, self.theta2, self.theta3)))
    }
}

#[derive(Args)]
struct SuperopArgs {
    #[command(flatten)]
    logical: LogicalArgs,
    #[arg(long, value_enum, default_value_t = Source::Reconstructed)]
    source: Source,
}

#[derive(Args)]
struct ValidateArgs {
    /// Run a single criterion.
    #[arg(long)]
    criterion: Option<u8>,
    /// csv selects the plain-text report.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct HaarArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    output: OutputArgs,
}

fn open_out(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Sweep(args) => {
            let cfg = args.into_config()?;
            let rows = sweep::run(&cfg)?;
            let mut out = open_out(cfg.out.as_deref())?;
            sweep::write_rows(&rows, cfg.format, &mut out)?;
            out.flush()?;
        }
        Command::Esd(a) => {
            let s = InitialState::new(a.alpha, a.beta);
            let mut out = open_out(a.output.out.as_deref())?;
            commands::esd(a.channel, &a.subset.0, s, a.tol, a.format, &mut out)?;
            out.flush()?;
        }
        Command::Superop(a) => {
            let (p, r) = a.logical.checked()?;
            let mut out = open_out(a.logical.output.out.as_deref())?;
            commands::superop(a.logical.channel, p, r, a.source, &mut out)?;
            out.flush()?;
        }
        Command::Kraus(a) => {
            let (p, r) = a.checked()?;
            let mut out = open_out(a.output.out.as_deref())?;
            commands::kraus(a.channel, p, r, &mut out)?;
            out.flush()?;
        }
        Command::Validate(a) => {
            let mut out = open_out(a.output.out.as_deref())?;
            let passed = commands::validate(a.criterion, a.format, &mut out)?;
            out.flush()?;
            if !passed {
                return Ok(ExitCode::from(1));
            }
        }
        Command::HaarSample(a) => {
            let mut out = open_out(a.output.out.as_deref())?;
            commands::haar_sample(a.seed, a.count, a.format, &mut out)?;
            out.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
