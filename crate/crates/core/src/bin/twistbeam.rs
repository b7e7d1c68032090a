//! Command-line front end for the experiment harness.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use twistbeam::experiments::{analyze_dir, plot_only, run_experiment, BeamParameters, ExperimentConfig, ExperimentKind, Preset};
use twistbeam::Error;

#[derive(Parser)]
#[command(name = "twistbeam", version, about = "Twisted-beam vibration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Free-vibration frequency sweep of one beam.
    FreeSweep(RunArgs),
    /// Orbit axes against twist angle at a fixed frequency.
    TwistSweep(RunArgs),
    /// Frequency sweep with the foot on a compliant plate.
    ContactSweep(RunArgs),
    /// Two-legged walker across drive frequencies.
    Walker(RunArgs),
    /// Identify stiffness, damping and segment length from a drop test.
    Fit(RunArgs),
    /// Recompute orbit analytics from stored orbit tables.
    Analyze(DirArgs),
    /// Render SVG figures from stored tables.
    Plot(DirArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    PaperFit,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use the identified beam constants instead of any inline beam.
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
}

#[derive(Args)]
struct DirArgs {
    /// Directory holding the tables.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn configure(kind: ExperimentKind, args: &RunArgs) -> Result<(ExperimentConfig, PathBuf), Error> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(kind),
    };
    match cfg.kind {
        Some(k) if k != kind => {
            return Err(Error::Config(format!(
                "config describes a {} experiment, not {}",
                k.name(),
                kind.name()
            )))
        }
        _ => cfg.kind = Some(kind),
    }
    if let Some(PresetArg::PaperFit) = args.preset {
        cfg.preset = Some(Preset::PaperFit);
        cfg.beam = None;
        cfg.beam_parameters = BeamParameters::default();
    }
    if let Some(j) = args.jobs {
        cfg.jobs = j;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(kind.name()));
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, Error> {
    let (kind, args) = match &cli.command {
        Command::FreeSweep(a) => (ExperimentKind::FreeSweep, a),
        Command::TwistSweep(a) => (ExperimentKind::TwistSweep, a),
        Command::ContactSweep(a) => (ExperimentKind::ContactSweep, a),
        Command::Walker(a) => (ExperimentKind::Walker, a),
        Command::Fit(a) => (ExperimentKind::Fit, a),
        Command::Analyze(d) => return analyze_dir(&d.out),
        Command::Plot(d) => return plot_only(&d.out),
    };
    let (cfg, out) = configure(kind, args)?;
    eprintln!("{} -> {} (config {})", kind.name(), out.display(), &cfg.hash()[..12]);
    run_experiment(&cfg, &out)
}

fn main() -> ExitCode {
    let started = Instant::now();
    match run(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            eprintln!("done in {:.1} s", started.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let mut msg = format!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                if !msg.contains(&s.to_string()) {
                    msg.push_str(&format!("\n  caused by: {s}"));
                }
                source = s.source();
            }
            eprintln!("{msg}");
            ExitCode::from(if e.is_simulation_failure() { 1 } else { 2 })
        }
    }
}
