use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use gnss_twin::pipeline::{
    cmd_generate, cmd_process, cmd_validate, Artifacts, ProcessOptions, Thresholds, ValidateInputs,
};

/// GPS L1 C/A digital twin: IF synthesis, software receiver and validation.
#[derive(Debug, Parser)]
#[command(name = "gnss-twin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize an IF file, its JSON sidecar and truth CSVs from a scenario file.
    Generate {
        /// Scenario TOML file.
        #[arg(short, long)]
        config: PathBuf,
        /// IF output file; truth CSVs are written beside it.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run acquisition, tracking, decoding and PVT over an IF file.
    Process {
        /// IF file with a `.json` sidecar.
        #[arg(short, long)]
        input: PathBuf,
        /// Prefix of the output CSVs; defaults to the input path without extension.
        #[arg(short, long)]
        prefix: Option<PathBuf>,
        /// Receiver and navigation options (TOML).
        #[arg(long)]
        options: Option<PathBuf>,
        /// Comma-separated PRNs to search instead of 1-32.
        #[arg(long, value_delimiter = ',')]
        prns: Option<Vec<u8>>,
        /// Keep every n-th telemetry row per channel.
        #[arg(long)]
        telemetry_every: Option<usize>,
        /// RINEX navigation file used until the broadcast message is decoded.
        #[arg(long)]
        assistance: Option<PathBuf>,
    },
    /// Compare receiver outputs with truth and write a verdict file.
    Validate {
        /// IF file (or prefix) whose truth CSVs are used.
        #[arg(short, long)]
        truth: PathBuf,
        /// Prefix of the receiver CSVs; defaults to the truth prefix.
        #[arg(short, long)]
        results: Option<PathBuf>,
        /// Threshold overrides (TOML).
        #[arg(long)]
        thresholds: Option<PathBuf>,
        /// Verdict file; defaults to `<results>_verdict.txt`.
        #[arg(long)]
        verdict: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn prefix_of(path: &Path) -> Artifacts {
    Artifacts::from_path(path)
}

/// Returns whether the command passed.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Generate { config, output } => {
            let s = cmd_generate(&config, &output).with_context(|| format!("generating {}", output.display()))?;
            println!(
                "wrote {} samples ({} PRNs, {} clipped components) to {}",
                s.metadata.sample_count,
                s.metadata.prns.len(),
                s.metadata.clipped_components,
                output.display()
            );
            Ok(true)
        }
        Command::Process { input, prefix, options, prns, telemetry_every, assistance } => {
            let mut opts = match &options {
                Some(p) => ProcessOptions::load(p).with_context(|| format!("reading {}", p.display()))?,
                None => ProcessOptions::default(),
            };
            if let Some(p) = prns {
                opts.receiver.prns = p;
            }
            if let Some(n) = telemetry_every {
                opts.telemetry_every = n;
            }
            if assistance.is_some() {
                opts.assistance = assistance;
            }
            let prefix = prefix.unwrap_or_else(|| prefix_of(&input).prefix);
            let s = cmd_process(&input, &prefix, &opts).with_context(|| format!("processing {}", input.display()))?;
            if s.truncated {
                eprintln!("warning: {} is truncated; processed {} whole samples", input.display(), s.samples);
            }
            println!(
                "acquired PRNs {:?}; {} observables, {} PVT solutions, {} telemetry rows",
                s.acquired, s.observables, s.solutions, s.telemetry_rows
            );
            Ok(true)
        }
        Command::Validate { truth, results, thresholds, verdict } => {
            let truth = prefix_of(&truth);
            let results = results.map(|prefix| Artifacts { prefix }).unwrap_or_else(|| truth.clone());
            let th = match &thresholds {
                Some(p) => Thresholds::load(p).with_context(|| format!("reading {}", p.display()))?,
                None => Thresholds::default(),
            };
            let verdict_path = verdict.unwrap_or_else(|| results.file("_verdict.txt"));
            let inputs = ValidateInputs::from_artifacts(&truth, &results);
            let v = cmd_validate(&inputs, &th, &verdict_path)?;
            print!("{}", v.render());
            Ok(v.pass())
        }
    }
}
