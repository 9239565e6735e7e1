//! Command-line experiment harness.
//!
//! Usage: `chirpwave <experiment> [--config FILE] [--set key=value ...]
//! [--seed U64] [--out FILE] [--format csv|json]`
//!
//! Exit status: 0 on success, 2 on usage/configuration errors, 3 on
//! numerical errors.

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use chirpwave::error::Error;
use chirpwave::harness::{self, ExperimentSpec};

#[derive(Parser)]
#[command(
    name = "chirpwave",
    version,
    about = "Waveform simulation experiments: PAPR, complexity, BER, ranging and range-velocity sensing"
)]
struct Cli {
    /// Experiment name: papr_ccdf, complexity_table, spectral_efficiency,
    /// ber_vs_snr, mix_range_profile, pmsr_vs_isr, mf_map, pd_vs_clipping,
    /// resolutions.
    experiment: String,

    /// JSON config file with waveform/scenario/sweep overrides.
    #[arg(long)]
    config: Option<String>,

    /// Individual overrides, e.g. --set m=64 --set snr_db=-5.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// RNG seed (overrides the config file).
    #[arg(long)]
    seed: Option<u64>,

    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<String>,

    /// Output format.
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
}

fn build_spec(cli: &Cli) -> chirpwave::Result<ExperimentSpec> {
    let config_text = match &cli.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {path}: {e}")))?,
        None => "{}".to_string(),
    };
    let mut spec = harness::parse_config(Some(&cli.experiment), &config_text)?;
    for pair in &cli.set {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got '{pair}'")))?;
        harness::apply_override(&mut spec, key.trim(), value.trim())?;
    }
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    spec.validate()?;
    Ok(spec)
}

fn execute(cli: &Cli) -> chirpwave::Result<()> {
    let spec = build_spec(cli)?;
    let start = Instant::now();
    let output = harness::run(&spec)?;
    let rendered = match cli.format.as_str() {
        "json" => harness::to_json(&output),
        _ => harness::to_csv(&output),
    };
    match &cli.out {
        Some(path) => fs::write(path, rendered)
            .map_err(|e| Error::Config(format!("cannot write {path}: {e}")))?,
        None => print!("{rendered}"),
    }
    eprintln!(
        "{}: {} rows in {:.2}s (seed {})",
        spec.name.label(),
        output.table.rows.len(),
        start.elapsed().as_secs_f64(),
        spec.seed
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Numerical(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
