mod args;
mod commands;
mod error;
mod output;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

use args::{resolve_model, Cli, Command};
use error::CliError;

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("POLARON_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("POLARON_THREADS={raw:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let started = Instant::now();
    let common = cli.command.common();
    let model = resolve_model(common)?;
    let alphas = common.alpha.values();
    if let Some(bad) = alphas.iter().find(|a| **a < 0.0) {
        return Err(CliError::Config(format!("alpha = {bad} must be non-negative")));
    }

    let outputs = match &cli.command {
        Command::Groundstate(_) => commands::groundstate(&model, &alphas)?,
        Command::Emission(a) => commands::emission(&model, a, &alphas)?,
        Command::Spectrum(a) => commands::spectrum(&model, a, &alphas)?,
        Command::Scattering(a) => commands::scattering(&model, a, &alphas)?,
        Command::TwoEmitter(a) => commands::two_emitter(&model, a, &alphas)?,
        Command::OracleCheck(a) => {
            let (report, pass) = commands::oracle_check(a, &alphas)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
            return if pass { Ok(()) } else { Err(CliError::Check("oracle comparison failed".into())) };
        }
    };

    let out = &common.out;
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    for (name, table) in &outputs {
        table.write(&out.join(name))?;
    }
    write_manifest(out, cli, &model, &alphas, &outputs, started.elapsed().as_secs_f64())
}

fn write_manifest(
    out: &Path,
    cli: &Cli,
    model: &polaron_core::model::ModelConfig,
    alphas: &[f64],
    outputs: &commands::Outputs,
    wall_time: f64,
) -> Result<(), CliError> {
    let manifest = json!({
        "command": cli.command.name(),
        "arguments": &cli.command,
        "model": model,
        "alpha_values": alphas,
        "files": outputs.iter().map(|(n, _)| n).collect::<Vec<_>>(),
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_seconds": wall_time,
    });
    let path = out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
