use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polaron_core::model::ModelConfig;
use serde::Serialize;

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "polaron", version, about = "Polaron ansatz for few-impurity spin-boson models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Polaron groundstate sweep over α: Δ_r, ⟨σ^z⟩, energy.
    Groundstate(CommonArgs),
    /// Spontaneous emission from the dressed excited state.
    Emission(DynamicsArgs),
    /// Photon density after the emitter has decayed.
    Spectrum(DynamicsArgs),
    /// Single-photon wavepacket scattering off one emitter.
    Scattering(ScatteringArgs),
    /// Collective rates and couplings of two emitters in the scaling limit.
    TwoEmitter(TwoEmitterArgs),
    /// Compare the polaron solver against exact diagonalisation.
    #[command(hide = true)]
    OracleCheck(OracleArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Groundstate(_) => "groundstate",
            Command::Emission(_) => "emission",
            Command::Spectrum(_) => "spectrum",
            Command::Scattering(_) => "scattering",
            Command::TwoEmitter(_) => "two-emitter",
            Command::OracleCheck(_) => "oracle-check",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Groundstate(c) => c,
            Command::Emission(d) | Command::Spectrum(d) => &d.common,
            Command::Scattering(s) => &s.common,
            Command::TwoEmitter(t) => &t.common,
            Command::OracleCheck(o) => &o.common,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CommonArgs {
    /// Coupling: a single value or `start:stop:points`.
    #[arg(long, default_value = "0.1")]
    pub alpha: Sweep,
    /// Number of line segments (modes).
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Line length in units of λ₀.
    #[arg(long = "L")]
    pub l: Option<f64>,
    /// Cutoff frequency (continuum models).
    #[arg(long = "omega-c")]
    pub omega_c: Option<f64>,
    /// Qubit gap Δ, applied to every qubit.
    #[arg(long)]
    pub gap: Option<f64>,
    /// Model file (JSON); flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DynamicsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Final time (default 0.8 L/v).
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ScatteringArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Propagation time (default 0.75 L/v).
    #[arg(long = "t-final")]
    pub t_final: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeArg {
    Large,
    Short,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TwoEmitterArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Emitter separation in λ₀: a value or `start:stop:points`.
    #[arg(long, default_value = "0:2:41")]
    pub distance: Sweep,
    #[arg(long, value_enum, default_value = "large")]
    pub regime: RegimeArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OracleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Random instances for the variational bound.
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
}

/// Either one value or `points` equally spaced values from `start` to `stop`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = (self.points - 1) as f64;
        // 13 significant digits absorb the rounding of the step, so that
        // 0:0.9:19 yields 0.15 rather than 0.15000000000000002
        let tidy = |x: f64| format!("{x:.12e}").parse::<f64>().expect("formatted float parses");
        (0..self.points).map(|i| tidy(self.start + (self.stop - self.start) * i as f64 / last)).collect()
    }
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
        let parts: Vec<&str> = s.split(':').collect();
        let sweep = match parts.as_slice() {
            [v] => Sweep { start: num(v)?, stop: num(v)?, points: 1 },
            [a, b, n] => {
                let points = n.trim().parse::<usize>().map_err(|e| format!("bad point count {n:?}: {e}"))?;
                Sweep { start: num(a)?, stop: num(b)?, points }
            }
            _ => return Err(format!("expected VALUE or START:STOP:POINTS, got {s:?}")),
        };
        if sweep.points == 0 {
            return Err("a sweep needs at least one point".into());
        }
        if !(sweep.start.is_finite() && sweep.stop.is_finite()) {
            return Err("sweep bounds must be finite".into());
        }
        Ok(sweep)
    }
}

/// Model from `--config` (or the default line) with flag overrides applied.
pub fn resolve_model(common: &CommonArgs) -> Result<ModelConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => ModelConfig::default(),
    };
    if let Some(n) = common.n {
        cfg.num_segments = n;
    }
    if let Some(l) = common.l {
        if common.config.is_none() {
            // keep the single emitter in the middle of the line
            cfg.qubit_positions = vec![l / 2.0];
        }
        cfg.line_length = l;
    }
    if let Some(g) = common.gap {
        cfg.qubit_gaps = vec![g; cfg.qubit_gaps.len()];
    }
    if let Some(wc) = common.omega_c {
        cfg.omega_c = Some(wc);
    }
    cfg.validate()?;
    Ok(cfg)
}
