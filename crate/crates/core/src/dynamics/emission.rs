use serde::Serialize;

use super::{assemble_hp, signed_frequency, ExcitationVector};
use crate::error::{ensure_finite, Error, Result};
use crate::model::{DiscreteBath, ModelConfig};
use crate::static_polaron::{solve_single_qubit_fixed_point, solve_variational, PolaronSolution};

/// Time series of one spontaneous-emission simulation.
#[derive(Clone, Debug, Serialize)]
pub struct EmissionRun {
    pub alpha: f64,
    pub delta_r: f64,
    pub times: Vec<f64>,
    /// `|α_1(t)|²`.
    pub survival: Vec<f64>,
    /// `ω_n·sign(k_n)` for each mode column of `densities`.
    pub omega_signed: Vec<f64>,
    /// `|α_k(t)|²`, one row per time.
    pub densities: Vec<Vec<f64>>,
    /// Largest `| ‖α(t)‖² − 1 |` seen.
    pub norm_error: f64,
    /// `t_max` exceeded `0.8 L/v`: emitted light may have wrapped around.
    pub revival_warning: bool,
}

impl EmissionRun {
    pub fn final_density(&self) -> &[f64] {
        self.densities.last().map(|v| v.as_slice()).unwrap_or(&[])
    }
}

/// Polaron groundstate for any register size: fixed point for one qubit,
/// direct minimisation otherwise.
pub(crate) fn groundstate(bath: &DiscreteBath, gaps: &[f64]) -> Result<PolaronSolution> {
    if gaps.len() == 1 {
        solve_single_qubit_fixed_point(bath, gaps[0], 1e-12, 10_000)
    } else {
        solve_variational(bath, gaps, None)
    }
}

/// Decay of the first spin excitation from `α_1(0) = 1` on the discretised line.
pub fn spontaneous_emission_run(config: &ModelConfig, alpha: f64, t_max: f64, dt: f64) -> Result<EmissionRun> {
    ensure_finite("t_max", t_max)?;
    ensure_finite("dt", dt)?;
    if t_max < 0.0 || dt <= 0.0 {
        return Err(Error::InvalidConfig(format!("need t_max ≥ 0 and dt > 0, got {t_max}, {dt}")));
    }
    let cfg = config.with_alpha(alpha);
    let bath = DiscreteBath::build(&cfg)?;
    let sol = groundstate(&bath, &cfg.qubit_gaps)?;
    let hp = assemble_hp(&sol, &bath)?;
    let init = ExcitationVector::spin_excited(hp.num_spin, bath.num_modes(), 0);
    let prop = hp.propagator(&init);

    let steps = (t_max / dt).round() as usize;
    let mut run = EmissionRun {
        alpha,
        delta_r: sol.renormalized_gaps[0],
        times: Vec::with_capacity(steps + 1),
        survival: Vec::with_capacity(steps + 1),
        omega_signed: (0..bath.num_modes()).map(|k| signed_frequency(&bath, k)).collect(),
        densities: Vec::with_capacity(steps + 1),
        norm_error: 0.0,
        revival_warning: t_max > 0.8 * bath.line_length / bath.speed,
    };
    for n in 0..=steps {
        let t = n as f64 * dt;
        let state = prop.at(t);
        run.norm_error = run.norm_error.max((state.norm_sqr() - 1.0).abs());
        run.times.push(t);
        run.survival.push(state.spin_amps[0].norm_sqr());
        run.densities.push(state.photon_amps.iter().map(|a| a.norm_sqr()).collect());
    }
    Ok(run)
}

/// Window for [`fit_decay_rate`].
#[derive(Clone, Copy, Debug)]
pub struct FitWindow {
    /// Drop the initial transient `t < t_min` (default `5/Δ`).
    pub t_min: f64,
    /// Stop at the first sample below this survival (default `10⁻³`).
    pub floor: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self { t_min: 5.0, floor: 1e-3 }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    /// RMS deviation of `ln|α_1|²` from the fitted line.
    pub residual: f64,
    pub points: usize,
    /// False when the survival is not monotone inside the window
    /// (coherent oscillations at strong coupling).
    pub monotone: bool,
}

/// Least-squares fit of `ln|α_1(t)|² = c − γt` over the window.
pub fn fit_decay_rate(times: &[f64], survival: &[f64], window: FitWindow) -> Result<DecayFit> {
    if times.len() != survival.len() {
        return Err(Error::DimensionMismatch(format!("{} times, {} samples", times.len(), survival.len())));
    }
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for (&t, &p) in times.iter().zip(survival) {
        if t < window.t_min {
            continue;
        }
        if p < window.floor {
            break;
        }
        if p <= 0.0 {
            return Err(Error::InvalidConfig(format!("non-positive survival {p} at t = {t}")));
        }
        ts.push(t);
        ys.push(p.ln());
    }
    let n = ts.len();
    if n < 3 {
        return Err(Error::InvalidConfig(format!("only {n} samples inside the fit window")));
    }
    let nf = n as f64;
    let tm = ts.iter().sum::<f64>() / nf;
    let ym = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = ts.iter().map(|t| (t - tm).powi(2)).sum();
    let sxy: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - tm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let residual = (ts.iter().zip(&ys).map(|(t, y)| (y - ym - slope * (t - tm)).powi(2)).sum::<f64>() / nf).sqrt();
    let monotone = ys.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    Ok(DecayFit { rate: -slope, residual, points: n, monotone })
}
