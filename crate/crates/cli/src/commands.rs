use std::f64::consts::PI;

use polaron_core::dynamics::{fit_decay_rate, spontaneous_emission_run, EmissionRun, FitWindow};
use polaron_core::linalg::CMatrix;
use polaron_core::model::{DiscreteBath, ModelConfig};
use polaron_core::oracle::{build_hamiltonian, exact_groundstate, miniature_bath, spin_z_expectation, FockBasis};
use polaron_core::scattering::run_scattering;
use polaron_core::static_polaron::{groundstate_polarization, solve_single_qubit_fixed_point, solve_variational};
use polaron_core::two_emitter::{
    coherent_coupling_g12, collective_rates, lamb_shifts, params_for_regime, Regime,
};
use polaron_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{DynamicsArgs, OracleArgs, RegimeArg, ScatteringArgs, TwoEmitterArgs};
use crate::error::CliError;
use crate::output::{fmt, Table};

/// Files produced by one command, in write order.
pub type Outputs = Vec<(String, Table)>;

fn sweep<T, F>(alphas: &[f64], f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(f64) -> Result<T, CliError> + Sync,
{
    // results come back in sweep order whatever the completion order
    alphas.par_iter().map(|&a| f(a)).collect()
}

fn single_qubit_solution(cfg: &ModelConfig) -> Result<polaron_core::static_polaron::PolaronSolution, CliError> {
    let bath = DiscreteBath::build(cfg)?;
    if cfg.num_qubits() == 1 {
        Ok(solve_single_qubit_fixed_point(&bath, cfg.qubit_gaps[0], 1e-12, 10_000)?)
    } else {
        Ok(solve_variational(&bath, &cfg.qubit_gaps, None)?)
    }
}

pub fn groundstate(model: &ModelConfig, alphas: &[f64]) -> Result<Outputs, CliError> {
    let rows = sweep(alphas, |a| {
        let sol = single_qubit_solution(&model.with_alpha(a))?;
        let z = groundstate_polarization(&sol)[0];
        Ok(vec![
            fmt(a),
            fmt(sol.renormalized_gaps[0]),
            fmt(z),
            fmt(sol.groundstate_energy),
            fmt(sol.residual),
            sol.degenerate.to_string(),
        ])
    })?;
    let mut table = Table::new(&["alpha", "delta_r", "sigma_z", "energy", "residual", "degenerate"]);
    table.rows = rows;
    Ok(vec![("groundstate.csv".into(), table)])
}

fn emission_runs(model: &ModelConfig, args: &DynamicsArgs, alphas: &[f64]) -> Result<Vec<EmissionRun>, CliError> {
    let t_max = args.t_max.unwrap_or(0.8 * model.length() / model.speed);
    sweep(alphas, |a| Ok(spontaneous_emission_run(model, a, t_max, args.dt)?))
}

fn alpha_tag(a: f64) -> String {
    format!("{a:.4}")
}

pub fn emission(model: &ModelConfig, args: &DynamicsArgs, alphas: &[f64]) -> Result<Outputs, CliError> {
    let runs = emission_runs(model, args, alphas)?;
    let mut out = Vec::new();
    let mut rates = Table::new(&[
        "alpha",
        "delta_r",
        "gamma_fit",
        "gamma_markov",
        "fit_residual",
        "monotone",
        "revival_warning",
        "norm_error",
    ]);
    for run in &runs {
        let mut header = vec!["t".to_string(), "survival".to_string()];
        header.extend(run.omega_signed.iter().map(|w| format!("rho({w:+.6})")));
        let mut table = Table::with_header(header);
        for (i, &t) in run.times.iter().enumerate() {
            let mut row = vec![fmt(t), fmt(run.survival[i])];
            row.extend(run.densities[i].iter().map(|&d| fmt(d)));
            table.rows.push(row);
        }
        out.push((format!("emission_alpha{}.csv", alpha_tag(run.alpha)), table));

        let (rate, residual, monotone) = match fit_decay_rate(&run.times, &run.survival, FitWindow::default()) {
            Ok(fit) => (fmt(fit.rate), fmt(fit.residual), fit.monotone.to_string()),
            Err(_) => (String::new(), String::new(), String::new()),
        };
        rates.rows.push(vec![
            fmt(run.alpha),
            fmt(run.delta_r),
            rate,
            fmt(PI * run.alpha * run.delta_r),
            residual,
            monotone,
            run.revival_warning.to_string(),
            fmt(run.norm_error),
        ]);
    }
    out.push(("emission_rates.csv".into(), rates));
    Ok(out)
}

pub fn spectrum(model: &ModelConfig, args: &DynamicsArgs, alphas: &[f64]) -> Result<Outputs, CliError> {
    let runs = emission_runs(model, args, alphas)?;
    Ok(runs
        .iter()
        .map(|run| {
            let mut pts: Vec<(f64, f64)> = run.omega_signed.iter().copied().zip(run.final_density().iter().copied()).collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut table = Table::new(&["omega_signed", "density"]);
            table.rows = pts.into_iter().map(|(w, d)| vec![fmt(w), fmt(d)]).collect();
            (format!("spectrum_alpha{}.csv", alpha_tag(run.alpha)), table)
        })
        .collect())
}

pub fn scattering(model: &ModelConfig, args: &ScatteringArgs, alphas: &[f64]) -> Result<Outputs, CliError> {
    let results = sweep(alphas, |a| Ok(run_scattering(&model.with_alpha(a), None, args.t_final)?))?;
    Ok(results
        .iter()
        .map(|res| {
            let mut rows: Vec<(f64, Vec<String>)> = Vec::new();
            for m in &res.modes {
                // every ±k pair appears on both halves of the ω·sign(k) axis
                for w in [-m.omega, m.omega] {
                    rows.push((
                        w,
                        vec![
                            fmt(w),
                            fmt(m.transmission),
                            fmt(m.reflection),
                            fmt(m.theta_t),
                            fmt(m.theta_r),
                            m.masked.to_string(),
                        ],
                    ));
                }
            }
            rows.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut table = Table::new(&["omega_signed", "T", "R", "theta_t", "theta_r", "masked"]);
            table.rows = rows.into_iter().map(|r| r.1).collect();
            (format!("scattering_alpha{}.csv", alpha_tag(res.alpha)), table)
        })
        .collect())
}

pub fn two_emitter(model: &ModelConfig, args: &TwoEmitterArgs, alphas: &[f64]) -> Result<Outputs, CliError> {
    let regime = match args.regime {
        RegimeArg::Large => Regime::LargeDistance,
        RegimeArg::Short => Regime::ShortDistance,
    };
    let gap = model.qubit_gaps[0];
    let omega_c = model
        .omega_c
        .ok_or_else(|| CliError::Config("two-emitter analytics need --omega-c".into()))?;
    let lambda0 = model.lambda0();
    let distances = args.distance.values();
    let blocks = sweep(alphas, |a| {
        distances
            .iter()
            .map(|&d| {
                let p = params_for_regime(a, gap, omega_c, regime, d * lambda0)?;
                let (gi, g12) = collective_rates(&p);
                let shift = lamb_shifts(&p)?;
                let coupling = coherent_coupling_g12(&p);
                Ok(vec![
                    fmt(a),
                    fmt(d),
                    fmt(gi),
                    fmt(g12),
                    fmt(shift.value),
                    fmt(coupling.total),
                    fmt(0.0),
                    p.localized.to_string(),
                ])
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let mut table =
        Table::new(&["alpha", "d_over_lambda0", "gamma_i", "gamma_12", "delta_i", "g12_real", "g12_imag", "localized"]);
    table.rows = blocks.into_iter().flatten().collect();
    Ok(vec![("two_emitter.csv".into(), table)])
}

fn random_instance(rng: &mut ChaCha8Rng, modes: usize, qubits: usize, alpha: f64) -> Result<DiscreteBath, CliError> {
    let spacing = 0.5;
    let freqs: Vec<f64> = (0..modes).map(|k| 0.4 + spacing * k as f64 + rng.gen_range(0.0..0.2)).collect();
    let couplings = CMatrix::from_fn(qubits, modes, |_, k| {
        Complex64::from_polar((alpha * freqs[k] * spacing / 2.0).sqrt(), rng.gen_range(0.0..2.0 * PI))
    });
    Ok(DiscreteBath::from_modes(freqs, couplings, 1.0)?)
}

/// Variational bound on random instances plus ⟨σ^z⟩ against the exact
/// miniature; returns the report and whether every check passed.
pub fn oracle_check(args: &OracleArgs, alphas: &[f64]) -> Result<(Value, bool), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.common.seed);
    let mut checks = Vec::new();
    let mut all = true;
    for case in 0..args.instances {
        let modes = 2 + case % 2;
        let qubits = 1 + (case / 2) % 2;
        let alpha = rng.gen_range(0.0..0.3);
        let gaps: Vec<f64> = (0..qubits).map(|_| rng.gen_range(0.5..1.5)).collect();
        let bath = random_instance(&mut rng, modes, qubits, alpha)?;
        let basis = FockBasis::new(modes, if modes == 2 { 12 } else { 8 }, qubits)?;
        let e0 = exact_groundstate(&build_hamiltonian(&bath, &gaps, &basis)?)?.energy;
        let sol = solve_variational(&bath, &gaps, None)?;
        let gap = sol.groundstate_energy - e0;
        let pass = gap >= -1e-10 && (alpha > 0.2 || gap <= 0.05 * e0.abs());
        all &= pass;
        checks.push(json!({ "check": "variational_bound", "modes": modes, "qubits": qubits, "alpha": alpha, "exact": e0, "polaron": sol.groundstate_energy, "pass": pass }));
    }
    for &a in alphas.iter().filter(|&&a| a <= 0.2) {
        let bath = miniature_bath(a)?;
        let basis = FockBasis::new(3, 8, 1)?;
        let gs = exact_groundstate(&build_hamiltonian(&bath, &[1.0], &basis)?)?;
        let exact = spin_z_expectation(&basis, &gs.vector, 0);
        let sol = solve_single_qubit_fixed_point(&bath, 1.0, 1e-12, 10_000)?;
        let polaron = groundstate_polarization(&sol)[0];
        let pass = (exact - polaron).abs() < 0.05;
        all &= pass;
        checks.push(json!({ "check": "sigma_z", "alpha": a, "exact": exact, "polaron": polaron, "pass": pass }));
    }
    Ok((json!({ "pass": all, "checks": checks }), all))
}
