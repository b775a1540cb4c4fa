//! Acceptance report: one PASS/FAIL line per criterion, each at its stated
//! tolerance. Runs as a plain binary (`harness = false`) so that a failing
//! criterion is reported rather than aborting the remaining checks.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use polaron_core::dynamics::{assemble_hp, peak_ratio, propagator_peak, spontaneous_emission_run, ExcitationVector};
use polaron_core::linalg::CMatrix;
use polaron_core::model::{DiscreteBath, ModelConfig};
use polaron_core::oracle::{
    basis_vector, build_hamiltonian, exact_evolve, exact_groundstate, miniature_bath, spin_z_expectation, FockBasis,
};
use polaron_core::scattering::{run_scattering, unwrapped_reflection_phase, WavepacketSpec};
use polaron_core::static_polaron::{
    delta_r_continuum_implicit, delta_r_scaling_limit, groundstate_polarization, solve_single_qubit_fixed_point,
    solve_variational,
};
use polaron_core::two_emitter::{
    collective_eigenrates, collective_rates, exponential_integral_e1, lamb_shift_scaling, params_for_regime, scaling_rates, Regime,
    TwoEmitterParams,
};
use polaron_core::{scaling_prefactor, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Report {
    failed: Vec<usize>,
}

impl Report {
    fn line(&mut self, id: usize, name: &str, pass: bool, detail: String) {
        println!("{} [{id:>2}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id);
        }
    }
}

fn polaron(args: &[&str], out: &Path) -> Duration {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_polaron"))
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .expect("binary runs");
    assert!(status.success(), "polaron {args:?} exited with {status}");
    start.elapsed()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

fn groundstate_sweep(report: &mut Report) {
    let dir = tempfile::tempdir().unwrap();
    let elapsed = polaron(&["groundstate", "--alpha", "0:0.9:19"], dir.path());
    let (h, rows) = read_csv(&dir.path().join("groundstate.csv"));
    let (ia, iz, id) = (column(&h, "alpha"), column(&h, "sigma_z"), column(&h, "delta_r"));
    let z: Vec<f64> = rows.iter().map(|r| num(&r[iz])).collect();
    let identity = rows.iter().map(|r| (num(&r[iz]) + num(&r[id])).abs()).fold(0.0f64, f64::max);
    let monotone = z.windows(2).all(|w| w[1] > w[0]) && (z[0] + 1.0).abs() < 1e-12 && z.iter().all(|&v| v < 0.0);

    let mut oracle_err = 0.0f64;
    for r in rows.iter().filter(|r| num(&r[ia]) <= 0.2 + 1e-12) {
        let a = num(&r[ia]);
        let bath = miniature_bath(a).unwrap();
        let basis = FockBasis::new(3, 8, 1).unwrap();
        let gs = exact_groundstate(&build_hamiltonian(&bath, &[1.0], &basis).unwrap()).unwrap();
        let sol = solve_single_qubit_fixed_point(&bath, 1.0, 1e-12, 10_000).unwrap();
        oracle_err = oracle_err.max((spin_z_expectation(&basis, &gs.vector, 0) - groundstate_polarization(&sol)[0]).abs());
    }
    let pass = monotone && identity < 1e-10 && elapsed.as_secs_f64() < 300.0 && oracle_err < 0.05;
    report.line(
        1,
        "groundstate sweep",
        pass,
        format!(
            "monotone {monotone} ({:.4} → {:.4}), max|σz+Δr| {identity:.1e}, runtime {:.1}s, oracle |Δσz| {oracle_err:.4}",
            z[0],
            z[z.len() - 1],
            elapsed.as_secs_f64()
        ),
    );
}

fn scaling_law(report: &mut Report) {
    let mut worst = 0.0f64;
    for i in 0..=11 {
        let a = 0.05 + 0.05 * i as f64;
        let implicit = delta_r_continuum_implicit(a, 1.0, 1e4, 1e-12).unwrap();
        let law = (scaling_prefactor() / 1e4).powf(a / (1.0 - a));
        worst = worst.max((implicit / law - 1.0).abs());
    }
    let half = delta_r_continuum_implicit(0.5, 1.0, 100.0, 1e-12).unwrap();
    let pass = worst < 0.03 && (half / 0.04842 - 1.0).abs() < 0.03;
    report.line(
        2,
        "scaling law",
        pass,
        format!("max rel. dev. {worst:.4} over α ∈ [0.05, 0.6]; Δr(0.5, Δ/ωc = 0.01) = {half:.5}"),
    );
}

fn decay_rates(report: &mut Report) {
    let dir = tempfile::tempdir().unwrap();
    let elapsed = polaron(&["emission", "--alpha", "0.05:0.3:6"], dir.path());
    let (h, rows) = read_csv(&dir.path().join("emission_rates.csv"));
    let cfg = ModelConfig::default();
    let omega_c = cfg.cutoff();
    let mut worst = 0.0f64;
    let mut flags = Vec::new();
    let mut detail = Vec::new();
    for r in &rows {
        let a = num(&r[column(&h, "alpha")]);
        let fit = num(&r[column(&h, "gamma_fit")]);
        let law = PI * a * delta_r_scaling_limit(a, 1.0, omega_c).unwrap();
        worst = worst.max((fit / law - 1.0).abs());
        detail.push(format!("{a:.2}:{fit:.3}/{law:.3}"));
        if r[column(&h, "monotone")] != "true" || r[column(&h, "revival_warning")] != "false" {
            flags.push(a);
        }
    }
    let pass = worst < 0.15 && flags.is_empty() && elapsed.as_secs_f64() < 600.0;
    report.line(
        3,
        "decay rate",
        pass,
        format!(
            "max rel. dev. {worst:.3} (α:fit/law {}), flagged {flags:?}, runtime {:.1}s",
            detail.join(" "),
            elapsed.as_secs_f64()
        ),
    );
}

fn emission_spectrum(report: &mut Report) {
    let cfg = ModelConfig::default();
    let spacing = DiscreteBath::build(&cfg).unwrap().mode_spacing();
    let mut pass = true;
    let mut detail = Vec::new();
    for a in [0.1, 0.2, 0.3, 0.4] {
        let run = spontaneous_emission_run(&cfg, a, 0.8 * cfg.length() / cfg.speed, 0.1).unwrap();
        let (k, _) = run.final_density().iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).unwrap();
        let peak = run.omega_signed[k].abs();
        pass &= (peak - run.delta_r).abs() <= spacing;
        detail.push(format!("α {a}: peak {peak:.3} vs Δr {:.3}", run.delta_r));
    }
    report.line(4, "emission spectrum peak", pass, format!("{} (spacing {spacing:.4})", detail.join(", ")));
}

fn scattering(report: &mut Report) {
    let cfg = ModelConfig::single_emitter(0.1);
    let res = run_scattering(&cfg, None, None).unwrap();
    let bath = DiscreteBath::build(&cfg).unwrap();
    let spec = WavepacketSpec::default_for(cfg.length(), res.delta_r, cfg.speed);
    // well inside the packet: free |α_k|² at least 1% of its maximum
    let reach = 10f64.ln().sqrt() / spec.width;
    let inside = |k: f64| (k - spec.carrier).abs() <= reach;

    let modes: Vec<_> = res.supported().filter(|m| inside(m.momentum)).collect();
    let unitarity = modes.iter().map(|m| (m.transmission + m.reflection - 1.0).abs()).fold(0.0f64, f64::max);
    let best = modes.iter().max_by(|a, b| a.reflection.total_cmp(&b.reflection)).unwrap();
    let spacing = bath.mode_spacing();
    let phase: Vec<(f64, f64)> =
        unwrapped_reflection_phase(&res).into_iter().filter(|p| modes.iter().any(|m| m.omega == p.0)).collect();
    let jump = phase.last().unwrap().1 - phase[0].1;

    let peak_ok = (best.omega - res.delta_r).abs() <= spacing;
    let jump_ok = (jump.abs() - PI).abs() <= 0.3;
    let unit_ok = unitarity <= 0.02;
    report.line(
        5,
        "scattering at α = 0.1",
        peak_ok && jump_ok && unit_ok,
        format!(
            "argmax R at ω = {:.3} vs Δr {:.3} (spacing {spacing:.4}) {}; phase jump {jump:.3} {}; max|T+R−1| {unitarity:.4} over {} modes {}",
            best.omega,
            res.delta_r,
            ok(peak_ok),
            ok(jump_ok),
            modes.len(),
            ok(unit_ok)
        ),
    );
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "out of tolerance"
    }
}

fn nonmarkovian_pole(report: &mut Report) {
    let mut worst = 0.0f64;
    for a in [0.0, 0.1, 0.3, 0.49] {
        worst = worst.max((peak_ratio(a).unwrap() - (1.0 - 2.0 * a).sqrt()).abs());
    }
    let boundary = propagator_peak(0.5, 1.0).unwrap();
    report.line(
        6,
        "non-Markovian pole",
        worst < 1e-8 && boundary.abs() < 1e-8,
        format!("max|εm/Δr − √(1−2α)| {worst:.1e}, εm(α = 0.5) = {boundary:.1e}"),
    );
}

fn unitarity(report: &mut Report) {
    let cfg = ModelConfig::single_emitter(0.2);
    let dynamics = spontaneous_emission_run(&cfg, 0.2, 100.0, 0.5).unwrap().norm_error;
    let scattering = run_scattering(&ModelConfig::single_emitter(0.1), None, Some(100.0)).unwrap().norm_error;

    let bath = miniature_bath(0.2).unwrap();
    let basis = FockBasis::new(3, 6, 1).unwrap();
    let h = build_hamiltonian(&bath, &[1.0], &basis).unwrap();
    let psi = basis_vector(&basis, 1, &[1, 0, 2]);
    let oracle = (exact_evolve(&h, &psi, 100.0).unwrap().norm_squared() - 1.0).abs();

    // two-qubit ℍ_P as well
    let two = ModelConfig { qubit_positions: vec![4.5, 5.5], qubit_gaps: vec![1.0, 1.0], ..ModelConfig::single_emitter(0.1) };
    let bath2 = DiscreteBath::build(&two).unwrap();
    let sol2 = solve_variational(&bath2, &two.qubit_gaps, None).unwrap();
    let hp = assemble_hp(&sol2, &bath2).unwrap();
    let init = ExcitationVector::spin_excited(hp.num_spin, bath2.num_modes(), 0);
    let two_qubit = (hp.propagator(&init).at(100.0).norm_sqr() - 1.0).abs();

    let worst = dynamics.max(scattering).max(oracle).max(two_qubit);
    report.line(
        7,
        "unitarity at t = 100/Δ",
        worst < 1e-10,
        format!("dynamics {dynamics:.1e}, two-qubit {two_qubit:.1e}, scattering {scattering:.1e}, oracle {oracle:.1e}"),
    );
}

fn random_bath(rng: &mut ChaCha8Rng, modes: usize, qubits: usize, alpha: f64) -> DiscreteBath {
    let spacing = 0.5;
    let freqs: Vec<f64> = (0..modes).map(|k| 0.4 + spacing * k as f64 + rng.gen_range(0.0..0.2)).collect();
    let couplings = CMatrix::from_fn(qubits, modes, |_, k| {
        Complex64::from_polar((alpha * freqs[k] * spacing / 2.0).sqrt(), rng.gen_range(0.0..2.0 * PI))
    });
    DiscreteBath::from_modes(freqs, couplings, 1.0).unwrap()
}

fn variational_bound(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut min_gap = f64::INFINITY;
    for case in 0..20 {
        let modes = 2 + case % 2;
        let qubits = 1 + (case / 2) % 2;
        let alpha = rng.gen_range(0.0..0.3);
        let gaps: Vec<f64> = (0..qubits).map(|_| rng.gen_range(0.5..1.5)).collect();
        let bath = random_bath(&mut rng, modes, qubits, alpha);
        let basis = FockBasis::new(modes, if modes == 2 { 12 } else { 8 }, qubits).unwrap();
        let e0 = exact_groundstate(&build_hamiltonian(&bath, &gaps, &basis).unwrap()).unwrap().energy;
        let e = solve_variational(&bath, &gaps, None).unwrap().groundstate_energy;
        min_gap = min_gap.min(e - e0);
    }
    let mut exact_err = 0.0f64;
    for qubits in [1, 2] {
        let bath = random_bath(&mut rng, 2, qubits, 0.25);
        let gaps = vec![0.0; qubits];
        let basis = FockBasis::new(2, 22, qubits).unwrap();
        let e0 = exact_groundstate(&build_hamiltonian(&bath, &gaps, &basis).unwrap()).unwrap().energy;
        exact_err = exact_err.max((solve_variational(&bath, &gaps, None).unwrap().groundstate_energy - e0).abs());
    }
    report.line(
        8,
        "variational bound",
        min_gap >= -1e-10 && exact_err < 1e-10,
        format!("min(εP − E0) over 20 instances {min_gap:.2e}; |εP − E0| at Δ = 0 {exact_err:.1e}"),
    );
}

fn two_emitter(report: &mut Report) {
    let (alpha, wc) = (0.2, 1e4);
    let dr = delta_r_scaling_limit(alpha, 1.0, wc).unwrap();
    let p = params_for_regime(alpha, 1.0, wc, Regime::LargeDistance, 3.0).unwrap();
    let (gi, _) = collective_rates(&p);
    let rate_err = (gi / (PI * alpha * dr) - 1.0)
        .abs()
        .max((scaling_rates(alpha, 1.0, wc, Regime::LargeDistance).unwrap() / (PI * alpha * dr) - 1.0).abs());
    let shift_err = (lamb_shift_scaling(alpha, 1.0, wc, Regime::LargeDistance).unwrap() / (-alpha * dr) - 1.0).abs();

    // zeros of γ12(d), located by bisection, for a ζ ≠ 1 parameter set
    let q = TwoEmitterParams::new(0.1, 0.6, -0.45, 0.0, 100.0, 1.0).unwrap();
    let g12 = |d: f64| collective_rates(&q.at_distance(d).unwrap()).1;
    let mut zero_err = 0.0f64;
    for n in 0..4 {
        let predicted = (2 * n + 1) as f64 * PI / (2.0 * q.delta_r * q.zeta);
        let (mut lo, mut hi) = (predicted * 0.9, predicted * 1.1);
        assert!(g12(lo) * g12(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g12(lo) * g12(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        zero_err = zero_err.max((0.5 * (lo + hi) - predicted).abs());
    }

    let mut eig_err = 0.0f64;
    for d in [0.0, 0.7, 2.3, 5.0] {
        let (g, g12) = collective_rates(&q.at_distance(d).unwrap());
        let (sup, sub) = collective_eigenrates(-0.05, g, 0.13, g12);
        eig_err = eig_err.max((sup - (g + g12)).abs()).max((sub - (g - g12)).abs());
    }
    let e1 = exponential_integral_e1(Complex64::new(1.0, 0.0)).unwrap();
    let e1_err = (e1.re - 0.2193839).abs().max(e1.im.abs());

    let pass = rate_err < 1e-10 && shift_err < 1e-10 && zero_err < 1e-6 && eig_err < 1e-10 && e1_err < 1e-6;
    report.line(
        9,
        "two-emitter analytics",
        pass,
        format!(
            "J_I = 0 rate {rate_err:.1e}, shift {shift_err:.1e}; γ12 zeros {zero_err:.1e}; eigenrates {eig_err:.1e}; E1(1) = {:.7}",
            e1.re
        ),
    );
}

fn determinism(report: &mut Report) {
    let runs = [
        vec!["groundstate", "--alpha", "0:0.9:10", "--seed", "5"],
        vec!["spectrum", "--alpha", "0.1:0.2:2", "--seed", "5"],
        vec!["scattering", "--alpha", "0.1", "--seed", "5"],
        vec!["two-emitter", "--alpha", "0.2", "--omega-c", "100", "--seed", "5"],
    ];
    let mut mismatched = Vec::new();
    let mut files = 0;
    for args in &runs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        polaron(args, a.path());
        polaron(args, b.path());
        for entry in std::fs::read_dir(a.path()).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "csv") {
                files += 1;
                let other = b.path().join(path.file_name().unwrap());
                if std::fs::read(&path).unwrap() != std::fs::read(&other).unwrap() {
                    mismatched.push(path.file_name().unwrap().to_string_lossy().into_owned());
                }
            }
        }
    }
    report.line(
        10,
        "determinism",
        mismatched.is_empty() && files > 0,
        format!("{files} CSV files compared, mismatched {mismatched:?}"),
    );
}

fn main() {
    // `cargo test -- --list` and filters: nothing to enumerate here
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut report = Report { failed: Vec::new() };
    groundstate_sweep(&mut report);
    scaling_law(&mut report);
    decay_rates(&mut report);
    emission_spectrum(&mut report);
    scattering(&mut report);
    nonmarkovian_pole(&mut report);
    unitarity(&mut report);
    variational_bound(&mut report);
    two_emitter(&mut report);
    determinism(&mut report);
    println!("acceptance: {} of 10 criteria pass; failing {:?}", 10 - report.failed.len(), report.failed);
}
