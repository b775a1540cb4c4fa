use num_complex::Complex64;
use polaron_core::dynamics::{assemble_hp, evolve, ExcitationVector};
use polaron_core::linalg::CMatrix;
use polaron_core::model::{DiscreteBath, ModelConfig};
use polaron_core::oracle::{basis_vector, polaron_frame_map, polaron_frame_unmap, FockBasis};
use polaron_core::static_polaron::{delta_r_scaling_limit, ising_parameters, solve_single_qubit_fixed_point};
use polaron_core::two_emitter::{collective_eigenrates, exponential_integral_e1};
use proptest::prelude::*;

fn small_bath(alpha: f64) -> DiscreteBath {
    DiscreteBath::build(&ModelConfig { num_segments: 41, line_length: 4.0, alpha, qubit_positions: vec![2.0], ..Default::default() })
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn renormalized_gap_stays_in_range(alpha in 0.0f64..0.9, gap in 0.1f64..2.0) {
        let sol = solve_single_qubit_fixed_point(&small_bath(alpha), gap, 1e-11, 20_000).unwrap();
        prop_assert!(sol.delta_r() > 0.0 && sol.delta_r() <= gap);
        prop_assert!(sol.groundstate_energy <= -0.5 * sol.delta_r() + 1e-12);
    }

    #[test]
    fn evolution_preserves_norm(alpha in 0.0f64..0.5, t in 0.0f64..200.0) {
        let bath = small_bath(alpha);
        let sol = solve_single_qubit_fixed_point(&bath, 1.0, 1e-11, 20_000).unwrap();
        let hp = assemble_hp(&sol, &bath).unwrap();
        let psi = evolve(&ExcitationVector::spin_excited(1, bath.num_modes(), 0), &hp, t);
        prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ising_matrix_is_symmetric(seed in 0u64..1000) {
        let cfg = ModelConfig {
            num_segments: 21,
            line_length: 3.0,
            alpha: 0.2,
            qubit_gaps: vec![1.0, 1.0],
            qubit_positions: vec![0.5, 1.7],
            ..Default::default()
        };
        let bath = DiscreteBath::build(&cfg).unwrap();
        let f = CMatrix::from_fn(2, bath.num_modes(), |i, k| {
            let x = ((seed as usize * 31 + i * 7 + k * 13) % 97) as f64 / 97.0;
            Complex64::from_polar(0.1 * x, 6.0 * x)
        });
        let (xi, j) = ising_parameters(&f, &bath).unwrap();
        prop_assert!((j[(0, 1)] - j[(1, 0)]).abs() == 0.0);
        prop_assert!(xi.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn frame_map_round_trip(re in -0.3f64..0.3, im in -0.3f64..0.3, spin in 0usize..2) {
        let basis = FockBasis::new(1, 20, 1).unwrap();
        let f = CMatrix::from_element(1, 1, Complex64::new(re, im));
        let v = basis_vector(&basis, spin, &[1]);
        let lab = polaron_frame_map(&v, &f, &basis).unwrap();
        prop_assert!(lab.leakage.abs() < 1e-8);
        let back = polaron_frame_unmap(&lab.vector, &f, &basis).unwrap();
        prop_assert!((back.vector - v).norm() < 1e-8);
    }

    #[test]
    fn e1_reflection_symmetry(re in -6.0f64..6.0, im in 0.01f64..8.0) {
        let z = Complex64::new(re, im);
        let a = exponential_integral_e1(z).unwrap();
        let b = exponential_integral_e1(z.conj()).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn collective_rates_bracket(gamma in 0.0f64..1.0, frac in -1.0f64..1.0, g12 in -1.0f64..1.0, delta in 0.1f64..2.0) {
        let g12c = gamma * frac;
        let (plus, minus) = collective_eigenrates(delta, gamma, g12, g12c);
        prop_assert!((plus - (gamma + g12c)).abs() < 1e-10);
        prop_assert!((minus - (gamma - g12c)).abs() < 1e-10);
    }

    #[test]
    fn scaling_law_is_monotone(a in 0.01f64..0.9, b in 0.01f64..0.9) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let d_lo = delta_r_scaling_limit(lo, 1.0, 100.0).unwrap();
        let d_hi = delta_r_scaling_limit(hi, 1.0, 100.0).unwrap();
        prop_assert!(d_hi <= d_lo);
    }
}

#[test]
fn scaling_exponent_from_log_fit() {
    // ln Δ_r is linear in ln(Δ/ω_c) with slope 1/(1−α) in the scaling limit
    for alpha in [0.1, 0.3, 0.5] {
        let pts: Vec<(f64, f64)> = [1e3, 1e4, 1e5, 1e6]
            .iter()
            .map(|&wc: &f64| {
                let dr = polaron_core::static_polaron::delta_r_continuum_implicit(alpha, 1.0, wc, 1e-12).unwrap();
                ((1.0 / wc).ln(), dr.ln())
            })
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
        let slope = sxy / sxx;
        let r2 = sxy * sxy / (sxx * syy);
        assert!(r2 > 0.999, "α = {alpha}: R² = {r2}");
        assert!((slope - alpha / (1.0 - alpha)).abs() < 0.02, "α = {alpha}: slope {slope}");
    }
}
