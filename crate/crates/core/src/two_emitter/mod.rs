//! Closed-form Markovian analytics for two identical emitters.

mod expint;

pub use expint::exponential_integral_e1;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::scaling_prefactor;
use crate::static_polaron::delta_r_scaling_limit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    LargeDistance,
    ShortDistance,
}

/// `η = {√(ζ+1)(1/ζ+1) + √(ζ−1)(1/ζ−1)}/√(2ζ)`.
pub fn eta(zeta: f64) -> f64 {
    ((zeta + 1.0).sqrt() * (1.0 / zeta + 1.0) + (zeta - 1.0).max(0.0).sqrt() * (1.0 / zeta - 1.0)) / (2.0 * zeta).sqrt()
}

/// `χ = ζη/(1+ζ²)`.
pub fn chi(zeta: f64) -> f64 {
    zeta * eta(zeta) / (1.0 + zeta * zeta)
}

/// Parameters of the Markovian two-emitter equations.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TwoEmitterParams {
    pub distance: f64,
    pub delta_r: f64,
    /// Ising coupling `J_I` from virtual photon exchange.
    pub ising: f64,
    /// `ζ = (1 + J_I²/Δ_r²)^{1/2}`.
    pub zeta: f64,
    pub chi: f64,
    pub eta: f64,
    pub alpha: f64,
    pub omega_c: f64,
    pub speed: f64,
    /// `Δ_r = 0`: both emitters frozen.
    pub localized: bool,
}

impl TwoEmitterParams {
    pub fn new(alpha: f64, delta_r: f64, ising: f64, distance: f64, omega_c: f64, speed: f64) -> Result<Self> {
        for (name, v) in [
            ("alpha", alpha),
            ("delta_r", delta_r),
            ("ising", ising),
            ("distance", distance),
            ("omega_c", omega_c),
            ("speed", speed),
        ] {
            ensure_finite(name, v)?;
        }
        if alpha < 0.0 {
            return Err(Error::Negative { name: "alpha", value: alpha });
        }
        if distance < 0.0 {
            return Err(Error::Negative { name: "distance", value: distance });
        }
        if delta_r < 0.0 {
            return Err(Error::Negative { name: "delta_r", value: delta_r });
        }
        if omega_c <= 0.0 || speed <= 0.0 {
            return Err(Error::InvalidConfig("ω_c and v must be positive".into()));
        }
        let localized = delta_r == 0.0;
        let zeta = if localized { 1.0 } else { (1.0 + (ising / delta_r).powi(2)).sqrt() };
        Ok(Self {
            distance,
            delta_r,
            ising,
            zeta,
            chi: chi(zeta),
            eta: eta(zeta),
            alpha,
            omega_c,
            speed,
            localized,
        })
    }

    pub fn at_distance(&self, distance: f64) -> Result<Self> {
        Self::new(self.alpha, self.delta_r, self.ising, distance, self.omega_c, self.speed)
    }

    /// Phase `Δ_r ζ d / v` picked up between the emitters.
    pub fn phase(&self) -> f64 {
        self.delta_r * self.zeta * self.distance / self.speed
    }
}

/// `(J_I, Δ_r)` in the two analytic limits.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LimitParams {
    pub ising: f64,
    pub delta_r: f64,
    pub localized: bool,
    /// Short-distance formulas assume `αω_c/Δ ≫ 1`; set when `αω_c/Δ < 10`.
    pub validity_warning: bool,
}

/// Large distance: `J_I = 0`, single-emitter law. Short distance:
/// `J_I = −αω_c`, `Δ_r = Δ(p₀Δ/ω_c)^{2α/(1−2α)}`, `p₀ = (p/α)^{1/2}`.
pub fn limit_params(alpha: f64, gap: f64, omega_c: f64, regime: Regime) -> Result<LimitParams> {
    ensure_finite("alpha", alpha)?;
    ensure_finite("gap", gap)?;
    ensure_finite("omega_c", omega_c)?;
    if alpha < 0.0 {
        return Err(Error::Negative { name: "alpha", value: alpha });
    }
    if gap <= 0.0 || omega_c <= 0.0 {
        return Err(Error::InvalidConfig("need Δ > 0 and ω_c > 0".into()));
    }
    match regime {
        Regime::LargeDistance => {
            let dr = delta_r_scaling_limit(alpha, gap, omega_c)?;
            Ok(LimitParams { ising: 0.0, delta_r: dr, localized: dr == 0.0, validity_warning: false })
        }
        Regime::ShortDistance => {
            let validity_warning = alpha * omega_c / gap < 10.0;
            if alpha == 0.0 {
                return Ok(LimitParams { ising: 0.0, delta_r: gap, localized: false, validity_warning });
            }
            if alpha >= 0.5 {
                return Ok(LimitParams { ising: -alpha * omega_c, delta_r: 0.0, localized: true, validity_warning });
            }
            let p0 = (scaling_prefactor() / alpha).sqrt();
            let dr = gap * (p0 * gap / omega_c).powf(2.0 * alpha / (1.0 - 2.0 * alpha));
            Ok(LimitParams { ising: -alpha * omega_c, delta_r: dr, localized: false, validity_warning })
        }
    }
}

/// Parameters at distance `d` for one of the analytic limits.
pub fn params_for_regime(alpha: f64, gap: f64, omega_c: f64, regime: Regime, distance: f64) -> Result<TwoEmitterParams> {
    let lp = limit_params(alpha, gap, omega_c, regime)?;
    TwoEmitterParams::new(alpha, lp.delta_r, lp.ising, distance, omega_c, 1.0)
}

/// `γ_i = J(Δ_r ζ) χ²` with the Ohmic `J(ω) = παω`, and
/// `γ_12 = γ_i cos(Δ_r ζ d/v)`.
pub fn collective_rates(params: &TwoEmitterParams) -> (f64, f64) {
    let gamma = PI * params.alpha * params.delta_r * params.zeta * params.chi * params.chi;
    (gamma, gamma * params.phase().cos())
}

/// Scaling-limit individual rate in either regime.
pub fn scaling_rates(alpha: f64, gap: f64, omega_c: f64, regime: Regime) -> Result<f64> {
    let lp = limit_params(alpha, gap, omega_c, regime)?;
    if lp.localized || alpha == 0.0 {
        return Ok(0.0);
    }
    Ok(match regime {
        Regime::LargeDistance => PI * alpha * lp.delta_r,
        Regime::ShortDistance => {
            let z0 = (1.0 + (alpha * omega_c / lp.delta_r).powi(2)).sqrt();
            let c0 = chi(z0);
            PI * alpha * c0 * c0 * z0 * lp.delta_r
        }
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LambShift {
    pub value: f64,
    /// `E₁` was evaluated on the negative real axis (real part of the
    /// principal branch used).
    pub on_branch_cut: bool,
}

fn e1_exp(z: Complex64) -> Complex64 {
    exponential_integral_e1(z).map(|e| e * z.exp()).unwrap_or(Complex64::new(f64::INFINITY, 0.0))
}

/// `f_L(x) = (ζ²/(1+ζ²)) Re{e^x E₁(x) − e^{−xζ²} E₁(−xζ²)}`.
pub fn f_lamb(x: f64, zeta: f64) -> f64 {
    let z2 = zeta * zeta;
    z2 / (1.0 + z2) * (e1_exp(Complex64::new(x, 0.0)) - e1_exp(Complex64::new(-x * z2, 0.0))).re
}

/// `δ_1 = δ_2 = −α(ηχ/2)Δ_r(1 − f_L(Δ_r/(ω_c ζ)))`.
pub fn lamb_shifts(params: &TwoEmitterParams) -> Result<LambShift> {
    if params.localized || params.alpha == 0.0 {
        return Ok(LambShift { value: 0.0, on_branch_cut: false });
    }
    let x = params.delta_r / (params.omega_c * params.zeta);
    let value = -params.alpha * params.eta * params.chi / 2.0 * params.delta_r * (1.0 - f_lamb(x, params.zeta));
    ensure_finite("lamb shift", value)?;
    Ok(LambShift { value, on_branch_cut: true })
}

/// Scaling-limit Lamb shift in either regime.
pub fn lamb_shift_scaling(alpha: f64, gap: f64, omega_c: f64, regime: Regime) -> Result<f64> {
    let lp = limit_params(alpha, gap, omega_c, regime)?;
    if lp.localized || alpha == 0.0 {
        return Ok(0.0);
    }
    Ok(match regime {
        Regime::LargeDistance => -alpha * lp.delta_r,
        Regime::ShortDistance => {
            let z0 = (1.0 + (alpha * omega_c / lp.delta_r).powi(2)).sqrt();
            let z2 = z0 * z0;
            -alpha * eta(z0) * chi(z0) / 2.0 * (1.0 - z2 * z2.ln() / (1.0 + z2)) * lp.delta_r
        }
    })
}

/// Photon-mediated coherent coupling, split into its parts.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CoherentCoupling {
    pub total: f64,
    /// Virtual (off-shell) part `J_I`.
    pub ising: f64,
    /// `(π/2) ζ χ² α Δ_r sin(Δ_r ζ d/v)`.
    pub on_shell: f64,
    /// `δg_12`.
    pub correction: f64,
    /// An `E₁` argument sat on the negative real axis.
    pub on_branch_cut: bool,
    pub localized: bool,
}

/// `f_I(z) = Im{E₁(z)e^z}`.
pub fn f_imag(z: Complex64) -> f64 {
    e1_exp(z).im
}

/// `f_R(z) = Re{E₁(z)e^z}`.
pub fn f_real(z: Complex64) -> f64 {
    e1_exp(z).re
}

/// `g_12 = J_I + (π/2)ζχ²αΔ_r sin(Δ_rζd/v) + δg_12(z)` with
/// `z = iΔ_r d/(vζ) + Δ_r/(ζω_c)` and
/// `δg_12(z) = −(χ²αΔ_r/2)(1 + Im z·f_I(z) − ζ(f_R(z) − f_R(−z*ζ²)))`.
pub fn coherent_coupling_g12(params: &TwoEmitterParams) -> CoherentCoupling {
    if params.localized {
        return CoherentCoupling {
            total: params.ising,
            ising: params.ising,
            on_shell: 0.0,
            correction: 0.0,
            on_branch_cut: false,
            localized: true,
        };
    }
    let p = params;
    let c2 = p.chi * p.chi;
    let on_shell = PI / 2.0 * p.zeta * c2 * p.alpha * p.delta_r * p.phase().sin();
    let z = Complex64::new(p.delta_r / (p.zeta * p.omega_c), p.delta_r * p.distance / (p.speed * p.zeta));
    let mirrored = -z.conj() * (p.zeta * p.zeta);
    let correction = if p.alpha == 0.0 {
        0.0
    } else {
        -c2 * p.alpha * p.delta_r / 2.0 * (1.0 + z.im * f_imag(z) - p.zeta * (f_real(z) - f_real(mirrored)))
    };
    CoherentCoupling {
        total: p.ising + on_shell + correction,
        ising: p.ising,
        on_shell,
        correction,
        on_branch_cut: mirrored.im == 0.0,
        localized: false,
    }
}

/// Coefficient matrix `M` of `i∂_t α' = M α'`.
fn markov_matrix(delta: f64, gamma: f64, g12: f64, gamma12: f64) -> [[Complex64; 2]; 2] {
    let d = Complex64::new(delta, -gamma / 2.0);
    let o = Complex64::new(g12, -gamma12 / 2.0);
    [[d, o], [o, d]]
}

/// `α'(t) = exp(−iMt) α'(0)` for identical emitters.
pub fn evolve_two_qubit_markovian(
    delta: f64,
    gamma: f64,
    g12: f64,
    gamma12: f64,
    initial: [Complex64; 2],
    t: f64,
) -> [Complex64; 2] {
    let m = markov_matrix(delta, gamma, g12, gamma12);
    let a = [[m[0][0] * (-Complex64::i() * t), m[0][1] * (-Complex64::i() * t)], [
        m[1][0] * (-Complex64::i() * t),
        m[1][1] * (-Complex64::i() * t),
    ]];
    // exp(A) = e^{tr/2} (cosh q I + sinh q / q B), B = A − (tr/2) I, q² = −det B
    let half = (a[0][0] + a[1][1]) / 2.0;
    let b = [[a[0][0] - half, a[0][1]], [a[1][0], a[1][1] - half]];
    let q = (-(b[0][0] * b[1][1] - b[0][1] * b[1][0])).sqrt();
    let sinc = if q.norm() < 1e-8 { Complex64::new(1.0, 0.0) + q * q / 6.0 } else { q.sinh() / q };
    let pre = half.exp();
    let cosh = q.cosh();
    let e = [
        [pre * (cosh + sinc * b[0][0]), pre * sinc * b[0][1]],
        [pre * sinc * b[1][0], pre * (cosh + sinc * b[1][1])],
    ];
    [e[0][0] * initial[0] + e[0][1] * initial[1], e[1][0] * initial[0] + e[1][1] * initial[1]]
}

/// Decay rates `−2 Im λ` of the symmetric and antisymmetric eigenmodes.
pub fn collective_eigenrates(delta: f64, gamma: f64, g12: f64, gamma12: f64) -> (f64, f64) {
    let m = markov_matrix(delta, gamma, g12, gamma12);
    let sym = m[0][0] + m[0][1];
    let anti = m[0][0] - m[0][1];
    (-2.0 * sym.im, -2.0 * anti.im)
}
