//! Markovian rate and shift, the memory kernel and the single-excitation
//! resolvent of the continuum model.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::quad;
use crate::static_polaron::delta_r_scaling_limit;

/// `(γ₁, δ₁) = (παΔ_r, −αΔ_r)` with `Δ_r` from the scaling-limit law.
pub fn markovian_rate_lamb(alpha: f64, gap: f64, omega_c: f64) -> Result<(f64, f64)> {
    let dr = delta_r_scaling_limit(alpha, gap, omega_c)?;
    Ok((PI * alpha * dr, -alpha * dr))
}

/// `K(t) = ∫₀^∞ dω (J(ω)/2π) (2Δ_r/(ω+Δ_r)) e^{−i(ω−Δ_r)t}` with
/// `J = παω e^{−ω/ω_c}`, integrated numerically up to `50ω_c`.
pub fn memory_kernel(t: f64, alpha: f64, delta_r: f64, omega_c: f64) -> Result<Complex64> {
    ensure_finite("t", t)?;
    ensure_finite("alpha", alpha)?;
    if t < 0.0 {
        return Err(Error::Negative { name: "t", value: t });
    }
    if delta_r <= 0.0 || omega_c <= 0.0 {
        return Err(Error::InvalidConfig("memory kernel needs Δ_r > 0 and ω_c > 0".into()));
    }
    if alpha == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let integrand = |w: f64| {
        let j = PI * alpha * w * (-w / omega_c).exp();
        Complex64::from_polar(j / (2.0 * PI) * 2.0 * delta_r / (w + delta_r), -(w - delta_r) * t)
    };
    let upper = 50.0 * omega_c;
    // split so that each piece holds a bounded number of oscillations
    let period = if t > 0.0 { 2.0 * PI / t } else { upper };
    let pieces = ((upper / period) / 8.0).ceil().clamp(1.0, 4000.0) as usize;
    let mut edges = vec![0.0, delta_r.min(upper)];
    let width = upper / pieces as f64;
    for p in 1..=pieces {
        let e = p as f64 * width;
        if e > delta_r {
            edges.push(e);
        }
    }
    let total = edges
        .windows(2)
        .map(|e| quad::integrate_complex(integrand, e[0], e[1], 1e-11, 2000).value)
        .sum();
    Ok(total)
}

/// Propagator, level shift and level broadening at one energy.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Resolvent {
    pub propagator: Complex64,
    pub shift: f64,
    pub width: f64,
}

/// `δ(ε) = −2αΔ_r²/(Δ_r + ε)`, `γ(ε) = J(ε)(2Δ_r/(ε+Δ_r))²` with the Ohmic
/// `J(ε) = παε` for `ε ≥ 0` (zero below), and
/// `G(ε) = 1/(ε − Δ_r − δ(ε) + iγ(ε)/2)`.
pub fn resolvent(eps: f64, alpha: f64, delta_r: f64) -> Result<Resolvent> {
    ensure_finite("eps", eps)?;
    ensure_finite("alpha", alpha)?;
    ensure_finite("delta_r", delta_r)?;
    if eps + delta_r == 0.0 {
        return Err(Error::Pole(eps));
    }
    let shift = -2.0 * alpha * delta_r * delta_r / (delta_r + eps);
    let j = if eps > 0.0 { PI * alpha * eps } else { 0.0 };
    let width = j * (2.0 * delta_r / (eps + delta_r)).powi(2);
    let den = Complex64::new(eps - delta_r - shift, 0.5 * width);
    if den.norm() == 0.0 {
        return Err(Error::Pole(eps));
    }
    Ok(Resolvent { propagator: den.inv(), shift, width })
}

/// Real root `ε_m ∈ [0, Δ_r]` of `ε − Δ_r − δ(ε) = 0`, found by bisection;
/// `None` when the propagator has no maximum at positive energy.
pub fn propagator_peak(alpha: f64, delta_r: f64) -> Option<f64> {
    if !(alpha.is_finite() && delta_r.is_finite()) || delta_r <= 0.0 || alpha < 0.0 {
        return None;
    }
    let f = |e: f64| e - delta_r + 2.0 * alpha * delta_r * delta_r / (delta_r + e);
    let (mut lo, mut hi) = (0.0, delta_r);
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Some(0.0);
    }
    if flo > 0.0 || fhi < 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * delta_r {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// `ε_m/Δ_r`; equals `√(1−2α)` below the boundary.
pub fn peak_ratio(alpha: f64) -> Option<f64> {
    propagator_peak(alpha, 1.0)
}

/// Smallest `α` at which the propagator peak reaches zero energy, located by
/// bisection on the numerical peak.
pub fn coherent_incoherent_boundary() -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match peak_ratio(mid) {
            Some(r) if r > 0.0 => lo = mid,
            _ => hi = mid,
        }
    }
    0.5 * (lo + hi)
}
