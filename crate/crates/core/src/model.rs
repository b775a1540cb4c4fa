//! Transmission-line bath: discretised modes and the continuum description.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::linalg::CMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BathKind {
    Discrete,
    Continuum,
}

fn unit_speed() -> f64 {
    1.0
}

/// Physical parameters of a run.
///
/// Lengths (`line_length`, `qubit_positions`) are stored in units of
/// `λ₀ = 2πv/Δ₁`. The propagation speed is fixed to 1 and is not part of the
/// run file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: BathKind,
    #[serde(rename = "N")]
    pub num_segments: usize,
    #[serde(rename = "L_over_lambda0")]
    pub line_length: f64,
    #[serde(skip, default = "unit_speed")]
    pub speed: f64,
    pub alpha: f64,
    #[serde(rename = "gaps")]
    pub qubit_gaps: Vec<f64>,
    #[serde(rename = "positions")]
    pub qubit_positions: Vec<f64>,
    /// Only meaningful for [`BathKind::Continuum`]; derived for discrete lines.
    pub omega_c: Option<f64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kind: BathKind::Discrete,
            num_segments: 301,
            line_length: 10.0,
            speed: 1.0,
            alpha: 0.0,
            qubit_gaps: vec![1.0],
            qubit_positions: vec![5.0],
            omega_c: None,
        }
    }
}

impl ModelConfig {
    /// Default discrete line with a single emitter in the middle.
    pub fn single_emitter(alpha: f64) -> Self {
        Self { alpha, ..Self::default() }
    }

    pub fn continuum(alpha: f64, gap: f64, omega_c: f64) -> Self {
        Self {
            kind: BathKind::Continuum,
            alpha,
            qubit_gaps: vec![gap],
            omega_c: Some(omega_c),
            ..Self::default()
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self { alpha, ..self.clone() }
    }

    pub fn num_qubits(&self) -> usize {
        self.qubit_gaps.len()
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("L_over_lambda0", self.line_length)?;
        ensure_finite("alpha", self.alpha)?;
        ensure_finite("speed", self.speed)?;
        for &g in &self.qubit_gaps {
            ensure_finite("gaps", g)?;
        }
        for &x in &self.qubit_positions {
            ensure_finite("positions", x)?;
        }
        if self.qubit_gaps.is_empty() {
            return Err(Error::InvalidConfig("at least one qubit is required".into()));
        }
        if self.qubit_gaps.len() != self.qubit_positions.len() {
            return Err(Error::InvalidConfig(format!(
                "{} gaps but {} positions",
                self.qubit_gaps.len(),
                self.qubit_positions.len()
            )));
        }
        if self.num_segments < 2 {
            return Err(Error::InvalidConfig(format!("N = {} < 2", self.num_segments)));
        }
        if self.line_length <= 0.0 {
            return Err(Error::InvalidConfig(format!("L = {} must be positive", self.line_length)));
        }
        if self.speed <= 0.0 {
            return Err(Error::InvalidConfig("v must be positive".into()));
        }
        if self.alpha < 0.0 {
            return Err(Error::Negative { name: "alpha", value: self.alpha });
        }
        if let Some(&bad) = self.qubit_gaps.iter().find(|&&g| g <= 0.0) {
            return Err(Error::InvalidConfig(format!("qubit gap {bad} must be positive")));
        }
        if let Some(&bad) = self.qubit_positions.iter().find(|&&x| !(0.0..self.line_length).contains(&x)) {
            return Err(Error::InvalidConfig(format!("qubit position {bad} outside [0, L)")));
        }
        if self.kind == BathKind::Continuum {
            match self.omega_c {
                Some(wc) if wc.is_finite() && wc > 0.0 => {}
                _ => return Err(Error::InvalidConfig("continuum model needs omega_c > 0".into())),
            }
        }
        Ok(())
    }

    /// `λ₀ = 2πv/Δ₁` in absolute units.
    pub fn lambda0(&self) -> f64 {
        2.0 * PI * self.speed / self.qubit_gaps[0]
    }

    /// Line length in absolute units.
    pub fn length(&self) -> f64 {
        self.line_length * self.lambda0()
    }

    /// Qubit positions in absolute units.
    pub fn positions(&self) -> Vec<f64> {
        let l0 = self.lambda0();
        self.qubit_positions.iter().map(|x| x * l0).collect()
    }

    /// Cutoff frequency: `vN/L` for a discrete line, the configured value otherwise.
    pub fn cutoff(&self) -> f64 {
        match self.kind {
            BathKind::Discrete => self.speed * self.num_segments as f64 / self.length(),
            BathKind::Continuum => self.omega_c.unwrap_or(f64::INFINITY),
        }
    }

    /// Overall coupling `g = √(πvα)`.
    pub fn coupling(&self) -> f64 {
        (PI * self.speed * self.alpha).sqrt()
    }
}

/// `g = √(πvα)`.
pub fn coupling_from_alpha(alpha: f64, speed: f64) -> Result<f64> {
    ensure_finite("alpha", alpha)?;
    if alpha < 0.0 {
        return Err(Error::Negative { name: "alpha", value: alpha });
    }
    if speed <= 0.0 {
        return Err(Error::Negative { name: "speed", value: speed });
    }
    Ok((PI * speed * alpha).sqrt())
}

/// `α = g²/(πv)`.
pub fn alpha_from_coupling(g: f64, speed: f64) -> Result<f64> {
    ensure_finite("g", g)?;
    if g < 0.0 {
        return Err(Error::Negative { name: "g", value: g });
    }
    if speed <= 0.0 {
        return Err(Error::Negative { name: "speed", value: speed });
    }
    Ok(g * g / (PI * speed))
}

/// Mode table of a discretised line, or any other finite bosonic bath.
#[derive(Clone, Debug)]
pub struct DiscreteBath {
    /// Integer labels `n` (`k_n = 2πn/L`).
    pub mode_numbers: Vec<i64>,
    pub momenta: Vec<f64>,
    pub frequencies: Vec<f64>,
    /// `g_{i,n}`: one row per qubit, one column per mode.
    pub couplings: CMatrix,
    pub line_length: f64,
    pub speed: f64,
    pub cutoff: f64,
}

impl DiscreteBath {
    /// Discretised line with `ω_n = 2ω_c|sin(πn/N)|` and
    /// `g_{i,n} = g √(ω_n/2L) e^{i k_n x_i}`.
    ///
    /// Odd `N` uses `n ∈ {0, ±1, …, ±(N−1)/2}`; even `N` uses
    /// `{−N/2+1, …, N/2}` so the band edge is counted once.
    pub fn build(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        if config.kind != BathKind::Discrete {
            return Err(Error::InvalidConfig("build_discrete_bath needs a discrete model".into()));
        }
        let n_seg = config.num_segments as i64;
        let (lo, hi) = if n_seg % 2 == 1 {
            (-(n_seg - 1) / 2, (n_seg - 1) / 2)
        } else {
            (-n_seg / 2 + 1, n_seg / 2)
        };
        let length = config.length();
        let cutoff = config.cutoff();
        let g = config.coupling();
        let positions = config.positions();

        let mode_numbers: Vec<i64> = (lo..=hi).collect();
        let momenta: Vec<f64> = mode_numbers.iter().map(|&n| 2.0 * PI * n as f64 / length).collect();
        let frequencies: Vec<f64> = mode_numbers
            .iter()
            .map(|&n| 2.0 * cutoff * (PI * n as f64 / n_seg as f64).sin().abs())
            .collect();
        let couplings = CMatrix::from_fn(positions.len(), mode_numbers.len(), |i, m| {
            let amp = g * (frequencies[m] / (2.0 * length)).sqrt();
            Complex64::from_polar(amp, momenta[m] * positions[i])
        });
        Ok(Self { mode_numbers, momenta, frequencies, couplings, line_length: length, speed: config.speed, cutoff })
    }

    /// Custom bath from explicit frequencies and couplings (e.g. a few-mode
    /// miniature for exact diagonalisation).
    pub fn from_modes(frequencies: Vec<f64>, couplings: CMatrix, line_length: f64) -> Result<Self> {
        if couplings.ncols() != frequencies.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} frequencies but {} coupling columns",
                frequencies.len(),
                couplings.ncols()
            )));
        }
        if let Some(&w) = frequencies.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidConfig(format!("mode frequency {w} must be finite and non-negative")));
        }
        let m = frequencies.len();
        let cutoff = frequencies.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            mode_numbers: (1..=m as i64).collect(),
            momenta: frequencies.clone(),
            frequencies,
            couplings,
            line_length,
            speed: 1.0,
            cutoff,
        })
    }

    pub fn num_modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.couplings.nrows()
    }

    /// Spacing of the discrete momenta in frequency units, `2πv/L`.
    pub fn mode_spacing(&self) -> f64 {
        2.0 * PI * self.speed / self.line_length
    }

    /// Index of the mode carrying `−k_n`, if present.
    pub fn partner(&self, index: usize) -> Option<usize> {
        let target = -self.mode_numbers[index];
        self.mode_numbers.iter().position(|&n| n == target)
    }

    /// Same line with every coupling scaled to a new `α`.
    pub fn with_alpha(&self, old_alpha: f64, new_alpha: f64) -> Self {
        let scale = if old_alpha > 0.0 { (new_alpha / old_alpha).sqrt() } else { 0.0 };
        Self { couplings: &self.couplings * Complex64::from(scale), ..self.clone() }
    }

    /// Single-emitter reduction: each `±k` pair only couples to the qubit
    /// through one combination with coupling `√(|g_k|² + |g_{−k}|²)`; the
    /// orthogonal combination and the `n = 0` mode decouple and are dropped.
    pub fn symmetric_reduction(&self) -> Result<Self> {
        if self.num_qubits() != 1 {
            return Err(Error::InvalidConfig("symmetric reduction is defined for one emitter".into()));
        }
        let mut freqs = Vec::new();
        let mut coups = Vec::new();
        let mut labels = Vec::new();
        let mut momenta = Vec::new();
        for (m, &n) in self.mode_numbers.iter().enumerate() {
            if n < 0 && self.partner(m).is_some() {
                continue;
            }
            let mut weight = self.couplings[(0, m)].norm_sqr();
            if n > 0 {
                if let Some(p) = self.partner(m) {
                    weight += self.couplings[(0, p)].norm_sqr();
                }
            }
            if self.frequencies[m] == 0.0 {
                continue;
            }
            freqs.push(self.frequencies[m]);
            coups.push(Complex64::from(weight.sqrt()));
            labels.push(n.abs());
            momenta.push(self.momenta[m].abs());
        }
        Ok(Self {
            mode_numbers: labels,
            momenta,
            couplings: CMatrix::from_row_slice(1, freqs.len(), &coups),
            frequencies: freqs,
            line_length: self.line_length,
            speed: self.speed,
            cutoff: self.cutoff,
        })
    }

    /// Keep only the listed modes.
    pub fn select_modes(&self, indices: &[usize]) -> Self {
        let pick = |v: &[f64]| indices.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let couplings = CMatrix::from_fn(self.num_qubits(), indices.len(), |q, m| self.couplings[(q, indices[m])]);
        Self {
            mode_numbers: indices.iter().map(|&i| self.mode_numbers[i]).collect(),
            momenta: pick(&self.momenta),
            frequencies: pick(&self.frequencies),
            couplings,
            line_length: self.line_length,
            speed: self.speed,
            cutoff: self.cutoff,
        }
    }

    /// `|g_{i,n}|²` as a real matrix.
    pub fn coupling_weights(&self) -> DMatrix<f64> {
        self.couplings.map(|z| z.norm_sqr())
    }
}

/// `g e^{−ω_k/2ω_c} √(ω_k/2L) e^{ikx_i}` with `ω_k = v|k|`.
pub fn continuum_coupling(k: f64, qubit: usize, config: &ModelConfig) -> Result<Complex64> {
    ensure_finite("k", k)?;
    config.validate()?;
    if config.kind != BathKind::Continuum {
        return Err(Error::InvalidConfig("continuum_coupling needs a continuum model".into()));
    }
    let x = *config
        .positions()
        .get(qubit)
        .ok_or_else(|| Error::InvalidConfig(format!("no qubit with index {qubit}")))?;
    let wc = config.cutoff();
    let w = config.speed * k.abs();
    let amp = config.coupling() * (-w / (2.0 * wc)).exp() * (w / (2.0 * config.length())).sqrt();
    Ok(Complex64::from_polar(amp, k * x))
}

/// Ohmic spectral density.
///
/// Continuum: `J(ω) = παω e^{−ω/ω_c}`. Discrete: the low-frequency form
/// `παω`, which only approximates the binned density for `ω ≪ ω_c`.
pub fn spectral_density(omega: f64, config: &ModelConfig) -> Result<f64> {
    ensure_finite("omega", omega)?;
    if omega < 0.0 {
        return Err(Error::Negative { name: "omega", value: omega });
    }
    let ohmic = PI * config.alpha * omega;
    Ok(match config.kind {
        BathKind::Continuum => ohmic * (-omega / config.cutoff()).exp(),
        BathKind::Discrete => ohmic,
    })
}

/// `J(ω) = 2π Σ_k |g_{ik}|² δ(ω − ω_k)` averaged over windows of
/// `modes_per_bin` consecutive positive-frequency levels (each level holds
/// the `±k` pair). Returns `(window centre, J)` pairs.
pub fn binned_spectral_density(bath: &DiscreteBath, qubit: usize, modes_per_bin: usize) -> Vec<(f64, f64)> {
    let mut levels: Vec<(f64, f64)> = Vec::new();
    for (m, &n) in bath.mode_numbers.iter().enumerate() {
        if n <= 0 {
            continue;
        }
        let mut w2 = bath.couplings[(qubit, m)].norm_sqr();
        if let Some(p) = bath.partner(m) {
            w2 += bath.couplings[(qubit, p)].norm_sqr();
        }
        levels.push((bath.frequencies[m], w2));
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut out = Vec::new();
    let mut start = 1;
    while start + modes_per_bin < levels.len() {
        let end = start + modes_per_bin; // exclusive
        let lo = 0.5 * (levels[start - 1].0 + levels[start].0);
        let hi = 0.5 * (levels[end - 1].0 + levels[end].0);
        let weight: f64 = levels[start..end].iter().map(|l| l.1).sum();
        out.push((0.5 * (lo + hi), 2.0 * PI * weight / (hi - lo)));
        start = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_mode_and_band_edge() {
        let cfg = ModelConfig { num_segments: 300, alpha: 0.1, ..ModelConfig::default() };
        let bath = DiscreteBath::build(&cfg).unwrap();
        let zero = bath.mode_numbers.iter().position(|&n| n == 0).unwrap();
        assert_eq!(bath.frequencies[zero], 0.0);
        assert_eq!(bath.couplings[(0, zero)].norm(), 0.0);
        let edge = bath.mode_numbers.iter().position(|&n| n == 150).unwrap();
        assert_relative_eq!(bath.frequencies[edge], 2.0 * bath.cutoff, max_relative = 1e-14);
        assert_eq!(bath.num_modes(), 300);
    }

    #[test]
    fn odd_line_is_symmetric() {
        let bath = DiscreteBath::build(&ModelConfig::single_emitter(0.2)).unwrap();
        assert_eq!(bath.num_modes(), 301);
        for m in 0..bath.num_modes() {
            let p = bath.partner(m).unwrap();
            assert_eq!(bath.frequencies[m], bath.frequencies[p]);
            assert!(bath.frequencies[m] >= 0.0);
        }
    }

    #[test]
    fn decoupled_limit() {
        let bath = DiscreteBath::build(&ModelConfig::single_emitter(0.0)).unwrap();
        assert!(bath.couplings.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn coupling_magnitude_independent_of_position() {
        let a = ModelConfig { qubit_positions: vec![1.3], alpha: 0.3, ..ModelConfig::default() };
        let b = ModelConfig { qubit_positions: vec![7.9], alpha: 0.3, ..ModelConfig::default() };
        let ba = DiscreteBath::build(&a).unwrap();
        let bb = DiscreteBath::build(&b).unwrap();
        for m in 0..ba.num_modes() {
            assert_relative_eq!(ba.couplings[(0, m)].norm(), bb.couplings[(0, m)].norm(), max_relative = 1e-14);
        }
    }

    #[test]
    fn linear_dispersion_at_low_momenta() {
        let bath = DiscreteBath::build(&ModelConfig::default()).unwrap();
        let limit = 301 / 20;
        for (m, &n) in bath.mode_numbers.iter().enumerate() {
            if n != 0 && n.abs() <= limit {
                let lin = bath.speed * bath.momenta[m].abs();
                assert!((bath.frequencies[m] - lin).abs() / lin < 0.01);
            }
        }
    }

    #[test]
    fn binned_density_is_ohmic() {
        let cfg = ModelConfig::single_emitter(0.1);
        let bath = DiscreteBath::build(&cfg).unwrap();
        let bins = binned_spectral_density(&bath, 0, 4);
        let mut checked = 0;
        for (w, j) in bins {
            if w >= 0.1 && w <= 0.5 * bath.cutoff {
                let ohmic = PI * cfg.alpha * w;
                assert!((j - ohmic).abs() / ohmic < 0.05, "ω = {w}: {j} vs {ohmic}");
                checked += 1;
            }
        }
        assert!(checked > 5);
    }

    #[test]
    fn continuum_coupling_values() {
        let cfg = ModelConfig::continuum(0.2, 1.0, 5.0);
        assert_eq!(continuum_coupling(0.0, 0, &cfg).unwrap().norm(), 0.0);
        let a = continuum_coupling(1.7, 0, &cfg).unwrap();
        let b = continuum_coupling(-1.7, 0, &cfg).unwrap();
        assert_relative_eq!(a.norm(), b.norm(), max_relative = 1e-15);
        // at ω_k = ω_c: |g(k)|² = g² (ω_c / 2L) e^{-1}
        let at_cut = continuum_coupling(5.0, 0, &cfg).unwrap();
        let g2 = cfg.coupling().powi(2);
        assert_relative_eq!(at_cut.norm_sqr(), g2 * 5.0 / (2.0 * cfg.length()) * (-1.0f64).exp(), max_relative = 1e-14);
        assert!(continuum_coupling(1.0, 0, &ModelConfig::default()).is_err());
    }

    #[test]
    fn spectral_density_values() {
        let disc = ModelConfig::single_emitter(0.1);
        assert_eq!(spectral_density(0.0, &disc).unwrap(), 0.0);
        assert_relative_eq!(spectral_density(1.0, &disc).unwrap(), 0.1 * PI, max_relative = 1e-15);
        assert!((spectral_density(1.0, &disc).unwrap() - 0.3142).abs() < 1e-4);
        assert!(spectral_density(-1.0, &disc).is_err());
        // continuum J peaks at ω_c
        let cont = ModelConfig::continuum(0.1, 1.0, 3.0);
        let j = |w: f64| spectral_density(w, &cont).unwrap();
        assert!(j(3.0) > j(2.99) && j(3.0) > j(3.01));
    }

    #[test]
    fn alpha_g_conversion() {
        assert_eq!(coupling_from_alpha(0.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(coupling_from_alpha(1.0 / PI, 1.0).unwrap(), 1.0, max_relative = 1e-15);
        assert!(coupling_from_alpha(-0.1, 1.0).is_err());
        assert!(alpha_from_coupling(-0.1, 1.0).is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = ModelConfig::default();
        c.qubit_gaps.clear();
        c.qubit_positions.clear();
        assert!(DiscreteBath::build(&c).is_err());
        let c = ModelConfig { alpha: f64::NAN, ..ModelConfig::default() };
        assert!(matches!(DiscreteBath::build(&c), Err(Error::NonFinite { .. })));
        let c = ModelConfig { qubit_positions: vec![11.0], ..ModelConfig::default() };
        assert!(DiscreteBath::build(&c).is_err());
    }

    #[test]
    fn run_file_keys() {
        let json = serde_json::to_value(ModelConfig::default()).unwrap();
        let mut keys: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["L_over_lambda0", "N", "alpha", "gaps", "kind", "omega_c", "positions"]);
    }

    #[test]
    fn reduction_preserves_total_weight() {
        let bath = DiscreteBath::build(&ModelConfig { num_segments: 11, alpha: 0.2, ..ModelConfig::default() }).unwrap();
        let red = bath.symmetric_reduction().unwrap();
        assert_eq!(red.num_modes(), 5);
        let full: f64 = bath.coupling_weights().iter().sum();
        let reduced: f64 = red.coupling_weights().iter().sum();
        assert_relative_eq!(full, reduced, max_relative = 1e-14);
    }

    proptest::proptest! {
        #[test]
        fn g_alpha_round_trip(g in 0.0f64..10.0, v in 0.1f64..5.0) {
            let back = coupling_from_alpha(alpha_from_coupling(g, v).unwrap(), v).unwrap();
            proptest::prop_assert!((back - g).abs() <= 1e-14 * g.max(1.0));
        }

        #[test]
        fn config_json_round_trip(alpha in 0.0f64..2.0, n in 2usize..999, l in 0.5f64..40.0) {
            let cfg = ModelConfig { alpha, num_segments: n, line_length: l, qubit_positions: vec![0.25 * l], ..ModelConfig::default() };
            let back: ModelConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
            proptest::prop_assert_eq!(back, cfg);
        }
    }
}
