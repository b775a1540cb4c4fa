//! One-excitation dynamics on top of the polaron groundstate.
//!
//! The amplitudes live in the basis
//! `{ |0⟩⊗|ψ_e^s⟩ (s = 1…N_e),  a_k†|0⟩⊗|ψ_gs⟩ (one per mode) }`
//! in the polaron frame, where `ψ_e^s` are the excited eigenvectors of the
//! effective spin Hamiltonian. The groundstate amplitude `α_gs` decouples and
//! is carried along unchanged.

mod emission;
mod markov;

pub use emission::{fit_decay_rate, spontaneous_emission_run, DecayFit, EmissionRun, FitWindow};
pub use markov::{
    coherent_incoherent_boundary, markovian_rate_lamb, memory_kernel, peak_ratio, propagator_peak, resolvent,
    Resolvent,
};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermiticity_error, max_abs, CMatrix, CVector, Eigh};
use crate::model::DiscreteBath;
use crate::spin::{apply_x, apply_y};
use crate::static_polaron::{effective_spin_hamiltonian, PolaronSolution};

/// Amplitudes of the one-excitation sector at time `time`.
#[derive(Clone, Debug, Serialize)]
pub struct ExcitationVector {
    pub time: f64,
    pub gs_amp: Complex64,
    pub spin_amps: CVector,
    pub photon_amps: CVector,
}

impl ExcitationVector {
    pub fn zeros(num_spin: usize, num_modes: usize) -> Self {
        Self {
            time: 0.0,
            gs_amp: Complex64::new(0.0, 0.0),
            spin_amps: CVector::zeros(num_spin),
            photon_amps: CVector::zeros(num_modes),
        }
    }

    /// Spin excitation `s` occupied, everything else empty.
    pub fn spin_excited(num_spin: usize, num_modes: usize, s: usize) -> Self {
        let mut v = Self::zeros(num_spin, num_modes);
        v.spin_amps[s] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn norm_sqr(&self) -> f64 {
        self.gs_amp.norm_sqr() + self.spin_amps.norm_squared() + self.photon_amps.norm_squared()
    }

    /// Spin and photon amplitudes stacked in the ℍ_P ordering.
    pub fn dynamic_part(&self) -> CVector {
        let ne = self.spin_amps.len();
        let m = self.photon_amps.len();
        CVector::from_fn(ne + m, |i, _| if i < ne { self.spin_amps[i] } else { self.photon_amps[i - ne] })
    }

    fn with_dynamic_part(&self, v: &CVector, time: f64) -> Self {
        let ne = self.spin_amps.len();
        Self {
            time,
            gs_amp: self.gs_amp,
            spin_amps: v.rows(0, ne).into_owned(),
            photon_amps: v.rows(ne, v.len() - ne).into_owned(),
        }
    }
}

/// Hermitian generator `ℍ_P` with its eigendecomposition cached.
#[derive(Clone, Debug)]
pub struct EffectiveHamiltonian {
    pub matrix: CMatrix,
    pub eig: Eigh,
    pub gs_energy_offset: f64,
    /// Number of spin excitations `N_e = 2^{N_s} − 1`.
    pub num_spin: usize,
}

impl EffectiveHamiltonian {
    pub fn from_matrix(matrix: CMatrix, num_spin: usize, gs_energy_offset: f64) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() < num_spin {
            return Err(Error::DimensionMismatch(format!(
                "generator is {}×{} with {} spin slots",
                matrix.nrows(),
                matrix.ncols(),
                num_spin
            )));
        }
        let err = hermiticity_error(&matrix);
        if err > 1e-12 * max_abs(&matrix).max(1e-300) {
            return Err(Error::NotHermitian(err));
        }
        // remove the rounding-level anti-Hermitian part before diagonalising
        let matrix = (&matrix + matrix.adjoint()) * Complex64::from(0.5);
        let eig = Eigh::new(&matrix);
        Ok(Self { matrix, eig, gs_energy_offset, num_spin })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_modes(&self) -> usize {
        self.dim() - self.num_spin
    }

    pub fn photon_block(&self) -> CMatrix {
        let ne = self.num_spin;
        let m = self.num_modes();
        self.matrix.view((ne, ne), (m, m)).into_owned()
    }

    /// Precompute `V†α(0)` for repeated evaluation at many times.
    pub fn propagator<'a>(&'a self, initial: &ExcitationVector) -> Propagator<'a> {
        Propagator { hp: self, weights: self.eig.vectors.ad_mul(&initial.dynamic_part()), initial: initial.clone() }
    }
}

/// Evaluates `α(t) = V e^{−iEt} V† α(0)` for one fixed initial state.
pub struct Propagator<'a> {
    hp: &'a EffectiveHamiltonian,
    weights: CVector,
    initial: ExcitationVector,
}

impl Propagator<'_> {
    pub fn at(&self, dt: f64) -> ExcitationVector {
        let phased = CVector::from_fn(self.weights.len(), |i, _| {
            self.weights[i] * Complex64::from_polar(1.0, -self.hp.eig.values[i] * dt)
        });
        let v = &self.hp.eig.vectors * phased;
        self.initial.with_dynamic_part(&v, self.initial.time + dt)
    }

    /// Only the first spin amplitude, at `O(dim)` cost.
    pub fn spin_amp(&self, s: usize, dt: f64) -> Complex64 {
        let row = self.hp.eig.vectors.row(s);
        row.iter()
            .zip(self.weights.iter())
            .zip(self.hp.eig.values.iter())
            .map(|((v, w), e)| v * w * Complex64::from_polar(1.0, -e * dt))
            .sum()
    }
}

/// Spin-sector eigenbasis `(energies, vectors)` of the effective spin
/// Hamiltonian; column 0 is the polaron spin groundstate.
fn spin_eigenbasis(solution: &PolaronSolution, bath: &DiscreteBath) -> Result<(Vec<f64>, CMatrix)> {
    let h = effective_spin_hamiltonian(&solution.displacements, bath, &solution.gaps)?;
    if solution.num_qubits() == 1 {
        // H_s is diagonal; keep |↓⟩ as the groundstate even at a tie
        return Ok((vec![h[(0, 0)].re, h[(1, 1)].re], CMatrix::identity(2, 2)));
    }
    let mut eig = Eigh::new(&h);
    // use the solver's groundstate so that both agree on degenerate levels
    let gs = &solution.spin_state;
    let overlap = eig.vectors.column(0).dotc(gs).norm();
    if (overlap - 1.0).abs() > 1e-8 && eig.values[1] - eig.values[0] > 1e-10 * eig.values[0].abs().max(1.0) {
        return Err(Error::InvalidConfig("spin state is not the groundstate of H_s".into()));
    }
    eig.vectors.set_column(0, gs);
    Ok((eig.values.iter().copied().collect(), eig.vectors))
}

/// Block structure of `ℍ_P`.
#[derive(Clone, Debug)]
pub struct WwCouplings {
    /// `Δ_s = ε_e^s − ε_gs`.
    pub spin_gaps: Vec<f64>,
    /// `𝔤_{ks}`: photon row `k`, spin column `s`.
    pub spin_photon: CMatrix,
    /// `𝔣_{kk'}`; Hermitian, real symmetric when every coupling phase is real.
    pub mode_mixing: CMatrix,
}

/// Matrix elements of the polaron-frame Hamiltonian in the one-excitation
/// sector, evaluated over the coherent polaron vacuum.
pub fn ww_couplings(solution: &PolaronSolution, bath: &DiscreteBath) -> Result<WwCouplings> {
    let ns = solution.num_qubits();
    let m = bath.num_modes();
    if bath.num_qubits() != ns || solution.displacements.ncols() != m {
        return Err(Error::DimensionMismatch("solution and bath disagree".into()));
    }
    let (energies, vecs) = spin_eigenbasis(solution, bath)?;
    let dim = energies.len();
    let ne = dim - 1;
    let f = &solution.displacements;
    let dr = &solution.renormalized_gaps;

    let to_c = |j: usize| vecs.column(j).into_owned();
    let gs = to_c(0);
    let z: Vec<f64> = (0..ns)
        .map(|i| gs.iter().enumerate().map(|(s, a)| a.norm_sqr() * crate::spin::z_value(s, i)).sum())
        .collect();

    // ⟨ψ_e^s|σ^x_i|ψ_gs⟩ and ⟨ψ_e^s|σ^y_i|ψ_gs⟩
    let mut sx = DMatrix::<Complex64>::zeros(ne, ns);
    let mut sy = DMatrix::<Complex64>::zeros(ne, ns);
    for i in 0..ns {
        let xg = apply_x(&gs, i);
        let yg = apply_y(&gs, i);
        for s in 0..ne {
            let e = to_c(s + 1);
            sx[(s, i)] = e.dotc(&xg);
            sy[(s, i)] = e.dotc(&yg);
        }
    }

    // ℍ[s, k] = Σ_i [ i Δ_r,i f_ik* ⟨σ^y_i⟩ + h_ik* ⟨σ^x_i⟩ ],  h = g − ωf
    let mut spin_photon = CMatrix::zeros(m, ne);
    for k in 0..m {
        for s in 0..ne {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..ns {
                let h = bath.couplings[(i, k)] - f[(i, k)] * bath.frequencies[k];
                acc += Complex64::i() * dr[i] * f[(i, k)].conj() * sy[(s, i)] + h.conj() * sx[(s, i)];
            }
            spin_photon[(k, s)] = acc.conj();
        }
    }

    // 𝔣_{kk'} = −2 Σ_i Δ_r,i ⟨σ^z_i⟩ f_ik f_ik'*
    let mode_mixing = CMatrix::from_fn(m, m, |k, q| {
        (0..ns).map(|i| f[(i, k)] * f[(i, q)].conj() * (-2.0 * dr[i] * z[i])).sum()
    });

    Ok(WwCouplings { spin_gaps: energies[1..].iter().map(|e| e - energies[0]).collect(), spin_photon, mode_mixing })
}

/// `ℍ_P` for the given polaron groundstate.
pub fn assemble_hp(solution: &PolaronSolution, bath: &DiscreteBath) -> Result<EffectiveHamiltonian> {
    let ww = ww_couplings(solution, bath)?;
    let ne = ww.spin_gaps.len();
    let m = bath.num_modes();
    let mut h = CMatrix::zeros(ne + m, ne + m);
    for (s, &d) in ww.spin_gaps.iter().enumerate() {
        h[(s, s)] = Complex64::from(d);
    }
    for k in 0..m {
        for s in 0..ne {
            h[(ne + k, s)] = ww.spin_photon[(k, s)];
            h[(s, ne + k)] = ww.spin_photon[(k, s)].conj();
        }
        for q in 0..m {
            h[(ne + k, ne + q)] = ww.mode_mixing[(k, q)];
        }
        h[(ne + k, ne + k)] += bath.frequencies[k];
    }
    EffectiveHamiltonian::from_matrix(h, ne, solution.groundstate_energy)
}

/// Diagonalise the mode-mixing block: returns `M` (unitary; orthogonal for a
/// real symmetric input) and the shifts `Δω` with `M† 𝔣 M = diag(Δω)`.
pub fn diagonalize_mode_mixing(mixing: &CMatrix) -> Result<(CMatrix, Vec<f64>)> {
    if !mixing.is_square() {
        return Err(Error::DimensionMismatch("mode-mixing block must be square".into()));
    }
    let err = hermiticity_error(mixing);
    if err > 1e-10 * max_abs(mixing).max(1.0) {
        return Err(Error::NotHermitian(err));
    }
    if max_abs(mixing) == 0.0 {
        let n = mixing.nrows();
        return Ok((CMatrix::identity(n, n), vec![0.0; n]));
    }
    let eig = Eigh::new(mixing);
    Ok((eig.vectors, eig.values.iter().copied().collect()))
}

/// `α(t)` from `α(0)` under `ℍ_P`.
pub fn evolve(state: &ExcitationVector, hp: &EffectiveHamiltonian, t: f64) -> ExcitationVector {
    hp.propagator(state).at(t)
}

/// Per-mode photon density `|α_k|²` labelled by `ω_n·sign(k_n)`.
pub fn photon_density(state: &ExcitationVector, bath: &DiscreteBath) -> Vec<(f64, f64)> {
    state
        .photon_amps
        .iter()
        .enumerate()
        .map(|(k, a)| (signed_frequency(bath, k), a.norm_sqr()))
        .collect()
}

pub(crate) fn signed_frequency(bath: &DiscreteBath, k: usize) -> f64 {
    let sign = if bath.momenta[k] < 0.0 { -1.0 } else { 1.0 };
    sign * bath.frequencies[k]
}
