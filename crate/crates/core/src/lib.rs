//! Static and dynamical polaron ansatz for the few-impurity spin-boson model.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] builds the discretised transmission line (modes, dispersion,
//!   couplings) and the continuum description with an exponential cutoff.
//! * [`static_polaron`] finds the variational polaron groundstate, either by
//!   the single-qubit self-consistency on the renormalised gap or by direct
//!   minimisation for several qubits.
//! * [`dynamics`] assembles the one-excitation generator in the polaron frame,
//!   propagates it exactly, and provides Markovian / resolvent analytics.
//! * [`scattering`] runs single-photon wavepackets against an emitter and
//!   extracts transmission and reflection coefficients.
//! * [`two_emitter`] holds the closed-form two-qubit rates, shifts and
//!   photon-mediated couplings, including a complex exponential integral.
//! * [`oracle`] is an exact-diagonalisation benchmark on truncated Fock spaces.
//!
//! Units: `v = 1` and the first qubit gap `Δ₁ = 1`; lengths in the run files
//! are measured in `λ₀ = 2πv/Δ₁`.

pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod optim;
pub mod oracle;
pub mod quad;
pub mod scattering;
pub mod spin;
pub mod static_polaron;
pub mod two_emitter;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `p = e^{1+γ_E}`, the prefactor of the scaling-limit renormalisation law.
pub fn scaling_prefactor() -> f64 {
    (1.0 + EULER_GAMMA).exp()
}
