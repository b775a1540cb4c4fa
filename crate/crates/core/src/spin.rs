//! Pauli operators on `N_s` spins-½ in the computational basis.
//!
//! Basis index `s` has bit `i` set when qubit `i` points up (`σ^z_i = +1`),
//! so index 0 is the all-down state.

use num_complex::Complex64;

use crate::linalg::CVector;

/// Largest register for dense spin matrices.
pub const MAX_SPINS: usize = 12;

#[inline]
pub fn z_value(state: usize, qubit: usize) -> f64 {
    if state >> qubit & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `σ^x_i |b⟩`.
pub fn apply_x(b: &CVector, qubit: usize) -> CVector {
    CVector::from_fn(b.len(), |s, _| b[s ^ (1 << qubit)])
}

/// `σ^y_i |b⟩` with `σ^y|↓⟩ = −i|↑⟩`, `σ^y|↑⟩ = i|↓⟩`.
pub fn apply_y(b: &CVector, qubit: usize) -> CVector {
    CVector::from_fn(b.len(), |s, _| {
        let partner = b[s ^ (1 << qubit)];
        if s >> qubit & 1 == 1 {
            -Complex64::i() * partner
        } else {
            Complex64::i() * partner
        }
    })
}

/// `σ^z_i |b⟩`.
pub fn apply_z(b: &CVector, qubit: usize) -> CVector {
    CVector::from_fn(b.len(), |s, _| b[s] * z_value(s, qubit))
}
