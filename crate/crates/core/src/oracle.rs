//! Exact diagonalisation of the spin-boson Hamiltonian on a truncated Fock
//! space, used as ground truth for the variational results.
//!
//! Basis index = `spin_index · (n_max+1)^M + Σ_k n_k (n_max+1)^{M−1−k}`, i.e.
//! lexicographic over (spin configuration, occupations) with the first mode
//! most significant. Spin configurations follow [`crate::spin`].

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{lanczos_lowest, CMatrix, CVector, Eigh};
use crate::model::{DiscreteBath, ModelConfig};
use crate::spin::z_value;

pub const MAX_MODES: usize = 5;
pub const MAX_SPINS: usize = 2;
pub const MAX_DIMENSION: usize = 100_000;
/// Above this dimension the groundstate is found by Lanczos.
pub const DENSE_LIMIT: usize = 1024;
/// Largest dimension for which a full propagator is built.
pub const PROPAGATOR_LIMIT: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FockBasis {
    pub mode_count: usize,
    pub n_max: usize,
    pub spin_count: usize,
    pub dimension: usize,
}

impl FockBasis {
    pub fn new(mode_count: usize, n_max: usize, spin_count: usize) -> Result<Self> {
        if mode_count == 0 || mode_count > MAX_MODES {
            return Err(Error::InvalidConfig(format!("oracle supports 1..={MAX_MODES} modes, got {mode_count}")));
        }
        if spin_count == 0 || spin_count > MAX_SPINS {
            return Err(Error::InvalidConfig(format!("oracle supports 1..={MAX_SPINS} spins, got {spin_count}")));
        }
        let per = (n_max + 1) as u128;
        let dim = (1u128 << spin_count) * per.pow(mode_count as u32);
        if dim > MAX_DIMENSION as u128 {
            return Err(Error::DimensionOverflow(dim.min(usize::MAX as u128) as usize, MAX_DIMENSION));
        }
        Ok(Self { mode_count, n_max, spin_count, dimension: dim as usize })
    }

    fn photon_dim(&self) -> usize {
        (self.n_max + 1).pow(self.mode_count as u32)
    }

    fn stride(&self, mode: usize) -> usize {
        (self.n_max + 1).pow((self.mode_count - 1 - mode) as u32)
    }

    pub fn index(&self, spin: usize, occupations: &[usize]) -> usize {
        let photon = occupations.iter().fold(0, |acc, &n| acc * (self.n_max + 1) + n);
        spin * self.photon_dim() + photon
    }

    pub fn state(&self, index: usize) -> (usize, Vec<usize>) {
        let pd = self.photon_dim();
        let spin = index / pd;
        let mut rest = index % pd;
        let mut occ = vec![0; self.mode_count];
        for k in (0..self.mode_count).rev() {
            occ[k] = rest % (self.n_max + 1);
            rest /= self.n_max + 1;
        }
        (spin, occ)
    }
}

/// Sparse Hermitian matrix in coordinate form.
#[derive(Clone, Debug)]
pub struct OracleHamiltonian {
    pub dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl OracleHamiltonian {
    pub fn matvec(&self, v: &CVector) -> CVector {
        let mut out = CVector::zeros(self.dim);
        for &(r, c, x) in &self.entries {
            out[r] += x * v[c];
        }
        out
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        if self.dim > PROPAGATOR_LIMIT {
            return Err(Error::DimensionOverflow(self.dim, PROPAGATOR_LIMIT));
        }
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &(r, c, x) in &self.entries {
            m[(r, c)] += x;
        }
        Ok(m)
    }

    /// Gershgorin-type bound on `‖H‖`.
    pub fn norm_bound(&self) -> f64 {
        let mut rows = vec![0.0; self.dim];
        for &(r, _, x) in &self.entries {
            rows[r] += x.norm();
        }
        rows.into_iter().fold(0.0, f64::max)
    }
}

/// `H = Σ_i (Δ_i/2)σ^z_i + Σ_k ω_k a_k†a_k + Σ_ik σ^x_i (g_ik a_k† + g_ik* a_k)`
/// with ladder operators truncated at `n_max`.
pub fn build_hamiltonian(bath: &DiscreteBath, gaps: &[f64], basis: &FockBasis) -> Result<OracleHamiltonian> {
    if bath.num_modes() != basis.mode_count || bath.num_qubits() != basis.spin_count || gaps.len() != basis.spin_count {
        return Err(Error::DimensionMismatch(format!(
            "basis {}×{} vs bath {}×{} with {} gaps",
            basis.spin_count,
            basis.mode_count,
            bath.num_qubits(),
            bath.num_modes(),
            gaps.len()
        )));
    }
    let mut entries = Vec::new();
    let pd = basis.photon_dim();
    for idx in 0..basis.dimension {
        let (spin, occ) = basis.state(idx);
        let mut diag = 0.0;
        for (i, &d) in gaps.iter().enumerate() {
            diag += 0.5 * d * z_value(spin, i);
        }
        for (k, &n) in occ.iter().enumerate() {
            diag += bath.frequencies[k] * n as f64;
        }
        entries.push((idx, idx, Complex64::from(diag)));

        for i in 0..basis.spin_count {
            let flipped = (spin ^ (1 << i)) * pd + idx % pd;
            for (k, &n) in occ.iter().enumerate() {
                let g = bath.couplings[(i, k)];
                if g.norm() == 0.0 {
                    continue;
                }
                // column idx -> row with n+1 (creation) and n−1 (annihilation)
                if n < basis.n_max {
                    let row = flipped + basis.stride(k);
                    entries.push((row, idx, g * ((n + 1) as f64).sqrt()));
                }
                if n > 0 {
                    let row = flipped - basis.stride(k);
                    entries.push((row, idx, g.conj() * (n as f64).sqrt()));
                }
            }
        }
    }
    Ok(OracleHamiltonian { dim: basis.dimension, entries })
}

#[derive(Clone, Debug)]
pub struct ExactGroundstate {
    pub energy: f64,
    pub vector: CVector,
    pub residual: f64,
    /// Number of eigenvalues within `10⁻⁸‖H‖` of the lowest.
    pub multiplicity: usize,
}

/// Lowest eigenpair: dense up to [`DENSE_LIMIT`], Lanczos above.
pub fn exact_groundstate(h: &OracleHamiltonian) -> Result<ExactGroundstate> {
    let scale = h.norm_bound().max(1e-300);
    if h.dim <= DENSE_LIMIT {
        let eig = Eigh::new(&h.to_dense()?);
        let e0 = eig.values[0];
        let multiplicity = eig.values.iter().filter(|&&v| v - e0 <= 1e-8 * scale).count();
        let vector = eig.vectors.column(0).into_owned();
        let residual = (h.matvec(&vector) - &vector * Complex64::from(e0)).norm();
        return Ok(ExactGroundstate { energy: e0, vector, residual, multiplicity });
    }
    let res = lanczos_lowest(h.dim, |v| h.matvec(v), 1e-12, 300, 40);
    if res.residual > 1e-9 * scale {
        return Err(Error::NoConvergence { iterations: res.iterations, last: res.value, residual: res.residual });
    }
    Ok(ExactGroundstate { energy: res.value, vector: res.vector, residual: res.residual, multiplicity: res.multiplicity })
}

/// Eigendecomposition-based propagator for small oracle spaces.
pub struct ExactPropagator {
    eig: Eigh,
}

impl ExactPropagator {
    pub fn new(h: &OracleHamiltonian) -> Result<Self> {
        Ok(Self { eig: Eigh::new(&h.to_dense()?) })
    }

    pub fn evolve(&self, psi0: &CVector, t: f64) -> CVector {
        self.eig.propagate(psi0, t)
    }

    pub fn unitarity_error(&self) -> f64 {
        self.eig.unitarity_error()
    }
}

/// `ψ(t) = e^{−iHt} ψ₀`.
pub fn exact_evolve(h: &OracleHamiltonian, psi0: &CVector, t: f64) -> Result<CVector> {
    Ok(ExactPropagator::new(h)?.evolve(psi0, t))
}

/// Displacement operator `D(β)` restricted to `{|0⟩…|n_max⟩}`.
///
/// Columns follow `D|n+1⟩ = (a† − β*) D|n⟩ / √(n+1)` from the coherent state
/// `D|0⟩`; component `m` of column `n` only needs components `≤ m` of column
/// `n−1`, so the truncated block is exact.
pub fn displacement_matrix(beta: Complex64, n_max: usize) -> CMatrix {
    let dim = n_max + 1;
    let mut d = CMatrix::zeros(dim, dim);
    let mut coh = Complex64::from((-0.5 * beta.norm_sqr()).exp());
    for m in 0..dim {
        if m > 0 {
            coh *= beta / (m as f64).sqrt();
        }
        d[(m, 0)] = coh;
    }
    for n in 0..n_max {
        let scale = 1.0 / ((n + 1) as f64).sqrt();
        for m in 0..dim {
            let raise = if m > 0 { d[(m - 1, n)] * (m as f64).sqrt() } else { Complex64::new(0.0, 0.0) };
            d[(m, n + 1)] = (raise - beta.conj() * d[(m, n)]) * scale;
        }
    }
    d
}

/// Result of mapping a polaron-frame vector to the lab frame.
#[derive(Clone, Debug)]
pub struct MappedState {
    pub vector: CVector,
    /// `1 − ‖ψ_lab‖²`: weight pushed above `n_max`.
    pub leakage: f64,
    /// `leakage > 1%`.
    pub warning: bool,
}

fn hadamard_spin(v: &CVector, basis: &FockBasis) -> CVector {
    // rotate every spin between the σ^z and σ^x eigenbases (self-inverse)
    let pd = basis.photon_dim();
    let mut out = v.clone();
    for i in 0..basis.spin_count {
        let src = out.clone();
        let bit = 1 << i;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for idx in 0..basis.dimension {
            let spin = idx / pd;
            let partner = (spin ^ bit) * pd + idx % pd;
            out[idx] = if spin & bit == 0 {
                (src[idx] + src[partner]) * r
            } else {
                (src[partner] - src[idx]) * r
            };
        }
    }
    out
}

fn apply_displacements(v: &CVector, basis: &FockBasis, betas: &[Complex64], spin: usize) -> CVector {
    // product over modes of D(β_k) acting on the photon factor of one spin block
    let pd = basis.photon_dim();
    let mut block: CVector = v.rows(spin * pd, pd).into_owned();
    for (k, &b) in betas.iter().enumerate() {
        let d = displacement_matrix(b, basis.n_max);
        let stride = basis.stride(k);
        let mut next = CVector::zeros(pd);
        for p in 0..pd {
            let n = (p / stride) % (basis.n_max + 1);
            let base = p - n * stride;
            let x = block[p];
            if x.norm() == 0.0 {
                continue;
            }
            for m in 0..=basis.n_max {
                next[base + m * stride] += d[(m, n)] * x;
            }
        }
        block = next;
    }
    block
}

fn spin_conditioned_map(state: &CVector, f: &CMatrix, basis: &FockBasis, sign: f64) -> Result<MappedState> {
    if state.len() != basis.dimension || f.nrows() != basis.spin_count || f.ncols() != basis.mode_count {
        return Err(Error::DimensionMismatch("state or displacements do not match the basis".into()));
    }
    let pd = basis.photon_dim();
    // in the σ^x basis (bit set ⇔ σ^x = −1 after the rotation) the map is diagonal in spin
    let rotated = hadamard_spin(state, basis);
    let mut out = CVector::zeros(basis.dimension);
    for spin in 0..(1 << basis.spin_count) {
        let betas: Vec<Complex64> = (0..basis.mode_count)
            .map(|k| {
                (0..basis.spin_count)
                    .map(|i| {
                        let sx = if spin >> i & 1 == 0 { 1.0 } else { -1.0 };
                        f[(i, k)] * (sign * sx)
                    })
                    .sum()
            })
            .collect();
        let block = apply_displacements(&rotated, basis, &betas, spin);
        out.rows_mut(spin * pd, pd).copy_from(&block);
    }
    let out = hadamard_spin(&out, basis);
    let leakage = state.norm_squared() - out.norm_squared();
    Ok(MappedState { vector: out, leakage, warning: leakage > 0.01 * state.norm_squared() })
}

/// Apply `U_P†[f] = Π_k D_k(−Σ_i σ^x_i f_ik)` to a polaron-frame vector.
pub fn polaron_frame_map(state: &CVector, f: &CMatrix, basis: &FockBasis) -> Result<MappedState> {
    spin_conditioned_map(state, f, basis, -1.0)
}

/// Apply `U_P[f]`, the inverse of [`polaron_frame_map`].
pub fn polaron_frame_unmap(state: &CVector, f: &CMatrix, basis: &FockBasis) -> Result<MappedState> {
    spin_conditioned_map(state, f, basis, 1.0)
}

/// Basis vector `|occupations⟩ ⊗ |spin⟩`.
pub fn basis_vector(basis: &FockBasis, spin: usize, occupations: &[usize]) -> CVector {
    let mut v = CVector::zeros(basis.dimension);
    v[basis.index(spin, occupations)] = Complex64::new(1.0, 0.0);
    v
}

/// `⟨σ^z_i⟩` in a Fock-space vector.
pub fn spin_z_expectation(basis: &FockBasis, v: &CVector, qubit: usize) -> f64 {
    let pd = basis.photon_dim();
    v.iter().enumerate().map(|(idx, a)| a.norm_sqr() * z_value(idx / pd, qubit)).sum::<f64>() / v.norm_squared()
}

/// Three effective modes of a seven-segment line with `ω_c = 1`: the
/// `±k` pairs of a single emitter reduced to the combination it couples to.
pub fn miniature_bath(alpha: f64) -> Result<DiscreteBath> {
    let cfg = ModelConfig {
        num_segments: 7,
        line_length: 7.0 / (2.0 * std::f64::consts::PI),
        alpha,
        qubit_positions: vec![0.0],
        ..ModelConfig::default()
    };
    DiscreteBath::build(&cfg)?.symmetric_reduction()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single_mode(g: f64, w: f64) -> DiscreteBath {
        DiscreteBath::from_modes(vec![w], CMatrix::from_element(1, 1, Complex64::from(g)), 1.0).unwrap()
    }

    #[test]
    fn enumeration_round_trip() {
        let b = FockBasis::new(3, 4, 2).unwrap();
        assert_eq!(b.dimension, 4 * 125);
        for idx in 0..b.dimension {
            let (s, occ) = b.state(idx);
            assert_eq!(b.index(s, &occ), idx);
        }
        assert!(matches!(FockBasis::new(5, 9, 2), Err(Error::DimensionOverflow(..))));
    }

    #[test]
    fn decoupled_spectrum() {
        let bath = miniature_bath(0.0).unwrap();
        let basis = FockBasis::new(3, 3, 1).unwrap();
        let h = build_hamiltonian(&bath, &[1.0], &basis).unwrap();
        let dense = h.to_dense().unwrap();
        for i in 0..h.dim {
            for j in 0..h.dim {
                if i != j {
                    assert_eq!(dense[(i, j)].norm(), 0.0);
                }
            }
        }
        let gs = exact_groundstate(&h).unwrap();
        assert_relative_eq!(gs.energy, -0.5, epsilon = 1e-14);
        let best = gs.vector.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert_relative_eq!(best, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn displaced_oscillator() {
        let (g, w) = (0.5, 1.0);
        let basis = FockBasis::new(1, 30, 1).unwrap();
        let h = build_hamiltonian(&single_mode(g, w), &[0.0], &basis).unwrap();
        let gs = exact_groundstate(&h).unwrap();
        assert!((gs.energy + g * g / w).abs() < 1e-8);
        assert_eq!(gs.multiplicity, 2);
        let dense = h.to_dense().unwrap();
        assert_eq!(crate::linalg::hermiticity_error(&dense), 0.0);
    }

    #[test]
    fn displacement_matrix_properties() {
        let beta = Complex64::new(0.3, -0.2);
        let d = displacement_matrix(beta, 40);
        // D(β)D(−β) = I on the low block
        let inv = displacement_matrix(-beta, 40);
        let prod = &d * &inv;
        for m in 0..10 {
            for n in 0..10 {
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((prod[(m, n)] - expect).norm() < 1e-12);
            }
        }
        // ⟨1|D|1⟩ = (1 − |β|²) e^{−|β|²/2}
        assert!((d[(1, 1)] - Complex64::from((1.0 - beta.norm_sqr()) * (-0.5 * beta.norm_sqr()).exp())).norm() < 1e-15);
    }

    #[test]
    fn frame_map() {
        let basis = FockBasis::new(2, 12, 1).unwrap();
        let v = basis_vector(&basis, 0, &[0, 0]);
        let zero = CMatrix::zeros(1, 2);
        let same = polaron_frame_map(&v, &zero, &basis).unwrap();
        assert!((same.vector - &v).norm() < 1e-14);

        let f = CMatrix::from_row_slice(1, 2, &[Complex64::new(0.2, 0.1), Complex64::new(-0.15, 0.0)]);
        let lab = polaron_frame_map(&v, &f, &basis).unwrap();
        assert!(lab.leakage.abs() < 1e-10 && !lab.warning);
        // |↓⟩ has ⟨σ^x⟩ = 0, so ⟨a_k⟩ = −f_k ⟨σ^x⟩ = 0, but ⟨σ^x a_k⟩ = −f_k
        let pd = 13 * 13;
        let mut sx_a = Complex64::new(0.0, 0.0);
        for idx in 0..basis.dimension {
            let (s, occ) = basis.state(idx);
            if occ[0] == 0 {
                continue;
            }
            let mut lower = occ.clone();
            lower[0] -= 1;
            let src = basis.index(s ^ 1, &lower);
            let _ = pd;
            sx_a += lab.vector[src].conj() * lab.vector[idx] * (occ[0] as f64).sqrt();
        }
        assert!((sx_a + f[(0, 0)]).norm() < 1e-10);

        let back = polaron_frame_unmap(&lab.vector, &f, &basis).unwrap();
        assert!((back.vector - &v).norm() < 1e-9);
    }

    #[test]
    fn lanczos_path_matches_dense() {
        let bath = miniature_bath(0.2).unwrap();
        let small = FockBasis::new(3, 7, 1).unwrap();
        assert!(small.dimension <= DENSE_LIMIT);
        let big = FockBasis::new(3, 8, 1).unwrap();
        assert!(big.dimension > DENSE_LIMIT);
        let e_small = exact_groundstate(&build_hamiltonian(&bath, &[1.0], &small).unwrap()).unwrap();
        let e_big = exact_groundstate(&build_hamiltonian(&bath, &[1.0], &big).unwrap()).unwrap();
        assert!(e_big.energy <= e_small.energy + 1e-12);
        assert!((e_big.energy - e_small.energy).abs() < 1e-5);
    }

    #[test]
    fn evolution_preserves_norm() {
        let bath = miniature_bath(0.1).unwrap();
        let basis = FockBasis::new(3, 4, 1).unwrap();
        let h = build_hamiltonian(&bath, &[1.0], &basis).unwrap();
        let prop = ExactPropagator::new(&h).unwrap();
        let psi = basis_vector(&basis, 1, &[0, 0, 0]);
        assert!((prop.evolve(&psi, 0.0) - &psi).norm() < 1e-12);
        assert!((prop.evolve(&psi, 100.0).norm() - 1.0).abs() < 1e-10);
        assert!(prop.unitarity_error() < 1e-10);

        let free = build_hamiltonian(&miniature_bath(0.0).unwrap(), &[1.0], &basis).unwrap();
        let out = exact_evolve(&free, &psi, 7.0).unwrap();
        assert_relative_eq!(out.dotc(&psi).norm_sqr(), 1.0, epsilon = 1e-12);
    }
}
