//! Dense Hermitian eigensolvers and a Lanczos groundstate routine.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigendecomposition of a Hermitian matrix with eigenvalues in ascending order.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn new(matrix: &CMatrix) -> Self {
        let eig = SymmetricEigen::new(matrix.clone());
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut vectors = CMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Self { values, vectors }
    }

    /// `V e^{-iEt} V† ψ`.
    pub fn propagate(&self, psi: &CVector, t: f64) -> CVector {
        let mut w = self.vectors.ad_mul(psi);
        for (wi, &e) in w.iter_mut().zip(self.values.iter()) {
            *wi *= Complex64::from_polar(1.0, -e * t);
        }
        &self.vectors * w
    }

    /// `max |V†V − I|`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.values.len();
        let g = self.vectors.ad_mul(&self.vectors) - CMatrix::identity(n, n);
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Real symmetric eigendecomposition, ascending.
pub fn eigh_real(matrix: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(matrix.clone());
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Largest entry of `|H − H†|`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entry modulus; used as a cheap matrix scale.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Lowest eigenpair found by Lanczos.
#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub value: f64,
    pub vector: CVector,
    pub residual: f64,
    /// Ritz values within tolerance of the lowest one (a lower bound on the
    /// true multiplicity).
    pub multiplicity: usize,
    pub iterations: usize,
}

/// Lanczos with full reorthogonalisation and restarts from the best Ritz vector.
///
/// The start vector is drawn from a fixed-seed generator so repeated calls are
/// bit-for-bit reproducible.
pub fn lanczos_lowest<F>(dim: usize, matvec: F, tol: f64, max_krylov: usize, max_restarts: usize) -> LanczosResult
where
    F: Fn(&CVector) -> CVector,
{
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a7c);
    let mut start = CVector::from_fn(dim, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    start /= Complex64::from(start.norm());

    let krylov = max_krylov.min(dim).max(1);
    let mut best = LanczosResult {
        value: f64::INFINITY,
        vector: start.clone(),
        residual: f64::INFINITY,
        multiplicity: 1,
        iterations: 0,
    };
    let mut total = 0;

    for _ in 0..=max_restarts {
        let mut basis: Vec<CVector> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut converged = false;

        for j in 0..krylov {
            total += 1;
            let mut w = matvec(&basis[j]);
            let a = basis[j].dotc(&w).re;
            alphas.push(a);
            // full reorthogonalisation, twice for stability
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dotc(&w);
                    w -= b * c;
                }
            }
            let beta = w.norm();

            let m = alphas.len();
            let check = (j + 1) % 5 == 0 || j + 1 == krylov || beta < 1e-14;
            if check {
                let mut t = DMatrix::<f64>::zeros(m, m);
                for i in 0..m {
                    t[(i, i)] = alphas[i];
                    if i + 1 < m {
                        t[(i, i + 1)] = betas[i];
                        t[(i + 1, i)] = betas[i];
                    }
                }
                let (vals, vecs) = eigh_real(&t);
                let resid = beta * vecs[(m - 1, 0)].abs();
                let scale = vals.iter().map(|v| v.abs()).fold(1e-300, f64::max);
                if resid < best.residual || j + 1 == krylov || beta < 1e-14 || resid <= tol * scale {
                    let mut x = CVector::zeros(dim);
                    for (i, b) in basis.iter().enumerate() {
                        x += b * Complex64::from(vecs[(i, 0)]);
                    }
                    let nrm = x.norm();
                    x /= Complex64::from(nrm);
                    let mult = vals.iter().filter(|&&v| (v - vals[0]).abs() <= 1e-8 * scale).count();
                    best = LanczosResult {
                        value: vals[0],
                        vector: x,
                        residual: resid,
                        multiplicity: mult,
                        iterations: total,
                    };
                }
                if resid <= tol * scale || beta < 1e-14 {
                    converged = true;
                    break;
                }
            }
            if beta < 1e-14 {
                break;
            }
            betas.push(beta);
            basis.push(w / Complex64::from(beta));
        }

        if converged {
            break;
        }
        start = best.vector.clone();
    }

    // true residual with the final vector
    let hv = matvec(&best.vector);
    let r = &hv - &best.vector * Complex64::from(best.value);
    best.residual = r.norm();
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        (&a + a.adjoint()) * Complex64::from(0.5)
    }

    #[test]
    fn eigh_sorted_and_unitary() {
        let h = random_hermitian(30, 1);
        let e = Eigh::new(&h);
        assert!(e.values.as_slice().windows(2).all(|w| w[0] <= w[1]));
        assert!(e.unitarity_error() < 1e-12);
        let rebuilt = &e.vectors * CMatrix::from_diagonal(&e.values.map(Complex64::from)) * e.vectors.adjoint();
        assert!(max_abs(&(rebuilt - &h)) < 1e-12);
    }

    #[test]
    fn lanczos_matches_dense() {
        let h = random_hermitian(120, 7);
        let dense = Eigh::new(&h);
        let res = lanczos_lowest(120, |v| &h * v, 1e-12, 120, 3);
        assert!((res.value - dense.values[0]).abs() < 1e-10);
        assert!(res.residual < 1e-8);
    }

    #[test]
    fn propagate_is_group() {
        let h = random_hermitian(12, 3);
        let e = Eigh::new(&h);
        let mut psi = CVector::zeros(12);
        psi[0] = Complex64::from(1.0);
        let a = e.propagate(&e.propagate(&psi, 0.7), 1.1);
        let b = e.propagate(&psi, 1.8);
        assert!((a - b).norm() < 1e-12);
    }
}
