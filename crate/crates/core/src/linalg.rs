//! Dense complex linear algebra helpers.
//!
//! All matrices are `nalgebra::DMatrix<C64>` indexed in the ascending
//! computational-basis order: basis index `i` (0-based) has qubit 1 as its
//! most significant bit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;
pub type RMatrix = DMatrix<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Kronecker product `a ⊗ b`.
///
/// Row-major block convention: entry `(i_a * rows_b + i_b, j_a * cols_b + j_b)`
/// equals `a[(i_a, j_a)] * b[(i_b, j_b)]`, so the left operand carries the more
/// significant index. Vectors are `n x 1` matrices and compose the same way.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of column vectors.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

/// Left-to-right Kronecker product of a list of factors. An empty list gives
/// the 1x1 identity.
pub fn kron_all<'a, It>(factors: It) -> CMatrix
where
    It: IntoIterator<Item = &'a CMatrix>,
{
    factors
        .into_iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Computational basis vector `e_pos` (0-based position) of length `dim`.
pub fn basis_vector(dim: usize, pos: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[pos] = ONE;
    v
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let prod = m.adjoint() * m;
    max_abs(&(prod - CMatrix::identity(m.nrows(), m.ncols())))
}

pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

pub fn skew_hermiticity_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m + m.adjoint()))
}

pub fn ensure_square(m: &CMatrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

pub fn ensure_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    ensure_square(m)?;
    let deviation = hermiticity_deviation(m);
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// `log2(dim)` when `dim` is a power of two.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// `exp(-i H t)` for Hermitian `H`, via the spectral decomposition
/// `H = V diag(e) V^dagger`.
///
/// The eigendecomposition is taken on the Hermitian part `(H + H^dagger)/2`, so
/// the result is unitary to working precision even if `H` carries roundoff.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let herm = (h + h.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let phases = CVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&e| (-I * e * t).exp()),
    );
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    scaled * v.adjoint()
}

/// `exp(X)` for skew-Hermitian `X` (so `X = -i H` with `H = i X` Hermitian).
pub fn expm_skew_hermitian(x: &CMatrix) -> CMatrix {
    let h = x * I;
    expm_hermitian(&h, 1.0)
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let herm = (h + h.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Nearest unitary in Frobenius norm (the unitary polar factor `W V^dagger`
/// of the SVD `M = W S V^dagger`).
pub fn polar_unitary(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    u * v_t
}

/// Random unitary from a complex Gaussian matrix orthonormalized column by
/// column (modified Gram-Schmidt), which is Haar distributed.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    loop {
        let g = CMatrix::from_fn(dim, dim, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        });
        if let Some(q) = gram_schmidt_columns(&g) {
            return q;
        }
    }
}

/// Random state vector, uniformly distributed on the unit sphere.
pub fn random_state_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    let norm = v.norm();
    v.unscale(norm)
}

/// Random Hermitian matrix with i.i.d. Gaussian entries (GUE-like).
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    (&g + g.adjoint()).scale(0.5)
}

fn gram_schmidt_columns(m: &CMatrix) -> Option<CMatrix> {
    let mut q = m.clone();
    for j in 0..q.ncols() {
        // two passes keep the result orthonormal to ~1e-15
        for _ in 0..2 {
            for i in 0..j {
                let proj = q.column(i).dotc(&q.column(j));
                let qi = q.column(i).clone_owned();
                let mut cj = q.column_mut(j);
                cj.axpy(-proj, &qi, ONE);
            }
        }
        let norm = q.column(j).norm();
        if norm < 1e-10 {
            return None;
        }
        q.column_mut(j).unscale_mut(norm);
    }
    Some(q)
}

/// Apply a 2x2 `gate` to qubit `qubit` (1-based, qubit 1 most significant) of
/// an `n`-qubit amplitude vector in place.
pub fn apply_single_qubit(amps: &mut CVector, n: usize, qubit: usize, gate: &CMatrix) {
    let stride = 1usize << (n - qubit);
    let dim = amps.len();
    let (g00, g01, g10, g11) = (gate[(0, 0)], gate[(0, 1)], gate[(1, 0)], gate[(1, 1)]);
    let mut base = 0;
    while base < dim {
        for offset in base..base + stride {
            let a0 = amps[offset];
            let a1 = amps[offset + stride];
            amps[offset] = g00 * a0 + g01 * a1;
            amps[offset + stride] = g10 * a0 + g11 * a1;
        }
        base += 2 * stride;
    }
}

/// Permutation matrix `P` that reorders qubits: the new qubit `j` (1-based) is
/// the old qubit `order[j-1]`. For a state `psi`, `P psi` is the same physical
/// state expressed with the new qubit order.
pub fn qubit_permutation(n: usize, order: &[usize]) -> CMatrix {
    let dim = 1usize << n;
    let mut p = CMatrix::zeros(dim, dim);
    for old in 0..dim {
        let mut new = 0usize;
        for (j, &q) in order.iter().enumerate() {
            let bit = (old >> (n - q)) & 1;
            new |= bit << (n - 1 - j);
        }
        p[(new, old)] = ONE;
    }
    p
}
