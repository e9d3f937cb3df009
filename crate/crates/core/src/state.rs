use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::word::BooleanWord;

/// Normalization tolerance on `Σ |a_i|^2` for validated states.
pub const NORM_TOL: f64 = 1e-12;
/// Unitarity tolerance on `max |U^dagger U - I|`.
pub const UNITARY_TOL: f64 = 1e-10;

/// Pure state of an `n`-qubit network in the sorted computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: CVector,
}

impl StateVector {
    /// Validates length `2^n` and unit norm within [`NORM_TOL`].
    pub fn new(n: usize, amplitudes: CVector) -> Result<Self> {
        let state = Self::unnormalized(n, amplitudes)?;
        let norm_sqr = state.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(state)
    }

    /// Rescales the amplitudes to unit norm.
    pub fn normalized(n: usize, amplitudes: CVector) -> Result<Self> {
        let mut state = Self::unnormalized(n, amplitudes)?;
        let norm = state.amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm_sqr: 0.0 });
        }
        state.amplitudes.unscale_mut(norm);
        Ok(state)
    }

    fn unnormalized(n: usize, amplitudes: CVector) -> Result<Self> {
        if n == 0 || n > 24 {
            return Err(Error::InvalidParameter(format!("qubit count {n}")));
        }
        let dim = 1usize << n;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "state amplitudes",
                expected: dim,
                found: amplitudes.len(),
            });
        }
        Ok(Self { n, amplitudes })
    }

    /// Computational basis state `|x⟩`.
    pub fn basis(word: &BooleanWord) -> Self {
        let n = word.len();
        Self {
            n,
            amplitudes: linalg::basis_vector(1 << n, word.position()),
        }
    }

    pub fn from_amplitudes(n: usize, amps: &[C64]) -> Result<Self> {
        Self::new(n, CVector::from_column_slice(amps))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// `U |ψ⟩`, renormalized to absorb roundoff.
    pub fn evolve(&self, u: &UnitaryOperator) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "unitary applied to state",
                expected: self.dim(),
                found: u.dim(),
            });
        }
        Self::normalized(self.n, u.matrix() * &self.amplitudes)
    }

    /// `|⟨self|other⟩|^2`.
    pub fn overlap_sqr(&self, other: &StateVector) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }

    /// Distance up to a global phase: `min_φ ‖ψ - e^{iφ} φ‖`.
    pub fn phase_distance(&self, other: &StateVector) -> f64 {
        let inner = other.amplitudes.dotc(&self.amplitudes);
        let phase = if inner.norm() > 0.0 {
            inner / inner.norm()
        } else {
            linalg::ONE
        };
        (&self.amplitudes - &other.amplitudes * phase).norm()
    }
}

/// Unitary operator on `2^n` dimensional space, checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    matrix: CMatrix,
}

impl UnitaryOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, UNITARY_TOL)
    }

    pub fn with_tolerance(matrix: CMatrix, tol: f64) -> Result<Self> {
        linalg::ensure_square(&matrix)?;
        linalg::qubits_for_dim(matrix.nrows())?;
        let deviation = linalg::unitarity_deviation(&matrix);
        if deviation > tol {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix already known to be unitary (results of exact
    /// constructions such as products of unitaries or spectral exponentials).
    pub(crate) fn from_trusted(matrix: CMatrix) -> Self {
        debug_assert!(linalg::unitarity_deviation(&matrix) < 1e-8);
        Self { matrix }
    }

    pub fn identity(n: usize) -> Self {
        let dim = 1usize << n;
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self · other`.
    pub fn compose(&self, other: &UnitaryOperator) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                context: "unitary composition",
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &UnitaryOperator) -> Self {
        Self {
            matrix: linalg::kron(&self.matrix, &other.matrix),
        }
    }

    pub fn deviation(&self) -> f64 {
        linalg::unitarity_deviation(&self.matrix)
    }
}
