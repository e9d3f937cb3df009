//! Small worked systems with known closed-form behaviour, used by tests,
//! the guide and the command-line tool.

use nalgebra::DVector;

use crate::linalg::{self, kron, pauli_x, pauli_y, pauli_z, CMatrix, C64};
use crate::realization::StochasticMatrix;
use crate::state::{StateVector, UnitaryOperator};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn real2(a: f64, b: f64, c_: f64, d: f64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(a, 0.0), c(b, 0.0), c(c_, 0.0), c(d, 0.0)])
}

/// `σx ⊗ σy`: a deterministic permutation chain 00↔11, 01↔10.
pub fn pauli_xy() -> UnitaryOperator {
    UnitaryOperator::new(kron(&pauli_x(), &pauli_y())).expect("unitary")
}

/// `σx ⊗ (|0⟩⟨0| + |0⟩⟨1| - |1⟩⟨0| + |1⟩⟨1|)/√2`: every transition has
/// probability 1/2 and the random mapping is uniform over 16 realizations.
pub fn flip_and_mix() -> UnitaryOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    UnitaryOperator::new(kron(&pauli_x(), &real2(s, s, -s, s))).expect("unitary")
}

/// `H = (π/3) σx⊗σx + (π/6) σy⊗σy`.
pub fn xx_yy_hamiltonian() -> CMatrix {
    use std::f64::consts::PI;
    kron(&pauli_x(), &pauli_x()).scale(PI / 3.0) + kron(&pauli_y(), &pauli_y()).scale(PI / 6.0)
}

/// Closed form of `exp(-i H)` for [`xx_yy_hamiltonian`].
pub fn xx_yy_propagator() -> CMatrix {
    let r3 = 3f64.sqrt() / 2.0;
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = c(r3, 0.0);
    m[(0, 3)] = c(0.0, -0.5);
    m[(1, 2)] = c(0.0, -1.0);
    m[(2, 1)] = c(0.0, -1.0);
    m[(3, 0)] = c(0.0, -0.5);
    m[(3, 3)] = c(r3, 0.0);
    m
}

/// `[[a,b,c,d],[b,a,d,c],[c,d,a,b],[d,c,b,a]]` with
/// `(a, b, c, d) = (1/12, 1/6, 1/4, 1/2)`.
pub fn four_state_chain() -> StochasticMatrix {
    let (a, b, c_, d) = (1.0 / 12.0, 1.0 / 6.0, 0.25, 0.5);
    StochasticMatrix::new(crate::linalg::RMatrix::from_row_slice(
        4,
        4,
        &[a, b, c_, d, b, a, d, c_, c_, d, a, b, d, c_, b, a],
    ))
    .expect("doubly stochastic")
}

/// A unitary whose squared moduli reproduce [`four_state_chain`].
pub fn four_state_unitary() -> UnitaryOperator {
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    let s6 = 6f64.sqrt();
    #[rustfmt::skip]
    let entries = [
        c(1.0 / (2.0 * s3), 0.0), c(1.0 / s6, 0.0), c(0.5, 0.0), c(s2 / 2.0, 0.0),
        c(0.0, -1.0 / s6), c(0.0, 1.0 / (2.0 * s3)), c(0.0, -s2 / 2.0), c(0.0, 0.5),
        c(-0.25, -s3 / 4.0), c(-s2 / 4.0, -s6 / 4.0), c(1.0 / (4.0 * s3), 0.25), c(1.0 / (2.0 * s6), s2 / 4.0),
        c(-s6 / 4.0, s2 / 4.0), c(s3 / 4.0, -0.25), c(s2 / 4.0, -1.0 / (2.0 * s6)), c(-0.25, 1.0 / (4.0 * s3)),
    ];
    UnitaryOperator::new(CMatrix::from_row_slice(4, 4, &entries)).expect("unitary")
}

/// Amplitudes `(1/√2, 1/√6, 1/(2√3), 1/2)` on `00, 01, 10, 11`.
pub fn four_state_initial() -> StateVector {
    let amps = [
        1.0 / 2f64.sqrt(),
        1.0 / 6f64.sqrt(),
        1.0 / (2.0 * 3f64.sqrt()),
        0.5,
    ];
    StateVector::new(2, DVector::from_iterator(4, amps.iter().map(|&a| c(a, 0.0)))).expect("normalized")
}

/// `(1/2, 1/6, 1/12, 1/4)`.
pub fn four_state_p0() -> Vec<f64> {
    vec![0.5, 1.0 / 6.0, 1.0 / 12.0, 0.25]
}

/// Three-qubit propagator `σx ⊗ R ⊗ σz` with `R = [[√3/2, 1/2], [-1/2, √3/2]]`.
pub fn flip_rotate_phase() -> UnitaryOperator {
    let h = 3f64.sqrt() / 2.0;
    let u = linalg::kron_all([pauli_x(), real2(h, 0.5, -0.5, h), pauli_z()].iter());
    UnitaryOperator::new(u).expect("unitary")
}

/// `1/√2 |000⟩ + 1/√6 |010⟩ + 1/(2√3) |011⟩ + 1/2 |101⟩`.
pub fn three_qubit_initial() -> StateVector {
    let mut amps = DVector::from_element(8, c(0.0, 0.0));
    amps[0] = c(1.0 / 2f64.sqrt(), 0.0);
    amps[2] = c(1.0 / 6f64.sqrt(), 0.0);
    amps[3] = c(1.0 / (2.0 * 3f64.sqrt()), 0.0);
    amps[5] = c(0.5, 0.0);
    StateVector::new(3, amps).expect("normalized")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        for u in [pauli_xy(), flip_and_mix(), four_state_unitary(), flip_rotate_phase()] {
            assert!(u.deviation() < 1e-12);
        }
        assert!(UnitaryOperator::new(xx_yy_propagator()).is_ok());
        assert!(linalg::hermiticity_deviation(&xx_yy_hamiltonian()) == 0.0);
        let p: f64 = four_state_p0().iter().sum();
        assert!((p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn four_state_initial_squares_to_p0() {
        let s = four_state_initial();
        for (a, p) in s.amplitudes().iter().zip(four_state_p0()) {
            assert!((a.norm_sqr() - p).abs() < 1e-15);
        }
    }
}
