//! Quantum networks under repeated projective measurement, and the
//! probabilistic Boolean networks they induce.
//!
//! A network of `n` qubits evolves unitarily between measurements taken
//! every period. Measuring all qubits turns the outcome sequence into a
//! Markov chain ([`global`]); measuring a subset leaves a non-Markovian
//! process whose path probabilities follow a low-dimensional recursion
//! ([`local`]). [`realization`] goes the other way, from a doubly stochastic
//! matrix to a unitary that induces it, and [`lie`] and [`hitting`] check
//! controllability conditions and hitting-time bounds.
//!
//! Basis states are ordered by `⌊x⌋ = Σ x_i 2^(n-i) + 1`, qubit 1 being the
//! most significant bit.
//!
//! ```
//! use qubit_pbn::{fixtures, global, BooleanWord};
//!
//! let p = global::transition_matrix(&fixtures::pauli_xy());
//! let from: BooleanWord = "00".parse().unwrap();
//! let to: BooleanWord = "11".parse().unwrap();
//! assert_eq!(p.probability(&from, &to), 1.0);
//! ```

pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod global;
pub mod hitting;
pub mod lie;
pub mod linalg;
pub mod local;
pub mod measurement;
pub mod realization;
pub mod rng;
pub mod state;
pub mod word;

pub use dynamics::{HamiltonianSet, UnitarySchedule};
pub use error::{Error, Result};
pub use measurement::{Basis, MeasurementSpec, Observable};
pub use state::{StateVector, UnitaryOperator};
pub use word::BooleanWord;
