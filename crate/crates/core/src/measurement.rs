//! Single-qubit observables, measurement specifications and the projective
//! measurement postulate on network states.

use nalgebra::{Matrix2, Vector2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, ZERO};
use crate::state::StateVector;
use crate::word::BooleanWord;

/// Outcomes whose probability falls below this are never returned by
/// [`measure`]; they are numerically degenerate projections.
pub const DEGENERATE_PROBABILITY: f64 = 1e-15;

const OBSERVABLE_TOL: f64 = 1e-12;

/// Single-qubit observable `M = λ0 |v0⟩⟨v0| + λ1 |v1⟩⟨v1|` together with its
/// basis change `u = |v0⟩⟨0| + |v1⟩⟨1|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    lambda0: f64,
    lambda1: f64,
    u: Matrix2<C64>,
}

impl Observable {
    pub fn new(lambda0: f64, lambda1: f64, v0: [C64; 2], v1: [C64; 2]) -> Result<Self> {
        let u = Matrix2::new(v0[0], v1[0], v0[1], v1[1]);
        Self::from_frame(lambda0, lambda1, u)
    }

    /// Observable whose eigenvectors are the columns of `u`.
    pub fn from_frame(lambda0: f64, lambda1: f64, u: Matrix2<C64>) -> Result<Self> {
        if lambda0 == lambda1 {
            return Err(Error::InvalidObservable(
                "eigenvalues must be distinct".into(),
            ));
        }
        if !lambda0.is_finite() || !lambda1.is_finite() {
            return Err(Error::InvalidObservable("non-finite eigenvalue".into()));
        }
        let v0: Vector2<C64> = u.column(0).into_owned();
        let v1: Vector2<C64> = u.column(1).into_owned();
        let n0 = (v0.norm_squared() - 1.0).abs();
        let n1 = (v1.norm_squared() - 1.0).abs();
        let cross = v0.dotc(&v1).norm();
        if n0 > OBSERVABLE_TOL || n1 > OBSERVABLE_TOL || cross > OBSERVABLE_TOL {
            return Err(Error::InvalidObservable(format!(
                "eigenvectors not orthonormal (|<v0|v0>-1| = {n0:.2e}, |<v1|v1>-1| = {n1:.2e}, |<v0|v1>| = {cross:.2e})"
            )));
        }
        Ok(Self {
            lambda0,
            lambda1,
            u,
        })
    }

    /// `λ0 |0⟩⟨0| + λ1 |1⟩⟨1|` with `(λ0, λ1) = (0, 1)`.
    pub fn computational() -> Self {
        Self {
            lambda0: 0.0,
            lambda1: 1.0,
            u: Matrix2::identity(),
        }
    }

    pub fn lambda(&self, bit: u8) -> f64 {
        if bit == 0 {
            self.lambda0
        } else {
            self.lambda1
        }
    }

    /// Eigenvector for outcome bit `bit`.
    pub fn eigenvector(&self, bit: u8) -> CVector {
        CVector::from_iterator(2, self.u.column(bit as usize).iter().copied())
    }

    /// The basis change `u` as a dynamic 2x2 matrix.
    pub fn frame(&self) -> CMatrix {
        CMatrix::from_iterator(2, 2, self.u.iter().copied())
    }

    /// Projector `|v_bit⟩⟨v_bit|`.
    pub fn projector(&self, bit: u8) -> CMatrix {
        let v = self.eigenvector(bit);
        &v * v.adjoint()
    }

    /// The observable matrix `M`.
    pub fn matrix(&self) -> CMatrix {
        self.projector(0).scale(self.lambda0) + self.projector(1).scale(self.lambda1)
    }

    pub fn is_computational(&self) -> bool {
        self.u == Matrix2::identity()
    }
}

/// Observables attached to the measured qubits: one shared observable, or one
/// per measured qubit (in the order of [`MeasurementSpec::measured`]).
#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    Uniform(Observable),
    PerQubit(Vec<Observable>),
}

impl Basis {
    pub fn computational() -> Self {
        Basis::Uniform(Observable::computational())
    }

    /// Observable acting on the `j`-th measured qubit (0-based).
    pub fn observable(&self, j: usize) -> &Observable {
        match self {
            Basis::Uniform(obs) => obs,
            Basis::PerQubit(list) => &list[j],
        }
    }

    pub fn is_computational(&self) -> bool {
        match self {
            Basis::Uniform(obs) => obs.is_computational(),
            Basis::PerQubit(list) => list.iter().all(Observable::is_computational),
        }
    }

    pub(crate) fn check(&self, spec: &MeasurementSpec) -> Result<()> {
        if let Basis::PerQubit(list) = self {
            if list.len() != spec.k() {
                return Err(Error::DimensionMismatch {
                    context: "per-qubit observables",
                    expected: spec.k(),
                    found: list.len(),
                });
            }
        }
        Ok(())
    }

    /// `u_1 ⊗ ... ⊗ u_k` over `k` measured qubits.
    pub fn frame_product(&self, k: usize) -> CMatrix {
        let frames: Vec<CMatrix> = (0..k).map(|j| self.observable(j).frame()).collect();
        linalg::kron_all(frames.iter())
    }
}

impl From<Observable> for Basis {
    fn from(obs: Observable) -> Self {
        Basis::Uniform(obs)
    }
}

/// Which qubits of an `n`-qubit network are measured (1-based, strictly
/// increasing). Measuring all of them is a global measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementSpec {
    n: usize,
    measured: Vec<usize>,
}

impl MeasurementSpec {
    pub fn new(n: usize, measured: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("zero qubits".into()));
        }
        if measured.is_empty() {
            return Err(Error::InvalidSpec("no measured qubits".into()));
        }
        if measured.iter().any(|&q| q < 1 || q > n) {
            return Err(Error::InvalidSpec(format!(
                "measured qubits {measured:?} outside [1, {n}]"
            )));
        }
        if measured.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpec(format!(
                "measured qubits {measured:?} not strictly increasing"
            )));
        }
        Ok(Self { n, measured })
    }

    pub fn global(n: usize) -> Self {
        Self {
            n,
            measured: (1..=n).collect(),
        }
    }

    /// Measure qubits `1..=k`.
    pub fn prefix(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidSpec(format!("k = {k} exceeds n = {n}")));
        }
        Self::new(n, (1..=k).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.measured.len()
    }

    pub fn measured(&self) -> &[usize] {
        &self.measured
    }

    /// Unmeasured ("dark") qubits in ascending order.
    pub fn dark(&self) -> Vec<usize> {
        (1..=self.n).filter(|q| !self.measured.contains(q)).collect()
    }

    pub fn is_global(&self) -> bool {
        self.k() == self.n
    }

    pub fn is_prefix(&self) -> bool {
        self.measured.iter().enumerate().all(|(j, &q)| q == j + 1)
    }

    /// Outcome position (0-based) recorded when the network sits at basis
    /// position `pos`.
    pub fn outcome_position(&self, pos: usize) -> usize {
        self.measured.iter().fold(0, |acc, &q| {
            (acc << 1) | ((pos >> (self.n - q)) & 1)
        })
    }

    fn check_state(&self, state: &StateVector) -> Result<()> {
        if state.n() != self.n {
            return Err(Error::DimensionMismatch {
                context: "state qubits vs measurement spec",
                expected: self.n,
                found: state.n(),
            });
        }
        Ok(())
    }

    fn check_word(&self, word: &BooleanWord) -> Result<()> {
        if word.len() != self.k() {
            return Err(Error::DimensionMismatch {
                context: "outcome word length vs measured qubits",
                expected: self.k(),
                found: word.len(),
            });
        }
        Ok(())
    }
}

/// `Π_x`: the tensor product of projectors `|v_{x_j}⟩⟨v_{x_j}|` on measured
/// qubits with identities on dark qubits.
pub fn projector_tensor(
    word: &BooleanWord,
    spec: &MeasurementSpec,
    basis: &Basis,
) -> Result<CMatrix> {
    spec.check_word(word)?;
    basis.check(spec)?;
    let mut factors = Vec::with_capacity(spec.n());
    let mut j = 0;
    for q in 1..=spec.n() {
        if spec.measured.get(j) == Some(&q) {
            factors.push(basis.observable(j).projector(word.bit(j + 1)));
            j += 1;
        } else {
            factors.push(CMatrix::identity(2, 2));
        }
    }
    Ok(linalg::kron_all(factors.iter()))
}

/// Amplitudes in the measurement frame: `u_q^dagger` applied on each measured
/// qubit `q`.
fn into_frame(state: &StateVector, spec: &MeasurementSpec, basis: &Basis) -> CVector {
    let mut amps = state.amplitudes().clone();
    if basis.is_computational() {
        return amps;
    }
    for (j, &q) in spec.measured.iter().enumerate() {
        let u_dag = basis.observable(j).frame().adjoint();
        linalg::apply_single_qubit(&mut amps, spec.n(), q, &u_dag);
    }
    amps
}

fn out_of_frame(mut amps: CVector, spec: &MeasurementSpec, basis: &Basis) -> CVector {
    if basis.is_computational() {
        return amps;
    }
    for (j, &q) in spec.measured.iter().enumerate() {
        let u = basis.observable(j).frame();
        linalg::apply_single_qubit(&mut amps, spec.n(), q, &u);
    }
    amps
}

/// Probability of each of the `2^k` outcomes, indexed by outcome position
/// `⌊x⌋ - 1`.
pub fn outcome_distribution(
    state: &StateVector,
    spec: &MeasurementSpec,
    basis: &Basis,
) -> Result<Vec<f64>> {
    spec.check_state(state)?;
    basis.check(spec)?;
    let frame = into_frame(state, spec, basis);
    let mut probs = vec![0.0; 1usize << spec.k()];
    for (pos, a) in frame.iter().enumerate() {
        probs[spec.outcome_position(pos)] += a.norm_sqr();
    }
    Ok(probs)
}

/// Result of one projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub outcome: BooleanWord,
    pub probability: f64,
    pub post: StateVector,
}

/// Post-measurement state for a given outcome, with its probability.
///
/// Local measurements give `Π_x |ψ⟩ / √p`. Global measurements give the product
/// eigenstate `|v_{x_1}⟩ ⊗ ... ⊗ |v_{x_n}⟩`, which equals the projected state up
/// to a global phase.
pub fn collapse(
    state: &StateVector,
    spec: &MeasurementSpec,
    basis: &Basis,
    outcome: &BooleanWord,
) -> Result<Measurement> {
    spec.check_state(state)?;
    spec.check_word(outcome)?;
    basis.check(spec)?;
    let mut frame = into_frame(state, spec, basis);
    let target = outcome.position();
    let mut probability = 0.0;
    for (pos, a) in frame.iter_mut().enumerate() {
        if spec.outcome_position(pos) == target {
            probability += a.norm_sqr();
        } else {
            *a = ZERO;
        }
    }
    if probability < DEGENERATE_PROBABILITY {
        return Err(Error::ImpossibleOutcome {
            outcome: outcome.to_string(),
            probability,
        });
    }
    let post = if spec.is_global() {
        let vectors: Vec<CMatrix> = (0..spec.k())
            .map(|j| {
                let v = basis.observable(j).eigenvector(outcome.bit(j + 1));
                CMatrix::from_column_slice(2, 1, v.as_slice())
            })
            .collect();
        let product = linalg::kron_all(vectors.iter());
        StateVector::normalized(spec.n(), product.column(0).into_owned())?
    } else {
        StateVector::normalized(spec.n(), out_of_frame(frame, spec, basis))?
    };
    Ok(Measurement {
        outcome: outcome.clone(),
        probability,
        post,
    })
}

/// Sample an outcome of measuring `state` and return it with its probability
/// and the post-measurement state.
///
/// Outcomes with probability below [`DEGENERATE_PROBABILITY`] are excluded
/// from sampling, which is the same law as rejecting and redrawing them.
pub fn measure<R: Rng + ?Sized>(
    state: &StateVector,
    spec: &MeasurementSpec,
    basis: &Basis,
    rng: &mut R,
) -> Result<Measurement> {
    let probs = outcome_distribution(state, spec, basis)?;
    let pos = sample_index(&probs, DEGENERATE_PROBABILITY, rng)
        .ok_or_else(|| Error::Internal("all outcome probabilities vanish".into()))?;
    let outcome = BooleanWord::from_position(spec.k(), pos)?;
    collapse(state, spec, basis, &outcome)
}

/// Draw an index with probability proportional to `weights[i]`, ignoring
/// entries below `floor`.
pub(crate) fn sample_index<R: Rng + ?Sized>(
    weights: &[f64],
    floor: f64,
    rng: &mut R,
) -> Option<usize> {
    let total: f64 = weights.iter().filter(|&&w| w >= floor).sum();
    if total <= 0.0 {
        return None;
    }
    let r = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w < floor {
            continue;
        }
        acc += w;
        last = Some(i);
        if r < acc {
            return Some(i);
        }
    }
    last
}

/// `⟨ψ|Π|ψ⟩` for an explicit projector matrix.
pub fn expectation(state: &StateVector, op: &CMatrix) -> C64 {
    let a = state.amplitudes();
    a.dotc(&(op * a))
}
