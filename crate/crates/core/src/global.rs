//! Boolean dynamics induced by global measurement: the measurement-frame
//! propagator, its Markov transition matrix, the random Boolean mapping
//! `F_t`, and chain propagation.

use rand::Rng;
use rayon::prelude::*;

use crate::dynamics::UnitarySchedule;
use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::measurement::{sample_index, Basis, MeasurementSpec};
use crate::rng::run_stream;
use crate::state::UnitaryOperator;
use crate::word::BooleanWord;

/// Largest qubit count accepted by [`enumerate_mappings`].
pub const MAX_ENUMERATION_QUBITS: usize = 2;
const STOCHASTIC_TOL: f64 = 1e-12;
const DISTRIBUTION_TOL: f64 = 1e-9;

/// `U^M = (u_1 ⊗ ... ⊗ u_n)^dagger U (u_1 ⊗ ... ⊗ u_n)`.
pub fn measurement_frame(u: &UnitaryOperator, basis: &Basis) -> Result<UnitaryOperator> {
    basis.check(&MeasurementSpec::global(u.n()))?;
    if basis.is_computational() {
        return Ok(u.clone());
    }
    let frame = basis.frame_product(u.n());
    Ok(UnitaryOperator::from_trusted(
        frame.adjoint() * u.matrix() * frame,
    ))
}

/// `P` with `P[i][j] = ℙ(x(t+1) = s_j | x(t) = s_i)`; rows are sources.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    matrix: RMatrix,
}

impl TransitionMatrix {
    /// Accepts a square, entrywise non-negative matrix whose rows and columns
    /// sum to one within `tol`.
    pub fn from_matrix(matrix: RMatrix, tol: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let t = Self { matrix };
        if let Some(problem) = t.stochastic_violation(tol) {
            return Err(Error::NotStochastic(problem));
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> RMatrix {
        self.matrix
    }

    /// `ℙ(to | from)`.
    pub fn probability(&self, from: &BooleanWord, to: &BooleanWord) -> f64 {
        self.matrix[(from.position(), to.position())]
    }

    /// Next-step distribution from source position `pos`.
    pub fn row(&self, pos: usize) -> Vec<f64> {
        self.matrix.row(pos).iter().copied().collect()
    }

    /// `p(t+1) = P^T p(t)`.
    pub fn propagate(&self, p: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|j| (0..n).map(|i| self.matrix[(i, j)] * p[i]).sum())
            .collect()
    }

    /// Largest deviation of a row or column sum from one.
    pub fn sum_deviation(&self) -> f64 {
        let rows = self.matrix.row_iter().map(|r| (r.sum() - 1.0).abs());
        let cols = self.matrix.column_iter().map(|c| (c.sum() - 1.0).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }

    fn stochastic_violation(&self, tol: f64) -> Option<String> {
        if let Some(v) = self.matrix.iter().find(|&&v| v < -tol || !v.is_finite()) {
            return Some(format!("entry {v}"));
        }
        let dev = self.sum_deviation();
        (dev > tol).then(|| format!("row/column sum deviates by {dev:.3e}"))
    }
}

/// `[P]_{i,j} = |[U^M]_{j,i}|^2`.
pub fn transition_matrix(um: &UnitaryOperator) -> TransitionMatrix {
    let m = um.matrix();
    let dim = um.dim();
    TransitionMatrix {
        matrix: RMatrix::from_fn(dim, dim, |i, j| m[(j, i)].norm_sqr()),
    }
}

/// Boolean map `f(s_i) = s_{α_i}` with 1-based targets `α_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BooleanMapping {
    n: usize,
    alpha: Vec<usize>,
}

impl BooleanMapping {
    pub fn new(n: usize, alpha: Vec<usize>) -> Result<Self> {
        let dim = 1usize << n;
        if alpha.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "mapping targets",
                expected: dim,
                found: alpha.len(),
            });
        }
        if let Some(&a) = alpha.iter().find(|&&a| a < 1 || a > dim) {
            return Err(Error::IndexOutOfRange { index: a, max: dim });
        }
        Ok(Self { n, alpha })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            alpha: (1..=(1usize << n)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    pub fn apply(&self, x: &BooleanWord) -> BooleanWord {
        BooleanWord::from_index(self.n, self.alpha[x.position()])
            .expect("targets validated on construction")
    }

    /// Column `i` is the one-hot vector of `α_i`, so `x♯(t+1) = F x♯(t)`.
    pub fn matrix(&self) -> RMatrix {
        let dim = self.alpha.len();
        RMatrix::from_fn(dim, dim, |r, c| {
            if self.alpha[c] == r + 1 {
                1.0
            } else {
                0.0
            }
        })
    }
}

/// `ℙ(F = f) = Π_i |[U^M]_{α_i, i}|^2`.
pub fn mapping_probability(um: &UnitaryOperator, mapping: &BooleanMapping) -> Result<f64> {
    if mapping.alpha.len() != um.dim() {
        return Err(Error::DimensionMismatch {
            context: "mapping size vs unitary",
            expected: um.dim(),
            found: mapping.alpha.len(),
        });
    }
    let m = um.matrix();
    Ok(mapping
        .alpha
        .iter()
        .enumerate()
        .map(|(i, &a)| m[(a - 1, i)].norm_sqr())
        .product())
}

/// Draw every `α_i` independently from column `i` of `|U^M|^2`.
pub fn sample_mapping<R: Rng + ?Sized>(um: &UnitaryOperator, rng: &mut R) -> BooleanMapping {
    let m = um.matrix();
    let dim = um.dim();
    let alpha = (0..dim)
        .map(|i| {
            let weights: Vec<f64> = m.column(i).iter().map(|z| z.norm_sqr()).collect();
            sample_index(&weights, 0.0, rng).expect("unitary columns have unit norm") + 1
        })
        .collect();
    BooleanMapping { n: um.n(), alpha }
}

/// Every mapping and its probability, in lexicographic order of `α`.
/// Limited to `n ≤ 2` (`(2^n)^(2^n)` mappings).
pub fn mapping_table(um: &UnitaryOperator) -> Result<Vec<(BooleanMapping, f64)>> {
    let n = um.n();
    if n > MAX_ENUMERATION_QUBITS {
        return Err(Error::TooLarge {
            n,
            max: MAX_ENUMERATION_QUBITS,
        });
    }
    let dim = um.dim();
    let total = dim.pow(dim as u32);
    let mut out = Vec::with_capacity(total);
    let mut alpha = vec![1usize; dim];
    for _ in 0..total {
        let mapping = BooleanMapping {
            n,
            alpha: alpha.clone(),
        };
        let p = mapping_probability(um, &mapping)?;
        out.push((mapping, p));
        // odometer, last target varies fastest
        for slot in alpha.iter_mut().rev() {
            if *slot < dim {
                *slot += 1;
                break;
            }
            *slot = 1;
        }
    }
    Ok(out)
}

/// Mappings whose probability exceeds `threshold`.
pub fn enumerate_mappings(
    um: &UnitaryOperator,
    threshold: f64,
) -> Result<Vec<(BooleanMapping, f64)>> {
    Ok(mapping_table(um)?
        .into_iter()
        .filter(|(_, p)| *p > threshold)
        .collect())
}

/// Distribution of qubit `qubit` (1-based) one step after the network sits at
/// `from`: `[ℙ(x_q = 0), ℙ(x_q = 1)]`.
pub fn marginal_step(p: &TransitionMatrix, from: &BooleanWord, qubit: usize) -> [f64; 2] {
    let mut out = [0.0; 2];
    for to in BooleanWord::all(from.len()) {
        out[to.bit(qubit) as usize] += p.probability(from, &to);
    }
    out
}

/// Initial condition of a chain.
#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    Distribution(Vec<f64>),
    Word(BooleanWord),
}

impl Initial {
    fn distribution(&self, dim: usize) -> Result<Vec<f64>> {
        match self {
            Initial::Word(w) => {
                if 1usize << w.len() != dim {
                    return Err(Error::DimensionMismatch {
                        context: "initial word",
                        expected: dim.trailing_zeros() as usize,
                        found: w.len(),
                    });
                }
                Ok(w.one_hot())
            }
            Initial::Distribution(p) => {
                check_distribution(p, dim)?;
                Ok(p.clone())
            }
        }
    }
}

pub(crate) fn check_distribution(p: &[f64], dim: usize) -> Result<()> {
    if p.len() != dim {
        return Err(Error::DimensionMismatch {
            context: "initial distribution",
            expected: dim,
            found: p.len(),
        });
    }
    if let Some(v) = p.iter().find(|&&v| v < -DISTRIBUTION_TOL || !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "negative probability {v}"
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > DISTRIBUTION_TOL {
        return Err(Error::InvalidParameter(format!(
            "distribution sums to {total}"
        )));
    }
    Ok(())
}

/// Empirical and exact distributions for `t = 0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTables {
    pub p_hat: Vec<Vec<f64>>,
    pub p_exact: Vec<Vec<f64>>,
}

impl ChainTables {
    /// `max_t ‖p̂(t) - p(t)‖_∞`.
    pub fn max_error(&self) -> f64 {
        self.p_hat
            .iter()
            .zip(&self.p_exact)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// `p(t)` for `t = 0..=steps` under `p(t+1) = P_t^T p(t)`.
pub fn exact_chain(initial: &Initial, matrices: &[TransitionMatrix], steps: usize) -> Result<Vec<Vec<f64>>> {
    let dim = chain_dim(matrices, steps)?;
    let mut p = initial.distribution(dim)?;
    let mut table = Vec::with_capacity(steps + 1);
    table.push(p.clone());
    for m in &matrices[..steps] {
        p = m.propagate(&p);
        table.push(p.clone());
    }
    Ok(table)
}

fn chain_dim(matrices: &[TransitionMatrix], steps: usize) -> Result<usize> {
    if matrices.len() < steps {
        return Err(Error::ScheduleTooShort {
            interval: matrices.len(),
        });
    }
    let dim = matrices
        .first()
        .map(TransitionMatrix::dim)
        .ok_or_else(|| Error::InvalidParameter("empty transition schedule".into()))?;
    if let Some(m) = matrices.iter().find(|m| m.dim() != dim) {
        return Err(Error::DimensionMismatch {
            context: "transition schedule",
            expected: dim,
            found: m.dim(),
        });
    }
    Ok(dim)
}

/// Monte Carlo over `runs` independent sample paths of the chain, next to the
/// exact distributions. `p̂_i(t)` is the fraction of runs at `s_i` at time `t`.
///
/// Run `r` draws from stream `r` of `seed`; counts are merged by summation,
/// so the result does not depend on the thread count.
pub fn simulate_markov(
    initial: &Initial,
    matrices: &[TransitionMatrix],
    steps: usize,
    runs: usize,
    seed: u64,
) -> Result<ChainTables> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be positive".into()));
    }
    let p_exact = exact_chain(initial, matrices, steps)?;
    let dim = matrices[0].dim();
    let p0 = initial.distribution(dim)?;
    let rows: Vec<Vec<Vec<f64>>> = matrices[..steps]
        .iter()
        .map(|m| (0..dim).map(|i| m.row(i)).collect())
        .collect();
    let counts = (0..runs)
        .into_par_iter()
        .fold(
            || vec![0u64; (steps + 1) * dim],
            |mut acc, r| {
                let mut rng = run_stream(seed, r as u64);
                let mut x = sample_index(&p0, 0.0, &mut rng).expect("validated distribution");
                acc[x] += 1;
                for (t, rows_t) in rows.iter().enumerate() {
                    x = sample_index(&rows_t[x], 0.0, &mut rng).expect("stochastic row");
                    acc[(t + 1) * dim + x] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; (steps + 1) * dim],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let p_hat = counts
        .chunks(dim)
        .map(|c| c.iter().map(|&k| k as f64 / runs as f64).collect())
        .collect();
    Ok(ChainTables { p_hat, p_exact })
}

/// [`simulate_markov`] for measurement-frame propagators `U_t^M`.
pub fn simulate_chain(
    initial: &Initial,
    unitaries: &UnitarySchedule,
    steps: usize,
    runs: usize,
    seed: u64,
) -> Result<ChainTables> {
    let matrices = transition_schedule(unitaries, steps)?;
    simulate_markov(initial, &matrices, steps, runs, seed)
}

/// Transition matrices `P_0..P_{steps-1}`. At least one matrix is returned
/// so the chain dimension is known even for `steps = 0`.
pub fn transition_schedule(unitaries: &UnitarySchedule, steps: usize) -> Result<Vec<TransitionMatrix>> {
    match unitaries {
        UnitarySchedule::Constant(u) => {
            let p = transition_matrix(u);
            Ok(vec![p; steps.max(1)])
        }
        UnitarySchedule::Sequence(list) => {
            if list.len() < steps {
                return Err(Error::ScheduleTooShort {
                    interval: list.len(),
                });
            }
            Ok(list[..steps.max(1).min(list.len())]
                .iter()
                .map(transition_matrix)
                .collect())
        }
    }
}

/// Check the doubly-stochastic invariant of a computed matrix.
pub fn check_transition(p: &TransitionMatrix) -> Result<()> {
    match p.stochastic_violation(STOCHASTIC_TOL) {
        Some(problem) => Err(Error::NotStochastic(problem)),
        None => Ok(()),
    }
}
