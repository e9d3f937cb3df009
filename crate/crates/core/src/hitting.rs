//! First hitting times of a target outcome under feedback control.
//!
//! If every step reaches a state within `δ` of the target (up to phase), the
//! one-step hitting probability is at least `(1 - δ²/2)²`, which gives
//! `ℙ(T_hit ≤ t) ≥ 1 - (δ² - δ⁴/4)^t`.

use rayon::prelude::*;

use crate::dynamics::{run_feedback, FeedbackPolicy, HybridStep};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::measurement::{Basis, MeasurementSpec};
use crate::rng::run_stream;
use crate::state::{StateVector, UnitaryOperator};
use crate::word::BooleanWord;

/// `1 - (δ² - δ⁴/4)^t` for `0 < δ < √2`.
pub fn hitting_lower_bound(delta: f64, t: usize) -> Result<f64> {
    if !(delta > 0.0 && delta < std::f64::consts::SQRT_2) {
        return Err(Error::InvalidParameter(format!(
            "delta {delta} outside (0, sqrt 2)"
        )));
    }
    let miss = delta * delta - delta.powi(4) / 4.0;
    Ok(1.0 - miss.powi(t as i32))
}

/// Empirical `ℙ(T_hit ≤ t)` for `t = 0..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingCurve {
    pub runs: usize,
    pub curve: Vec<f64>,
    /// Runs that hit exactly at `t`.
    pub counts: Vec<u64>,
}

impl HittingCurve {
    /// Binomial standard error of `curve[t]`.
    pub fn std_error(&self, t: usize) -> f64 {
        let p = self.curve[t];
        (p * (1.0 - p) / self.runs as f64).sqrt()
    }
}

/// Estimate the distribution of `T_hit = inf{t ≥ 0 : x(t) = target}` over
/// `runs` independent hybrid trajectories driven by `policy`.
///
/// Run `r` draws from stream `r` of `seed`, and each trajectory stops at its
/// first hit.
#[allow(clippy::too_many_arguments)]
pub fn estimate_hitting<P>(
    state0: &StateVector,
    policy: &P,
    spec: &MeasurementSpec,
    basis: &Basis,
    target: &BooleanWord,
    runs: usize,
    horizon: usize,
    seed: u64,
) -> Result<HittingCurve>
where
    P: FeedbackPolicy + Sync + ?Sized,
{
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be positive".into()));
    }
    if target.len() != spec.k() {
        return Err(Error::DimensionMismatch {
            context: "target word vs measured qubits",
            expected: spec.k(),
            found: target.len(),
        });
    }
    let counts = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = run_stream(seed, r as u64);
            let traj = run_feedback(state0, policy, spec, basis, horizon, &mut rng, |s| {
                &s.outcome == target
            })?;
            Ok(traj.iter().position(|s| &s.outcome == target))
        })
        .try_fold(
            || vec![0u64; horizon + 1],
            |mut acc, hit: Result<Option<usize>>| {
                if let Some(t) = hit? {
                    acc[t] += 1;
                }
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(
            || vec![0u64; horizon + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    let mut total = 0u64;
    let curve = counts
        .iter()
        .map(|&c| {
            total += c;
            total as f64 / runs as f64
        })
        .collect();
    Ok(HittingCurve {
        runs,
        curve,
        counts,
    })
}

/// Feedback that rotates the last outcome `|x⟩` toward `|X*⟩` inside
/// `span{|x⟩, |X*⟩}`, so that `U|x⟩ = c|X*⟩ + s|x⟩` with `c² = overlap`.
/// Meant for global measurement in the computational frame, where each
/// post-measurement state is the basis state of its outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapPolicy {
    target: BooleanWord,
    overlap: f64,
}

impl OverlapPolicy {
    pub fn new(target: BooleanWord, overlap: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&overlap) {
            return Err(Error::InvalidParameter(format!("overlap {overlap}")));
        }
        Ok(Self { target, overlap })
    }

    /// `U` for the network sitting at `x`.
    pub fn unitary_from(&self, x: &BooleanWord) -> UnitaryOperator {
        let n = self.target.len();
        let dim = 1usize << n;
        let (a, b) = (x.position(), self.target.position());
        let mut u = CMatrix::identity(dim, dim);
        if a != b {
            let c = self.overlap.sqrt();
            let s = (1.0 - self.overlap).sqrt();
            u[(a, a)] = s.into();
            u[(b, a)] = c.into();
            u[(a, b)] = (-c).into();
            u[(b, b)] = s.into();
        }
        UnitaryOperator::from_trusted(u)
    }
}

impl FeedbackPolicy for OverlapPolicy {
    fn next_unitary(&self, t: usize, history: &[HybridStep]) -> Result<UnitaryOperator> {
        let x = &history[t].outcome;
        if x.len() != self.target.len() {
            return Err(Error::DimensionMismatch {
                context: "outcome length vs policy target",
                expected: self.target.len(),
                found: x.len(),
            });
        }
        Ok(self.unitary_from(x))
    }
}
