//! Bilinear Schrödinger dynamics compiled to per-interval propagators, and
//! the evolve-measure loop of the hybrid network.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::measurement::{measure, Basis, MeasurementSpec};
use crate::state::{StateVector, UnitaryOperator};
use crate::word::BooleanWord;

const HERMITIAN_TOL: f64 = 1e-10;
const DURATION_TOL: f64 = 1e-12;

/// Drift Hamiltonian `H0` and control Hamiltonians `H_1..H_p`, so that
/// `H(s) = H0 + Σ u_l(s) H_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSet {
    drift: CMatrix,
    controls: Vec<CMatrix>,
}

impl HamiltonianSet {
    pub fn new(drift: CMatrix, controls: Vec<CMatrix>) -> Result<Self> {
        linalg::ensure_hermitian(&drift, HERMITIAN_TOL)?;
        linalg::qubits_for_dim(drift.nrows())?;
        for h in &controls {
            linalg::ensure_hermitian(h, HERMITIAN_TOL)?;
            if h.nrows() != drift.nrows() {
                return Err(Error::DimensionMismatch {
                    context: "control Hamiltonian",
                    expected: drift.nrows(),
                    found: h.nrows(),
                });
            }
        }
        Ok(Self { drift, controls })
    }

    pub fn drift_only(drift: CMatrix) -> Result<Self> {
        Self::new(drift, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.drift.nrows()
    }

    pub fn drift(&self) -> &CMatrix {
        &self.drift
    }

    pub fn controls(&self) -> &[CMatrix] {
        &self.controls
    }

    /// `H0 + Σ u_l H_l`.
    pub fn hamiltonian(&self, u: &[f64]) -> Result<CMatrix> {
        if u.len() != self.controls.len() {
            return Err(Error::DimensionMismatch {
                context: "control values",
                expected: self.controls.len(),
                found: u.len(),
            });
        }
        let mut h = self.drift.clone();
        for (&ul, hl) in u.iter().zip(&self.controls) {
            h += hl.scale(ul);
        }
        Ok(h)
    }

    /// Skew-Hermitian generators `A = -i H0` and `B_l = -i H_l`.
    pub fn generators(&self) -> (CMatrix, Vec<CMatrix>) {
        let a = &self.drift * (-linalg::I);
        let bs = self.controls.iter().map(|h| h * (-linalg::I)).collect();
        (a, bs)
    }
}

/// A stretch of constant controls.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub controls: Vec<f64>,
}

impl Segment {
    pub fn new(duration: f64, controls: Vec<f64>) -> Self {
        Self { duration, controls }
    }
}

/// Piecewise-constant controls for each measurement interval of length
/// `period`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    period: f64,
    intervals: Vec<Vec<Segment>>,
}

impl ControlSchedule {
    pub fn new(period: f64, intervals: Vec<Vec<Segment>>) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidSchedule(format!("period {period}")));
        }
        for (t, segments) in intervals.iter().enumerate() {
            check_segments(period, segments)
                .map_err(|msg| Error::InvalidSchedule(format!("interval {t}: {msg}")))?;
        }
        Ok(Self { period, intervals })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn interval(&self, t: usize) -> Option<&[Segment]> {
        self.intervals.get(t).map(Vec::as_slice)
    }
}

fn check_segments(period: f64, segments: &[Segment]) -> std::result::Result<(), String> {
    if segments.is_empty() {
        return Err("no segments".into());
    }
    if let Some(s) = segments.iter().find(|s| !(s.duration > 0.0)) {
        return Err(format!("non-positive duration {}", s.duration));
    }
    let total: f64 = segments.iter().map(|s| s.duration).sum();
    if (total - period).abs() > DURATION_TOL {
        return Err(format!("durations sum to {total}, period is {period}"));
    }
    Ok(())
}

/// `exp(-i (H0 + Σ u_l H_l) dt)`.
pub fn segment_unitary(hams: &HamiltonianSet, u: &[f64], dt: f64) -> Result<UnitaryOperator> {
    if !(dt >= 0.0) {
        return Err(Error::InvalidParameter(format!("negative duration {dt}")));
    }
    let h = hams.hamiltonian(u)?;
    Ok(UnitaryOperator::from_trusted(linalg::expm_hermitian(&h, dt)))
}

/// Ordered product of segment propagators; later segments act on the left.
pub fn segments_unitary(hams: &HamiltonianSet, segments: &[Segment]) -> Result<UnitaryOperator> {
    let mut total = CMatrix::identity(hams.dim(), hams.dim());
    for s in segments {
        let step = segment_unitary(hams, &s.controls, s.duration)?;
        total = step.matrix() * total;
    }
    Ok(UnitaryOperator::from_trusted(total))
}

/// Propagator `U_t` over measurement interval `t`.
pub fn interval_unitary(
    schedule: &ControlSchedule,
    hams: &HamiltonianSet,
    t: usize,
) -> Result<UnitaryOperator> {
    let segments = schedule
        .interval(t)
        .ok_or(Error::ScheduleTooShort { interval: t })?;
    segments_unitary(hams, segments)
}

/// The propagators `U_0, U_1, ...` between consecutive measurements.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitarySchedule {
    /// The same `U` on every interval.
    Constant(UnitaryOperator),
    /// `U_t` for `t < len`; later intervals are undefined.
    Sequence(Vec<UnitaryOperator>),
}

impl UnitarySchedule {
    pub fn compile(schedule: &ControlSchedule, hams: &HamiltonianSet) -> Result<Self> {
        let unitaries = (0..schedule.len())
            .map(|t| interval_unitary(schedule, hams, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(UnitarySchedule::Sequence(unitaries))
    }

    pub fn get(&self, t: usize) -> Option<&UnitaryOperator> {
        match self {
            UnitarySchedule::Constant(u) => Some(u),
            UnitarySchedule::Sequence(list) => list.get(t),
        }
    }

    pub fn at(&self, t: usize) -> Result<&UnitaryOperator> {
        self.get(t).ok_or(Error::ScheduleTooShort { interval: t })
    }

    /// Number of defined intervals, `None` when unbounded.
    pub fn len(&self) -> Option<usize> {
        match self {
            UnitarySchedule::Constant(_) => None,
            UnitarySchedule::Sequence(list) => Some(list.len()),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            UnitarySchedule::Constant(u) => Some(u.dim()),
            UnitarySchedule::Sequence(list) => list.first().map(UnitaryOperator::dim),
        }
    }

    /// Apply `f` to every stored propagator.
    pub fn map<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&UnitaryOperator) -> Result<UnitaryOperator>,
    {
        Ok(match self {
            UnitarySchedule::Constant(u) => UnitarySchedule::Constant(f(u)?),
            UnitarySchedule::Sequence(list) => {
                UnitarySchedule::Sequence(list.iter().map(f).collect::<Result<_>>()?)
            }
        })
    }

    fn check_steps(&self, steps: usize) -> Result<()> {
        match self.len() {
            Some(len) if len < steps => Err(Error::ScheduleTooShort { interval: len }),
            _ => Ok(()),
        }
    }
}

/// One measurement instant: the pre-measurement state `|ψ(t)⟩`, the outcome,
/// its probability and the post-measurement state `|ψ(t)⟩_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridStep {
    pub pre: StateVector,
    pub outcome: BooleanWord,
    pub probability: f64,
    pub post: StateVector,
}

/// Chooses `U_t` from the history of measurement instants `0..=t`.
pub trait FeedbackPolicy {
    fn next_unitary(&self, t: usize, history: &[HybridStep]) -> Result<UnitaryOperator>;
}

impl FeedbackPolicy for UnitarySchedule {
    fn next_unitary(&self, t: usize, _history: &[HybridStep]) -> Result<UnitaryOperator> {
        self.at(t).cloned()
    }
}

impl<F> FeedbackPolicy for F
where
    F: Fn(usize, &[HybridStep]) -> Result<UnitaryOperator>,
{
    fn next_unitary(&self, t: usize, history: &[HybridStep]) -> Result<UnitaryOperator> {
        self(t, history)
    }
}

/// Feedback through the controls: `law` maps the measurement history to the
/// next interval's control segments, which are compiled against `hams`.
pub struct ControlFeedback<F> {
    hams: HamiltonianSet,
    period: f64,
    law: F,
}

impl<F> ControlFeedback<F>
where
    F: Fn(usize, &[HybridStep]) -> Vec<Segment>,
{
    pub fn new(hams: HamiltonianSet, period: f64, law: F) -> Self {
        Self { hams, period, law }
    }
}

impl<F> FeedbackPolicy for ControlFeedback<F>
where
    F: Fn(usize, &[HybridStep]) -> Vec<Segment>,
{
    fn next_unitary(&self, t: usize, history: &[HybridStep]) -> Result<UnitaryOperator> {
        let segments = (self.law)(t, history);
        check_segments(self.period, &segments)
            .map_err(|msg| Error::InvalidSchedule(format!("interval {t}: {msg}")))?;
        segments_unitary(&self.hams, &segments)
    }
}

/// Measurement instants `t = 0..=steps`.
pub type Trajectory = Vec<HybridStep>;

/// Run the hybrid loop under a fixed (feedforward) schedule.
///
/// The network is measured at `t = 0` before any evolution, then
/// `|ψ(t+1)⟩ = U_t |ψ(t)⟩_p` is measured for `t = 0..steps`. The trajectory
/// has `steps + 1` entries.
pub fn run_hybrid<R: Rng + ?Sized>(
    state0: &StateVector,
    unitaries: &UnitarySchedule,
    spec: &MeasurementSpec,
    basis: &Basis,
    steps: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    unitaries.check_steps(steps)?;
    run_feedback(state0, unitaries, spec, basis, steps, rng, |_| false)
}

/// Run the hybrid loop with `U_t` supplied by `policy`. Stops early after the
/// first instant for which `stop` returns true.
pub fn run_feedback<R, P, S>(
    state0: &StateVector,
    policy: &P,
    spec: &MeasurementSpec,
    basis: &Basis,
    steps: usize,
    rng: &mut R,
    stop: S,
) -> Result<Trajectory>
where
    R: Rng + ?Sized,
    P: FeedbackPolicy + ?Sized,
    S: Fn(&HybridStep) -> bool,
{
    let first = measure(state0, spec, basis, rng)?;
    let mut history = Vec::with_capacity(steps + 1);
    history.push(HybridStep {
        pre: state0.clone(),
        outcome: first.outcome,
        probability: first.probability,
        post: first.post,
    });
    for t in 0..steps {
        if stop(&history[t]) {
            break;
        }
        let u = policy.next_unitary(t, &history)?;
        let pre = history[t].post.evolve(&u)?;
        let m = measure(&pre, spec, basis, rng)?;
        history.push(HybridStep {
            pre,
            outcome: m.outcome,
            probability: m.probability,
            post: m.post,
        });
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, pauli_x, pauli_y, pauli_z, CVector, C64, I, ONE, ZERO};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(s: &str) -> BooleanWord {
        s.parse().unwrap()
    }

    #[test]
    fn zero_hamiltonian_gives_identity() {
        let hams = HamiltonianSet::drift_only(CMatrix::zeros(4, 4)).unwrap();
        let u = segment_unitary(&hams, &[], 3.1).unwrap();
        assert!(linalg::max_abs(&(u.matrix() - CMatrix::identity(4, 4))) < 1e-15);
    }

    #[test]
    fn half_pi_sigma_x_flips_with_phase() {
        let hams =
            HamiltonianSet::drift_only(pauli_x().scale(std::f64::consts::FRAC_PI_2)).unwrap();
        let u = segment_unitary(&hams, &[], 1.0).unwrap();
        let out = u.matrix() * CVector::from_column_slice(&[ONE, ZERO]);
        assert!((out[0]).norm() < 1e-15);
        assert!((out[1] - (-I)).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian_and_negative_duration() {
        let bad = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(
            HamiltonianSet::drift_only(bad),
            Err(Error::NotHermitian { .. })
        ));
        let hams = HamiltonianSet::drift_only(pauli_z()).unwrap();
        assert!(segment_unitary(&hams, &[], -1.0).is_err());
        assert!(segment_unitary(&hams, &[1.0], 1.0).is_err());
    }

    #[test]
    fn one_segment_interval_equals_segment_unitary() {
        let hams = HamiltonianSet::new(pauli_z(), vec![pauli_x(), pauli_y()]).unwrap();
        let schedule =
            ControlSchedule::new(0.8, vec![vec![Segment::new(0.8, vec![0.3, -1.2])]]).unwrap();
        let a = interval_unitary(&schedule, &hams, 0).unwrap();
        let b = segment_unitary(&hams, &[0.3, -1.2], 0.8).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert!(matches!(
            interval_unitary(&schedule, &hams, 1),
            Err(Error::ScheduleTooShort { interval: 1 })
        ));
    }

    #[test]
    fn commuting_segments_combine_exponents() {
        // H_a = Z⊗I and H_b = I⊗X commute
        let za = kron(&pauli_z(), &CMatrix::identity(2, 2));
        let xb = kron(&CMatrix::identity(2, 2), &pauli_x());
        let hams = HamiltonianSet::new(CMatrix::zeros(4, 4), vec![za.clone(), xb.clone()]).unwrap();
        let schedule = ControlSchedule::new(
            1.0,
            vec![vec![
                Segment::new(0.3, vec![1.0, 0.0]),
                Segment::new(0.7, vec![0.0, 1.0]),
            ]],
        )
        .unwrap();
        let u = interval_unitary(&schedule, &hams, 0).unwrap();
        let expected = linalg::expm_hermitian(&(za.scale(0.3) + xb.scale(0.7)), 1.0);
        assert!(linalg::max_abs(&(u.matrix() - expected)) < 1e-14);
    }

    #[test]
    fn idle_then_control_pattern_is_phased_product() {
        // Drift diagonal in the measurement basis; idle on [0, T - s*], then u* for s*.
        let n = 2;
        let h0 = CMatrix::from_diagonal(&CVector::from_column_slice(&[
            C64::new(0.4, 0.0),
            C64::new(-0.1, 0.0),
            C64::new(0.9, 0.0),
            C64::new(0.2, 0.0),
        ]));
        let hc = kron(&pauli_x(), &pauli_y());
        let hams = HamiltonianSet::new(h0, vec![hc]).unwrap();
        let (period, s_star, u_star) = (2.0, 0.5, 1.7);
        let schedule = ControlSchedule::new(
            period,
            vec![vec![
                Segment::new(period - s_star, vec![0.0]),
                Segment::new(s_star, vec![u_star]),
            ]],
        )
        .unwrap();
        let u = interval_unitary(&schedule, &hams, 0).unwrap();
        let active = segment_unitary(&hams, &[u_star], s_star).unwrap();
        for pos in 0..(1 << n) {
            let lambda = hams.drift()[(pos, pos)].re;
            let start = linalg::basis_vector(4, pos);
            let phase = (-I * lambda * (period - s_star)).exp();
            let expected = active.matrix() * &start * phase;
            assert!((u.matrix() * &start - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(ControlSchedule::new(1.0, vec![vec![Segment::new(0.5, vec![])]]).is_err());
        assert!(ControlSchedule::new(1.0, vec![vec![Segment::new(0.0, vec![]), Segment::new(1.0, vec![])]]).is_err());
        assert!(ControlSchedule::new(0.0, vec![]).is_err());
    }

    #[test]
    fn identity_evolution_keeps_basis_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let traj = run_hybrid(
            &StateVector::basis(&w("00")),
            &UnitarySchedule::Constant(UnitaryOperator::identity(2)),
            &MeasurementSpec::global(2),
            &Basis::computational(),
            5,
            &mut rng,
        )
        .unwrap();
        assert_eq!(traj.len(), 6);
        assert!(traj.iter().all(|s| s.outcome == w("00") && s.probability == 1.0));
    }

    #[test]
    fn short_schedule_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let res = run_hybrid(
            &StateVector::basis(&w("0")),
            &UnitarySchedule::Sequence(vec![UnitaryOperator::identity(1)]),
            &MeasurementSpec::global(1),
            &Basis::computational(),
            2,
            &mut rng,
        );
        assert!(matches!(res, Err(Error::ScheduleTooShort { .. })));
    }

    #[test]
    fn trajectories_are_deterministic_and_normalized() {
        let mut seed_rng = ChaCha8Rng::seed_from_u64(11);
        let u = UnitaryOperator::new(linalg::random_unitary(8, &mut seed_rng)).unwrap();
        let schedule = UnitarySchedule::Constant(u);
        let spec = MeasurementSpec::new(3, vec![2]).unwrap();
        let state0 = StateVector::new(3, linalg::random_state_vector(8, &mut seed_rng)).unwrap();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            run_hybrid(&state0, &schedule, &spec, &Basis::computational(), 50, &mut rng).unwrap()
        };
        let a = run(5);
        assert_eq!(a, run(5));
        for step in &a {
            assert!((step.pre.norm_sqr() - 1.0).abs() < 1e-10);
            assert!((step.post.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn control_feedback_compiles_law() {
        let hams = HamiltonianSet::new(CMatrix::zeros(2, 2), vec![pauli_x()]).unwrap();
        // flip back to |0> whenever |1> was seen
        let policy = ControlFeedback::new(hams, 1.0, |t, hist: &[HybridStep]| {
            let amp = if hist[t].outcome.bit(1) == 1 {
                std::f64::consts::FRAC_PI_2
            } else {
                0.0
            };
            vec![Segment::new(1.0, vec![amp])]
        });
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let start = StateVector::basis(&w("1"));
        let traj = run_feedback(
            &start,
            &policy,
            &MeasurementSpec::global(1),
            &Basis::computational(),
            4,
            &mut rng,
            |_| false,
        )
        .unwrap();
        let outcomes: Vec<String> = traj.iter().map(|s| s.outcome.to_string()).collect();
        assert_eq!(outcomes, ["1", "0", "0", "0", "0"]);
    }
}
