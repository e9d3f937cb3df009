//! Randomized invariants over states, frames, chains and local paths.

use nalgebra::Matrix2;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qubit_pbn::global::{
    mapping_table, marginal_step, measurement_frame, transition_matrix, BooleanMapping,
};
use qubit_pbn::linalg::{self, CMatrix};
use qubit_pbn::local::{oracle_path_probabilities, path_probabilities, LocalFrame};
use qubit_pbn::measurement::{outcome_distribution, projector_tensor};
use qubit_pbn::{Basis, BooleanWord, MeasurementSpec, Observable, StateVector, UnitaryOperator, UnitarySchedule};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_observable(rng: &mut ChaCha8Rng) -> Observable {
    let u = linalg::random_unitary(2, rng);
    let frame = Matrix2::new(u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    let l0: f64 = rng.random_range(-2.0..2.0);
    Observable::from_frame(l0, l0 + rng.random_range(0.1..2.0), frame).unwrap()
}

fn random_basis(k: usize, rng: &mut ChaCha8Rng) -> Basis {
    match rng.random_range(0..3) {
        0 => Basis::computational(),
        1 => Basis::Uniform(random_observable(rng)),
        _ => Basis::PerQubit((0..k).map(|_| random_observable(rng)).collect()),
    }
}

fn random_spec(n: usize, k: usize, rng: &mut ChaCha8Rng) -> MeasurementSpec {
    let mut qubits: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        qubits.swap(i, j);
    }
    let mut measured = qubits[..k].to_vec();
    measured.sort_unstable();
    MeasurementSpec::new(n, measured).unwrap()
}

fn random_u(n: usize, rng: &mut ChaCha8Rng) -> UnitaryOperator {
    UnitaryOperator::new(linalg::random_unitary(1 << n, rng)).unwrap()
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    StateVector::new(n, linalg::random_state_vector(1 << n, rng)).unwrap()
}

fn random_word(k: usize, rng: &mut ChaCha8Rng) -> BooleanWord {
    BooleanWord::from_position(k, rng.random_range(0..1usize << k)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn local_recursion_matches_full_state(seed in any::<u64>(), n in 2usize..=4, kf in 0.0f64..1.0, len in 1usize..=6) {
        let mut r = rng(seed);
        let k = 1 + ((n - 1) as f64 * kf) as usize;
        let spec = random_spec(n, k.min(n - 1), &mut r);
        let basis = random_basis(spec.k(), &mut r);
        let state = random_state(n, &mut r);
        let schedule = if r.random_bool(0.5) {
            UnitarySchedule::Constant(random_u(n, &mut r))
        } else {
            UnitarySchedule::Sequence((0..len).map(|_| random_u(n, &mut r)).collect())
        };
        let path: Vec<BooleanWord> = (0..len).map(|_| random_word(spec.k(), &mut r)).collect();
        let frame = LocalFrame::new(&spec, &basis).unwrap();
        let fast = frame.path_probabilities(&state, &schedule, &path).unwrap();
        let oracle = oracle_path_probabilities(&state, &schedule, &spec, &basis, &path).unwrap();
        prop_assert_eq!(fast.len(), oracle.len());
        for (a, b) in fast.iter().zip(&oracle) {
            prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn transition_matrices_are_doubly_stochastic(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let u = random_u(n, &mut r);
        let basis = random_basis(n, &mut r);
        let p = transition_matrix(&measurement_frame(&u, &basis).unwrap());
        let m = p.matrix();
        for i in 0..m.nrows() {
            prop_assert!((m.row(i).sum() - 1.0).abs() <= 1e-12);
            prop_assert!((m.column(i).sum() - 1.0).abs() <= 1e-12);
        }
        prop_assert!(m.iter().all(|&v| v >= 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projectors_resolve_identity(seed in any::<u64>(), n in 1usize..=4, kf in 0.0f64..1.0) {
        let mut r = rng(seed);
        let k = 1 + ((n - 1) as f64 * kf).round() as usize;
        let spec = random_spec(n, k, &mut r);
        let basis = random_basis(k, &mut r);
        let dim = 1 << n;
        let mut total = CMatrix::zeros(dim, dim);
        for x in BooleanWord::all(k) {
            let p = projector_tensor(&x, &spec, &basis).unwrap();
            prop_assert!(linalg::max_abs(&(&p * &p - &p)) < 1e-12);
            prop_assert!(linalg::hermiticity_deviation(&p) < 1e-12);
            total += p;
        }
        prop_assert!(linalg::max_abs(&(total - CMatrix::identity(dim, dim))) < 1e-12);
        let state = random_state(n, &mut r);
        let probs = outcome_distribution(&state, &spec, &basis).unwrap();
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frame_undoes_its_own_rotation(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let basis = random_basis(n, &mut r);
        let v = random_u(n, &mut r);
        let f = basis.frame_product(n);
        let rotated = UnitaryOperator::new(&f * v.matrix() * f.adjoint()).unwrap();
        let back = measurement_frame(&rotated, &basis).unwrap();
        prop_assert!(linalg::max_abs(&(back.matrix() - v.matrix())) < 1e-12);
    }

    #[test]
    fn mapping_mixture_reproduces_chain(seed in any::<u64>(), n in 1usize..=2) {
        let mut r = rng(seed);
        let u = random_u(n, &mut r);
        let p = transition_matrix(&u);
        let dim = 1 << n;
        let mut mix = linalg::RMatrix::zeros(dim, dim);
        let mut total = 0.0;
        for (m, w) in mapping_table(&u).unwrap() {
            mix += m.matrix() * w;
            total += w;
        }
        prop_assert!((total - 1.0).abs() < 1e-12);
        // F acts on one-hot columns, so its mean is the transpose of P
        prop_assert!((mix - p.matrix().transpose()).abs().max() < 1e-12);
    }

    #[test]
    fn single_qubit_marginals_sum_rows(seed in any::<u64>(), q in 1usize..=2) {
        let mut r = rng(seed);
        let p = transition_matrix(&random_u(2, &mut r));
        for from in BooleanWord::all(2) {
            let m = marginal_step(&p, &from, q);
            let mut direct = [0.0; 2];
            for to in BooleanWord::all(2) {
                direct[to.bit(q) as usize] += p.probability(&from, &to);
            }
            prop_assert!((m[0] - direct[0]).abs() < 1e-14 && (m[1] - direct[1]).abs() < 1e-14);
            prop_assert!((m[0] + m[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn words_round_trip(n in 1usize..=10, pos in any::<usize>()) {
        let x = BooleanWord::from_position(n, pos % (1 << n)).unwrap();
        prop_assert_eq!(x.position() + 1, x.index());
        prop_assert_eq!(BooleanWord::from_index(n, x.index()).unwrap(), x.clone());
        prop_assert_eq!(BooleanWord::from_one_hot(&x.one_hot()).unwrap(), x.clone());
        prop_assert_eq!(x.to_string().parse::<BooleanWord>().unwrap(), x);
    }

    #[test]
    fn global_prefix_is_the_chain(seed in any::<u64>(), n in 1usize..=3, len in 1usize..=5) {
        // with every qubit measured, path conditionals are transition entries
        let mut r = rng(seed);
        let u = random_u(n, &mut r);
        let x0 = random_word(n, &mut r);
        let path: Vec<BooleanWord> = std::iter::once(x0.clone())
            .chain((1..len).map(|_| random_word(n, &mut r)))
            .collect();
        let sched = UnitarySchedule::Constant(u.clone());
        let probs = path_probabilities(&StateVector::basis(&x0), &sched, &path).unwrap();
        let p = transition_matrix(&u);
        prop_assert!((probs[0] - 1.0).abs() < 1e-12);
        for t in 1..probs.len() {
            prop_assert!((probs[t] - p.probability(&path[t - 1], &path[t])).abs() < 1e-12);
        }
    }
}

#[test]
fn identity_mapping_is_identity_matrix() {
    let m = BooleanMapping::identity(2).matrix();
    assert_eq!(m, linalg::RMatrix::identity(4, 4));
}

#[test]
fn norm_survives_ten_thousand_steps() {
    let mut r = rng(7);
    let n = 3;
    let u = random_u(n, &mut r);
    let mut psi = random_state(n, &mut r);
    let spec = MeasurementSpec::prefix(n, 1).unwrap();
    let basis = Basis::computational();
    for _ in 0..10_000 {
        psi = psi.evolve(&u).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-10);
        psi = qubit_pbn::measurement::measure(&psi, &spec, &basis, &mut r).unwrap().post;
    }
    let z = u.matrix().adjoint() * u.matrix() - CMatrix::identity(8, 8);
    assert!(linalg::max_abs(&z) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn next_conditionals_sum_to_one(seed in any::<u64>(), n in 2usize..=4, kf in 0.0f64..1.0) {
        let mut r = rng(seed);
        let k = 1 + ((n - 1) as f64 * kf) as usize;
        let k = k.min(n - 1);
        let u = random_u(n, &mut r);
        let state = random_state(n, &mut r);
        let x0 = random_word(k, &mut r);
        let beta = qubit_pbn::local::beta_init(&state, &x0).unwrap();
        prop_assume!(beta.norm() > 1e-6);
        let total: f64 = BooleanWord::all(k)
            .map(|x1| qubit_pbn::local::beta_step(&beta, &u, &x0, &x1).unwrap().norm_squared())
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reconstructed_post_state_matches_collapse(seed in any::<u64>(), n in 2usize..=4, kf in 0.0f64..1.0, len in 1usize..=4) {
        let mut r = rng(seed);
        let k = (1 + ((n - 1) as f64 * kf) as usize).min(n - 1);
        let spec = MeasurementSpec::prefix(n, k).unwrap();
        let sched = UnitarySchedule::Constant(random_u(n, &mut r));
        let state = random_state(n, &mut r);
        let frame = LocalFrame::prefix(n, k).unwrap();
        let rec = qubit_pbn::local::sample_local_path(&state, &sched, &frame, len, &mut r).unwrap();
        // replay the same outcomes on the full state with explicit collapses
        let mut psi = state;
        for t in 0..=len {
            if t > 0 {
                psi = psi.evolve(sched.at(t - 1).unwrap()).unwrap();
            }
            psi = qubit_pbn::measurement::collapse(&psi, &spec, &Basis::computational(), &rec.outcomes[t])
                .unwrap()
                .post;
            let rebuilt = qubit_pbn::local::reconstruct_post(n, &rec.outcomes[t], &rec.betas[t]).unwrap();
            prop_assert!(rebuilt.phase_distance(&psi) < 1e-10);
            prop_assert!((rec.betas[t].norm_squared() - rec.probs[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_paths_are_certain_after_the_first_outcome(seed in any::<u64>(), n in 2usize..=4, len in 2usize..=6) {
        let mut r = rng(seed);
        let k = 1 + (seed as usize % (n - 1));
        let state = random_state(n, &mut r);
        let x0 = random_word(k, &mut r);
        let path = vec![x0; len];
        let probs = path_probabilities(&state, &UnitarySchedule::Constant(UnitaryOperator::identity(n)), &path).unwrap();
        prop_assume!(probs[0] > 1e-8);
        for p in &probs[1..] {
            prop_assert!((p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn outcome_marginals_are_distributions(seed in any::<u64>(), n in 2usize..=3, steps in 0usize..=4) {
        let mut r = rng(seed);
        let spec = random_spec(n, 1, &mut r);
        let basis = random_basis(1, &mut r);
        let sched = UnitarySchedule::Constant(random_u(n, &mut r));
        let table = qubit_pbn::local::outcome_marginals(&random_state(n, &mut r), &sched, &spec, &basis, steps).unwrap();
        prop_assert_eq!(table.len(), steps + 1);
        for row in table {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().all(|&p| p > -1e-14));
        }
    }
}
