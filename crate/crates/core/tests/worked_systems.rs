//! Closed-form checks on small systems whose behaviour is known exactly.

use qubit_pbn::dynamics::{segment_unitary, HamiltonianSet};
use qubit_pbn::global::{
    enumerate_mappings, exact_chain, marginal_step, mapping_table, transition_matrix, Initial,
};
use qubit_pbn::linalg::{self, CMatrix, CVector, C64};
use qubit_pbn::local::{beta_init, beta_step, oracle_path_probabilities, path_probabilities};
use qubit_pbn::measurement::{collapse, outcome_distribution, projector_tensor};
use qubit_pbn::{fixtures, Basis, BooleanWord, MeasurementSpec, StateVector, UnitarySchedule};

fn w(s: &str) -> BooleanWord {
    s.parse().unwrap()
}

fn words(list: &[&str]) -> Vec<BooleanWord> {
    list.iter().map(|s| w(s)).collect()
}

fn assert_close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b}");
}

#[test]
fn pauli_xy_chain_is_a_permutation() {
    let p = transition_matrix(&fixtures::pauli_xy());
    let pairs = [("00", "11"), ("11", "00"), ("01", "10"), ("10", "01")];
    for from in BooleanWord::all(2) {
        for to in BooleanWord::all(2) {
            let expected = pairs
                .iter()
                .any(|(a, b)| w(a) == from && w(b) == to) as u8 as f64;
            assert_close(p.probability(&from, &to), expected, 1e-12);
        }
    }
    let maps = enumerate_mappings(&fixtures::pauli_xy(), 0.0).unwrap();
    assert_eq!(maps.len(), 1);
    assert_close(maps[0].1, 1.0, 1e-12);
    assert_eq!(maps[0].0.alpha(), &[4, 3, 2, 1]);
}

#[test]
fn pauli_xy_matrix_by_hand() {
    // (|0><1| + |1><0|) ⊗ (-i|0><1| + i|1><0|)
    let i = linalg::I;
    let z = linalg::ZERO;
    let expected = CMatrix::from_row_slice(
        4,
        4,
        &[z, z, z, -i, z, z, i, z, z, -i, z, z, i, z, z, z],
    );
    assert_eq!(fixtures::pauli_xy().matrix(), &expected);
}

#[test]
fn flip_and_mix_has_sixteen_equal_mappings() {
    let u = fixtures::flip_and_mix();
    let maps = enumerate_mappings(&u, 0.0).unwrap();
    assert_eq!(maps.len(), 16);
    for (_, p) in &maps {
        assert_close(*p, 1.0 / 16.0, 1e-12);
    }
    let p = transition_matrix(&u);
    let halves = [
        ("00", "10"),
        ("00", "11"),
        ("01", "11"),
        ("01", "10"),
        ("10", "00"),
        ("10", "01"),
        ("11", "01"),
        ("11", "00"),
    ];
    for (a, b) in halves {
        assert_close(p.probability(&w(a), &w(b)), 0.5, 1e-12);
    }
    let total: f64 = mapping_table(&u).unwrap().iter().map(|(_, p)| p).sum();
    assert_close(total, 1.0, 1e-10);
}

#[test]
fn xx_yy_propagator_closed_form() {
    let hams = HamiltonianSet::drift_only(fixtures::xx_yy_hamiltonian()).unwrap();
    let u = segment_unitary(&hams, &[], 1.0).unwrap();
    assert!(linalg::max_abs(&(u.matrix() - fixtures::xx_yy_propagator())) < 1e-12);
}

#[test]
fn xx_yy_chain_and_single_qubit_marginals() {
    let hams = HamiltonianSet::drift_only(fixtures::xx_yy_hamiltonian()).unwrap();
    let u = segment_unitary(&hams, &[], 1.0).unwrap();
    let p = transition_matrix(&u);
    let entries = [
        ("00", "00", 0.75),
        ("00", "11", 0.25),
        ("01", "10", 1.0),
        ("10", "01", 1.0),
        ("11", "11", 0.75),
        ("11", "00", 0.25),
    ];
    for (a, b, v) in entries {
        assert_close(p.probability(&w(a), &w(b)), v, 1e-12);
    }
    for q in 1..=2 {
        let m = marginal_step(&p, &w("00"), q);
        assert_close(m[0], 0.75, 1e-12);
        assert_close(m[1], 0.25, 1e-12);
    }
    // joint flip is 1/4, not the product 1/16 of the marginal flips
    let joint = p.probability(&w("00"), &w("11"));
    let product = marginal_step(&p, &w("00"), 1)[1] * marginal_step(&p, &w("00"), 2)[1];
    assert_close(joint, 0.25, 1e-12);
    assert_close(product, 1.0 / 16.0, 1e-12);
}

#[test]
fn four_state_initial_distribution() {
    let probs = outcome_distribution(
        &fixtures::four_state_initial(),
        &MeasurementSpec::global(2),
        &Basis::computational(),
    )
    .unwrap();
    for (a, b) in probs.iter().zip(fixtures::four_state_p0()) {
        assert_close(*a, b, 1e-15);
    }
}

#[test]
fn four_state_chain_converges_to_uniform() {
    let p = fixtures::four_state_chain().as_transition();
    let table = exact_chain(
        &Initial::Distribution(fixtures::four_state_p0()),
        &vec![p; 50],
        50,
    )
    .unwrap();
    for &x in &table[50] {
        assert_close(x, 0.25, 1e-9);
    }
}

#[test]
fn projector_cases() {
    let spec = MeasurementSpec::global(2);
    let p = projector_tensor(&w("10"), &spec, &Basis::computational()).unwrap();
    let mut expected = CMatrix::zeros(4, 4);
    expected[(2, 2)] = linalg::ONE;
    assert_eq!(p, expected);
    let spec = MeasurementSpec::new(2, vec![1]).unwrap();
    let p = projector_tensor(&w("0"), &spec, &Basis::computational()).unwrap();
    let diag: Vec<f64> = (0..4).map(|i| p[(i, i)].re).collect();
    assert_eq!(diag, vec![1.0, 1.0, 0.0, 0.0]);
}

// Three-qubit local measurement of qubits 1 and 2 under σx ⊗ R ⊗ σz.

fn three_qubit() -> (StateVector, UnitarySchedule) {
    (
        fixtures::three_qubit_initial(),
        UnitarySchedule::Constant(fixtures::flip_rotate_phase()),
    )
}

#[test]
fn three_qubit_first_outcome_and_post_state() {
    let (state, _) = three_qubit();
    let spec = MeasurementSpec::prefix(3, 2).unwrap();
    let probs = outcome_distribution(&state, &spec, &Basis::computational()).unwrap();
    assert_close(probs[w("10").position()], 0.25, 1e-15);
    let m = collapse(&state, &spec, &Basis::computational(), &w("10")).unwrap();
    assert!(m.post.phase_distance(&StateVector::basis(&w("101"))) < 1e-12);
    let b0 = beta_init(&state, &w("10")).unwrap();
    assert_close(b0[0].norm(), 0.0, 1e-15);
    assert_close((b0[1] - C64::new(0.5, 0.0)).norm(), 0.0, 1e-15);
}

#[test]
fn three_qubit_first_step() {
    let (state, us) = three_qubit();
    let b0 = beta_init(&state, &w("10")).unwrap();
    let b1 = beta_step(&b0, us.at(0).unwrap(), &w("10"), &w("00")).unwrap();
    let expected = CVector::from_column_slice(&[linalg::ZERO, C64::new(-3f64.sqrt() / 2.0, 0.0)]);
    assert!((b1 - expected).norm() < 1e-12);
}

/// Under `σx ⊗ R ⊗ σz` the first qubit flips deterministically every
/// interval, so after `11` at t = 2 the outcome at t = 3 starts with 0.
#[test]
fn three_qubit_listed_path_ends_in_impossible_branch() {
    let (state, us) = three_qubit();
    let path = words(&["10", "00", "11", "10"]);
    let probs = path_probabilities(&state, &us, &path).unwrap();
    assert_eq!(probs.len(), 4);
    assert_close(probs[0], 0.25, 1e-12);
    assert_close(probs[1], 0.75, 1e-12);
    assert_close(probs[2], 0.25, 1e-12);
    assert_close(probs[3], 0.0, 1e-12);
    let oracle = oracle_path_probabilities(
        &state,
        &us,
        &MeasurementSpec::prefix(3, 2).unwrap(),
        &Basis::computational(),
        &path,
    )
    .unwrap();
    for (a, b) in probs.iter().zip(&oracle) {
        assert_close(*a, *b, 1e-12);
    }
}

#[test]
fn three_qubit_alternating_path() {
    let (state, us) = three_qubit();
    let path = words(&["10", "00", "11", "01"]);
    let rec = qubit_pbn::local::path_record(&state, &us, &path).unwrap();
    let expected_p = [0.25, 0.75, 0.25, 0.75];
    let h = 3f64.sqrt() / 2.0;
    let expected_beta = [0.5, -h, -0.5, h];
    for t in 0..4 {
        assert_close(rec.probs[t], expected_p[t], 1e-12);
        assert_close(rec.betas[t][0].norm(), 0.0, 1e-12);
        assert_close((rec.betas[t][1] - C64::new(expected_beta[t], 0.0)).norm(), 0.0, 1e-12);
    }
    let oracle = oracle_path_probabilities(
        &state,
        &us,
        &MeasurementSpec::prefix(3, 2).unwrap(),
        &Basis::computational(),
        &path,
    )
    .unwrap();
    for (a, b) in rec.probs.iter().zip(&oracle) {
        assert_close(*a, *b, 1e-12);
    }
}

#[test]
fn swap_memory_is_not_markovian() {
    // Measuring qubit 1 while SWAP runs between measurements: the outcome at
    // t = 2 repeats the one at t = 0, which the t = 1 outcome does not reveal.
    let swap = qubit_pbn::UnitaryOperator::new(linalg::qubit_permutation(2, &[2, 1])).unwrap();
    let plus = 0.5;
    let state = StateVector::from_amplitudes(2, &[C64::new(plus, 0.0); 4]).unwrap();
    let us = UnitarySchedule::Constant(swap);
    let gap = qubit_pbn::local::markov_gap(&state, &us, &w("0"), &w("1"), &w("0")).unwrap();
    assert_close(gap.conditional, 1.0, 1e-12);
    assert_close(gap.marginal, 0.5, 1e-12);
    assert!(gap.gap() > 0.05);
}
