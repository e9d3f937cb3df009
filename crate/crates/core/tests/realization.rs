use qubit_pbn::fixtures;
use qubit_pbn::global::transition_matrix;
use qubit_pbn::realization::{fit_unitary, realize_chain, residual, FitOptions};

#[test]
fn exhibited_unitary_realizes_four_state_chain() {
    let w = fixtures::four_state_chain();
    let u = fixtures::four_state_unitary();
    assert!(residual(&u, w.matrix()).unwrap() < 1e-12);
    // the chain read from U is W itself
    let p = transition_matrix(&u);
    assert!((p.matrix() - w.matrix()).amax() < 1e-12);
}

#[test]
fn fit_finds_four_state_realization() {
    let w = fixtures::four_state_chain();
    let start = std::time::Instant::now();
    let fit = fit_unitary(&w, &FitOptions::default(), 20240601).unwrap();
    assert!(fit.residual < 1e-6, "residual {}", fit.residual);
    assert!(start.elapsed().as_secs() < 60);
    eprintln!("residual {:e}, restarts {}", fit.residual, fit.restarts_used);
}

#[test]
fn realized_chain_matches_target() {
    let w = fixtures::four_state_chain();
    let real = realize_chain(&w, &fixtures::four_state_p0(), 50, &FitOptions::default(), 3).unwrap();
    assert!(real.fit.converged);
    assert!(real.deviation < 1e-3);
    for &x in &real.p[50] {
        assert!((x - 0.25).abs() < 1e-9);
    }
}

#[test]
fn squared_moduli_of_random_unitaries_refit() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    for seed in 0..5 {
        let u = qubit_pbn::linalg::random_unitary(4, &mut rng);
        let w = qubit_pbn::realization::StochasticMatrix::new(u.map(|z| z.norm_sqr())).unwrap();
        let fit = fit_unitary(&w, &FitOptions::default(), seed).unwrap();
        assert!(fit.converged, "seed {seed}: {}", fit.residual);
    }
}
