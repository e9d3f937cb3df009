use qubit_pbn::hitting::{estimate_hitting, hitting_lower_bound, OverlapPolicy};
use qubit_pbn::{Basis, BooleanWord, MeasurementSpec, StateVector};

fn w(s: &str) -> BooleanWord {
    s.parse().unwrap()
}

// δ = 1 bounds the miss probability per step by 3/4; the policy with
// overlap 9/16 misses with probability 7/16.
#[test]
fn overlap_policy_beats_the_bound() {
    let target = w("11");
    let policy = OverlapPolicy::new(target.clone(), 9.0 / 16.0).unwrap();
    let curve = estimate_hitting(
        &StateVector::basis(&w("00")),
        &policy,
        &MeasurementSpec::global(2),
        &Basis::computational(),
        &target,
        10_000,
        20,
        17,
    )
    .unwrap();
    assert_eq!(curve.curve.len(), 21);
    assert_eq!(curve.curve[0], 0.0);
    for t in 1..=20 {
        let bound = hitting_lower_bound(1.0, t).unwrap();
        let exact = 1.0 - (7.0f64 / 16.0).powi(t as i32);
        let se = (exact * (1.0 - exact) / 10_000.0).sqrt();
        assert!(curve.curve[t] >= bound - 3.0 * curve.std_error(t), "t = {t}");
        assert!((curve.curve[t] - exact).abs() <= 4.0 * se + 1e-12, "t = {t}");
    }
    assert!(curve.curve.windows(2).all(|p| p[0] <= p[1]));
}

#[test]
fn hitting_curve_is_reproducible() {
    let target = w("1");
    let policy = OverlapPolicy::new(target.clone(), 0.3).unwrap();
    let run = || {
        estimate_hitting(
            &StateVector::basis(&w("0")),
            &policy,
            &MeasurementSpec::global(1),
            &Basis::computational(),
            &target,
            2_000,
            10,
            5,
        )
        .unwrap()
    };
    assert_eq!(run(), run());
}
