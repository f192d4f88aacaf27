use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use pgst::dynamics::{
    evolve, find_transfer_time, scan_max_fidelity, transfer_fidelity, FidelityTrace, SearchOptions,
};
use pgst::PureState;
use proptest::prelude::*;

/// Dense `exp(iAt) v` by nalgebra's Pade scaling-and-squaring.
fn brute_force_evolve(amps: &[Complex64], t: f64) -> Vec<Complex64> {
    let n = amps.len();
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n.saturating_sub(1) {
        a[(k, k + 1)] = Complex64::new(0.0, t);
        a[(k + 1, k)] = Complex64::new(0.0, t);
    }
    let u = a.exp();
    let v = nalgebra::DVector::from_column_slice(amps);
    (u * v).iter().copied().collect()
}

fn random_state(n: usize, seed: &[f64]) -> PureState {
    let amps: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(seed[2 * k % seed.len()], seed[(2 * k + 1) % seed.len()]))
        .collect();
    PureState::numeric(amps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_is_unitary(n in 1usize..=60, t in -200.0f64..200.0, seed in prop::collection::vec(-1.0f64..1.0, 8)) {
        prop_assume!(seed.iter().any(|x| x.abs() > 1e-3));
        let v = random_state(n, &seed);
        let out = evolve(&v, t);
        prop_assert!((out.norm() - v.norm()).abs() < 1e-10);
    }

    #[test]
    fn group_law(n in 1usize..=30, s in 0.0f64..50.0, t in 0.0f64..50.0, seed in prop::collection::vec(-1.0f64..1.0, 8)) {
        prop_assume!(seed.iter().any(|x| x.abs() > 1e-3));
        let v = random_state(n, &seed);
        let a = evolve(&evolve(&v, s), t).to_complex();
        let b = evolve(&v, s + t).to_complex();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn agrees_with_dense_exponential(n in 1usize..=12, t in 0.0f64..100.0, seed in prop::collection::vec(-1.0f64..1.0, 8)) {
        prop_assume!(seed.iter().any(|x| x.abs() > 1e-3));
        let v = random_state(n, &seed);
        let a = evolve(&v, t).to_complex();
        let b = brute_force_evolve(&v.to_complex(), t);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).norm() < 1e-8, "{} vs {}", x, y);
        }
    }

    #[test]
    fn transfer_is_symmetric_under_mirror(n in 2usize..=30, t in 0.0f64..100.0, seed in prop::collection::vec(-1.0f64..1.0, 8)) {
        prop_assume!(seed.iter().any(|x| x.abs() > 1e-3));
        let v = random_state(n, &seed);
        let w = v.mirror();
        let (a, _) = transfer_fidelity(&v, &w, t).unwrap();
        let (b, _) = transfer_fidelity(&w, &v, t).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn brute_force_short_paths() {
    let e1 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let out = brute_force_evolve(&e1, PI / 2.0);
    assert!((out[1].norm() - 1.0).abs() < 1e-12);
    let e1 = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    ];
    let out = brute_force_evolve(&e1, PI / 2f64.sqrt());
    assert!((out[2].norm() - 1.0).abs() < 1e-12);
}

#[test]
fn trace_csv_and_bounds() {
    let v = PureState::exact_integers(11, &[(1, 1), (3, 1)]).unwrap();
    let trace = FidelityTrace::sample(&v, &v.mirror(), 5.0, 0.5).unwrap();
    assert_eq!(trace.samples.len(), 11);
    for s in &trace.samples {
        assert!(s.overlap <= 1.0 + 1e-9);
        assert_eq!(s.fidelity, s.overlap * s.overlap);
    }
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,overlap,fidelity\n0,"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn p11_pair_time_search() {
    let v = PureState::exact_integers(11, &[(1, 1), (3, 1)]).unwrap();
    let r = find_transfer_time(&v, 0.01, SearchOptions::default()).unwrap();
    eprintln!("{r:?}");
    assert!(r.complete);
    assert!(r.achieved_overlap >= 0.99);
    assert!(r.achieved_overlap >= r.overlap_lower_bound - 1e-6);
}

#[test]
fn scan_is_deterministic() {
    let v = PureState::vertex(11, 1).unwrap();
    let a = scan_max_fidelity(&v, &v.mirror(), 200.0, 0.01).unwrap();
    let b = scan_max_fidelity(&v, &v.mirror(), 200.0, 0.01).unwrap();
    assert_eq!(a, b);
    assert!(a.overlap_star < 1.0);
}
