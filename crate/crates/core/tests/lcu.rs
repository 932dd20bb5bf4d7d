mod common;

use proptest::prelude::*;
use rand::Rng;
use varivery::ansatz::{brick_gate, identity_angles};
use varivery::kernel::{predict, BasisFeatureMap, KernelModel};
use varivery::lcu::{compile_brickwork, compile_family, compile_lcu, Role};
use varivery::rng::stream_rng;
use varivery::statevec::{GateOp, Observable, StateVector};

fn random_model<R: Rng>(n_support: usize, n_inputs: u64, rng: &mut R) -> KernelModel {
    KernelModel {
        alpha: (0..n_support).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        support: (0..n_support).map(|_| rng.gen_range(0..n_inputs)).collect(),
        lambda: 1e-3,
        feature_map: "random".into(),
    }
}

fn expectation(gates: &[GateOp], n: usize, obs: &Observable) -> f64 {
    let mut s = StateVector::zero_state(n).unwrap();
    s.apply_all(gates).unwrap();
    obs.expectation(&s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn lcu_reproduces_the_kernel_predictor(n_support in 1usize..5, n in 1usize..4, seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 0, &[]);
        let fm = common::random_feature_map(n, 6, &mut rng);
        let model = random_model(n_support, 6, &mut rng);
        let lcu = compile_lcu(&model, &fm).unwrap();
        prop_assert!((lcu.beta.iter().map(|b| b * b).sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(lcu.signs.iter().all(|d| *d == 1.0 || *d == -1.0));
        let x = rng.gen_range(0..6);
        let want = predict(&model, &fm, x).unwrap();
        prop_assert!((lcu.evaluate(&fm, x).unwrap() - want).abs() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn brickwork_reproduces_source_expectations(n in 2usize..5, len in 1usize..12, seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 0, &[]);
        let gates = common::random_circuit(n, len, &mut rng);
        let layout = compile_brickwork(&gates, n).unwrap();
        prop_assert_eq!(layout.total_params(), 15 * layout.slots.len());
        for obs in [Observable::z_all(n), Observable::z(n - 1, n), Observable::ZeroProjector { qubits: (0..n).collect() }] {
            let a = expectation(&gates, n, &obs);
            let b = expectation(&layout.gates(), n, &obs);
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn identity_bricks_are_inert(n in 2usize..5, len in 1usize..10, at in 0usize..40, q in 0usize..4, seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 0, &[]);
        let gates = compile_brickwork(&common::random_circuit(n, len, &mut rng), n).unwrap().gates();
        let q = q % (n - 1);
        let mut padded = gates.clone();
        padded.insert(at % (gates.len() + 1), brick_gate(&identity_angles(), q, q + 1));
        let obs = Observable::z_all(n);
        prop_assert!((expectation(&gates, n, &obs) - expectation(&padded, n, &obs)).abs() <= 1e-10);
    }

    #[test]
    fn compiled_lcu_family_matches_the_circuit(n_support in 1usize..4, n in 1usize..3, seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 0, &[]);
        let fm = common::random_feature_map(n, 4, &mut rng);
        let model = random_model(n_support, 4, &mut rng);
        let lcu = compile_lcu(&model, &fm).unwrap();
        prop_assume!(lcu.n_qubits() >= 2);
        let domain: Vec<u64> = (0..4).collect();
        let family = compile_family(|x| lcu.brickwork_source(&fm, x), &domain, lcu.n_qubits(), lcu.measurement.clone()).unwrap();
        for &x in &domain {
            let got = lcu.scale * family.template.evaluate(x, &family.theta).unwrap();
            prop_assert!((got - lcu.evaluate(&fm, x).unwrap()).abs() <= 1e-8);
        }
    }
}

#[test]
fn two_point_model_on_one_work_qubit() {
    let fm = BasisFeatureMap { n_qubits: 1 };
    let model = KernelModel {
        alpha: vec![0.8, -0.3],
        support: vec![0, 1],
        lambda: 1e-3,
        feature_map: "basis(1)".into(),
    };
    let lcu = compile_lcu(&model, &fm).unwrap();
    assert_eq!(lcu.n_qubits(), 2);
    let family = compile_family(|x| lcu.brickwork_source(&fm, x), &[0, 1], 2, lcu.measurement.clone()).unwrap();
    for x in 0..2 {
        let want = predict(&model, &fm, x).unwrap();
        assert!((lcu.evaluate(&fm, x).unwrap() - want).abs() <= 1e-8);
        assert!((lcu.scale * family.template.evaluate(x, &family.theta).unwrap() - want).abs() <= 1e-8);
    }
    assert!(family.param_map.iter().all(|s| s.role == Role::Param && s.angles.len() == 15));
}

#[test]
fn cnot_compiles_to_a_single_brick() {
    let layout = compile_brickwork(&[GateOp::cnot(0, 1)], 2).unwrap();
    assert_eq!(layout.slots.len(), 1);
    for input in 0..4 {
        let prep: Vec<GateOp> = (0..2)
            .filter(|q| input >> (1 - q) & 1 == 1)
            .map(|q| GateOp::PauliX { target: q })
            .collect();
        let mut a = prep.clone();
        a.push(GateOp::cnot(0, 1));
        let mut b = prep;
        b.extend(layout.gates());
        for obs in [Observable::z(0, 2), Observable::z(1, 2)] {
            assert!((expectation(&a, 2, &obs) - expectation(&b, 2, &obs)).abs() < 1e-10);
        }
    }
}

#[test]
fn distance_two_cnot_uses_three_bricks() {
    let layout = compile_brickwork(&[GateOp::cnot(0, 2)], 3).unwrap();
    assert_eq!(layout.slots.len() - layout.padding_count(), 3);
}
