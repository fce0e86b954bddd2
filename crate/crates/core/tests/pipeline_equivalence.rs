//! Canonicalization and layer merging checked against dense unitaries.

use ftflow_core::canon::{canonicalize, conjugate_by_rotation, CanonicalForm};
use ftflow_core::circuit::{render_circuit, parse_circuit, GateCircuit, PauliRotation};
use ftflow_core::layers::{apply_merges, build_layers, ga_optimize, greedy_matching, greedy_optimize, GaConfig, Layering};
use ftflow_core::oracle::{equivalent_up_to_phase, unitary_of_gates, unitary_of_rotations, verify_canonical_form};
use ftflow_core::synth::{random_circuit, random_pi8_rotations};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn circuit(seed: u64, n: usize, gates: usize) -> GateCircuit {
    random_circuit(&mut ChaCha8Rng::seed_from_u64(seed), n, gates)
}

fn same_unitary(a: &[PauliRotation], b: &[PauliRotation], n: usize) -> bool {
    let (u, v) = (unitary_of_rotations(a, n).unwrap(), unitary_of_rotations(b, n).unwrap());
    equivalent_up_to_phase(&u, &v, 1e-9).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_is_equivalent(seed in any::<u64>(), n in 1usize..=4, gates in 0usize..=30) {
        let gc = circuit(seed, n, gates);
        let cf = canonicalize(&gc).unwrap();
        let report = verify_canonical_form(&gc, &cf, 1e-9).unwrap();
        prop_assert!(report.passed(), "{report:?}\n{}", render_circuit(&gc));
        prop_assert_eq!(cf.t_count(), gc.t_count());
        cf.check_structure().unwrap();
    }

    #[test]
    fn dense_unitaries_are_unitary(seed in any::<u64>(), n in 1usize..=3, gates in 0usize..=20) {
        let gc = circuit(seed, n, gates);
        prop_assert!(unitary_of_gates(&gc).unwrap().unitarity_error() <= 1e-10);
        let cf = canonicalize(&gc).unwrap();
        let u = unitary_of_rotations(&cf.to_rotation_circuit().rotations, n).unwrap();
        prop_assert!(u.unitarity_error() <= 1e-10);
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), n in 1usize..=5, gates in 0usize..=40) {
        let cf = canonicalize(&circuit(seed, n, gates)).unwrap();
        let back = CanonicalForm::from_json(cf.to_json()).unwrap();
        prop_assert_eq!(back, cf);
    }

    #[test]
    fn tableau_matches_sequential_conjugation(seed in any::<u64>(), n in 1usize..=5, gates in 0usize..=40) {
        let cf = canonicalize(&circuit(seed, n, gates)).unwrap();
        for q in 0..n {
            for g in [ftflow_core::Pauli::X, ftflow_core::Pauli::Z] {
                let mut p = ftflow_core::PauliString::single(n, q, g);
                for c in cf.clifford_trace.iter().rev() {
                    p = conjugate_by_rotation(c, &p).unwrap();
                }
                prop_assert_eq!(cf.tableau.conjugate(&ftflow_core::PauliString::single(n, q, g)).unwrap(), p);
            }
        }
    }

    #[test]
    fn sign_corruption_is_detected(seed in any::<u64>(), n in 1usize..=4, gates in 1usize..=30, pick in any::<usize>()) {
        let gc = circuit(seed, n, gates);
        let mut cf = canonicalize(&gc).unwrap();
        prop_assume!(!cf.pi8.is_empty());
        let i = pick % cf.pi8.len();
        cf.pi8[i] = PauliRotation::new(cf.pi8[i].axis().negated(), cf.pi8[i].angle()).unwrap();
        prop_assert!(!verify_canonical_form(&gc, &cf, 1e-9).unwrap().unitary_ok);
    }

    #[test]
    fn merging_preserves_unitary(seed in any::<u64>(), n in 1usize..=4, count in 1usize..=40) {
        let rotations = random_pi8_rotations(&mut ChaCha8Rng::seed_from_u64(seed), n, count);
        let seq = Layering::sequential(n, rotations.clone()).unwrap();
        let (greedy, _) = greedy_optimize(&seq, 0.5);
        prop_assert!(greedy.depth() <= seq.depth());
        prop_assert!(same_unitary(&rotations, &greedy.ordered_rotations(), n));

        let cfg = GaConfig { seed, population_size: 16, max_generations: 30, ..GaConfig::default() };
        let (ga, report) = ga_optimize(&seq, &cfg).unwrap();
        prop_assert!(ga.depth() <= seq.depth());
        prop_assert!(same_unitary(&rotations, &ga.ordered_rotations(), n));
        for (m, g) in report.merges_per_round.iter().zip(&report.greedy_merges_per_round) {
            prop_assert!(m >= g);
        }

        let asap = build_layers(n, rotations.clone()).unwrap();
        prop_assert!(asap.depth() <= seq.depth());
        prop_assert!(same_unitary(&rotations, &asap.ordered_rotations(), n));
        let ms = greedy_matching(&seq, 0.5);
        let once = apply_merges(&seq, &ms).unwrap();
        prop_assert_eq!(once.depth(), seq.depth() - ms.len());
    }
}

#[test]
fn ga_is_independent_of_thread_count() {
    let rotations = random_pi8_rotations(&mut ChaCha8Rng::seed_from_u64(11), 6, 60);
    let seq = Layering::sequential(6, rotations).unwrap();
    let cfg = GaConfig { seed: 5, ..GaConfig::default() };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| ga_optimize(&seq, &cfg).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(2));
    assert_eq!(one, run(8));
}

#[test]
fn layering_json_round_trip() {
    let rotations = random_pi8_rotations(&mut ChaCha8Rng::seed_from_u64(3), 3, 25);
    let l = build_layers(3, rotations).unwrap();
    let back: Layering = serde_json::from_str(&serde_json::to_string(&l).unwrap()).unwrap();
    assert_eq!(back.depth(), l.depth());
    assert_eq!(back.ordered_rotations(), l.ordered_rotations());
}

#[test]
fn parse_render_round_trip() {
    let gc = circuit(9, 4, 50);
    assert_eq!(parse_circuit(&render_circuit(&gc)).unwrap(), gc);
}
