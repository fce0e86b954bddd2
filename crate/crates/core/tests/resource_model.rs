//! Closed-form estimates against scans and algebraic identities.

use ftflow_core::resources::{
    correctable_weight, distillation_volume, distilled_error, logical_error_rate, min_distance_for, physical_qubits,
    recommend_protocol, CodeParams, RegimeThresholds, Variant, WorkloadProfile,
};
use proptest::prelude::*;

fn odd_distance() -> impl Strategy<Value = u32> {
    (1u32..200).prop_map(|k| 2 * k + 1)
}

proptest! {
    #[test]
    fn reuse_halves_ancillas(d in odd_distance()) {
        let std = physical_qubits(&CodeParams::new(d, Variant::Standard).unwrap());
        let reuse = physical_qubits(&CodeParams::new(d, Variant::AncillaReuse).unwrap());
        let d2 = u64::from(d * d);
        prop_assert!(reuse < std);
        prop_assert_eq!(std - d2, 2 * (reuse - d2));
    }

    #[test]
    fn crossover_four_distances_up(k in 13u32..500) {
        let d = 2 * k + 1;
        let reuse = physical_qubits(&CodeParams::new(d + 4, Variant::AncillaReuse).unwrap());
        let std = physical_qubits(&CodeParams::new(d, Variant::Standard).unwrap());
        prop_assert!(reuse <= std);
    }

    #[test]
    fn logical_rate_monotone(d in 1u32..40, p in 1e-6f64..0.0099) {
        let d = 2 * d + 1;
        prop_assert!(logical_error_rate(d + 2, p).unwrap() < logical_error_rate(d, p).unwrap());
        prop_assert!(logical_error_rate(d, p).unwrap() < logical_error_rate(d, p * 1.01).unwrap());
    }

    #[test]
    fn min_distance_matches_scan(target in 1e-15f64..0.02, p in 1e-5f64..0.005) {
        let d = min_distance_for(target, p).unwrap();
        // Direct scan over odd distances using the closed form.
        let scan = (1..).map(|k| 2 * k + 1).find(|&d: &u32| 0.03 * (p / 0.01).powf(f64::from(d + 1) / 2.0) <= target).unwrap();
        prop_assert!(d == scan || (d + 2 == scan && (logical_error_rate(d, p).unwrap() / target - 1.0).abs() < 1e-12));
    }

    #[test]
    fn recommendation_is_total(t_depth in 1u64..1_000_000, ratio in 1u64..10_000, p in 1e-6f64..1e-2, target in 1e-20f64..0.5) {
        let w = WorkloadProfile { t_count: t_depth * ratio, t_depth, p_phys: p, target_logical_error: target };
        let a = recommend_protocol(&w, &RegimeThresholds::default()).unwrap();
        prop_assert_eq!(&a, &recommend_protocol(&w, &RegimeThresholds::default()).unwrap());
        prop_assert!(["15-to-1", "20-to-4", "15-to-1x2"].contains(&a.protocol.as_str()));
    }
}

#[test]
fn volumes_are_area_times_cycles() {
    for d in [1, 3, 5, 27] {
        let v = distillation_volume("15-to-1", d).unwrap();
        assert_eq!(v.volume, 660 * u64::from(d).pow(3));
        assert_eq!((v.area_tiles, v.cycles), (55, 12 * u64::from(d)));
        assert_eq!(distillation_volume("20-to-4", d).unwrap().volume, 56 * u64::from(d).pow(3));
    }
}

#[test]
fn two_level_error_composes() {
    let p = 1e-4;
    let one = distilled_error("15-to-1", p).unwrap();
    let two = distilled_error("15-to-1x2", p).unwrap();
    assert_eq!(two, distilled_error("15-to-1", one).unwrap());
    assert!((two / 1.5e-30 - 1.0).abs() < 0.01);
    assert_eq!([1, 3, 5].map(correctable_weight), [0, 1, 2]);
}
