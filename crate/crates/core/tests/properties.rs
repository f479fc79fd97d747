use proptest::prelude::*;

use cmspress::diff::{pressure_curve, random_mixing_sft, uniform_grid};
use cmspress::metric::{shift_distance, ShiftMetric, VertexMetric};
use cmspress::potential::Potential;
use cmspress::pressure::sft_pressure;
use cmspress::shift::{encode_integer, truncate, LoopCounts, ShiftSpec, VertexId, Word};

fn families() -> Vec<VertexMetric> {
    vec![
        VertexMetric::Zargaryan,
        VertexMetric::Discrete,
        VertexMetric::TreeBackward,
        VertexMetric::DoubleRenewal,
        VertexMetric::BirthDeathParity,
        VertexMetric::ZigZag2,
        VertexMetric::ZigZag3,
        VertexMetric::Circle {
            counts: LoopCounts::Constant { value: 2 },
            radii: None,
        },
    ]
}

fn v(i: u64) -> VertexId {
    VertexId::from_index(i)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn metric_axioms(f in 0usize..8, a in 1u64..5000, b in 1u64..5000, c in 1u64..5000) {
        let vm = &families()[f];
        let (a, b, c) = (v(a), v(b), v(c));
        let ab = vm.rho(a, b).unwrap();
        prop_assert_eq!(vm.rho(a, a).unwrap(), 0.0);
        prop_assert_eq!(ab, vm.rho(b, a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!(a == b || ab > 0.0);
        prop_assert!(vm.rho(a, c).unwrap() <= ab + vm.rho(b, c).unwrap() + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn tail_bound_is_sound(
        x in prop::collection::vec(1u64..200, 30),
        y in prop::collection::vec(1u64..200, 30),
        n in 1usize..30,
        theta in 0.05f64..0.95,
    ) {
        let sm = ShiftMetric::new(VertexMetric::Zargaryan, theta).unwrap();
        let (x, y) = (Word::from_indices(&x), Word::from_indices(&y));
        let (part, tail) = shift_distance(&sm, &x, &y, n).unwrap();
        let (full, _) = shift_distance(&sm, &x, &y, 30).unwrap();
        prop_assert!(part <= full + 1e-15);
        prop_assert!(full <= part + tail + 1e-15);
    }

    #[test]
    fn shift_metric_symmetry(z in prop::collection::vec(-100i64..100, 12), w in prop::collection::vec(-100i64..100, 12)) {
        let sm = ShiftMetric::new(VertexMetric::DoubleRenewal, 0.5).unwrap();
        let enc = |s: &[i64]| Word::from_indices(&s.iter().map(|&z| encode_integer(z)).collect::<Vec<_>>());
        let (x, y) = (enc(&z), enc(&w));
        prop_assert_eq!(shift_distance(&sm, &x, &y, 12).unwrap(), shift_distance(&sm, &y, &x, 12).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pressure_is_convex_in_t(seed in 0u64..1000, values in prop::collection::vec(-2.0f64..2.0, 4)) {
        let t = random_mixing_sft(4, seed).unwrap();
        let table: Vec<(u64, f64)> = values.iter().enumerate().map(|(i, &x)| (i as u64 + 1, x)).collect();
        let psi = Potential::depth_one(&table, 0.0).unwrap();
        let grid = uniform_grid(-1.0, 1.0, 0.125).unwrap();
        let c = pressure_curve(&t, &Potential::zero(), &psi, &grid).unwrap();
        prop_assert!(c.second_differences().iter().flatten().all(|&d| d >= -1e-9));
    }

    #[test]
    fn pressure_bounded_by_entropy_plus_sup(seed in 0u64..1000, c in -3.0f64..3.0) {
        let t = random_mixing_sft(3, seed).unwrap();
        let h = sft_pressure(&t, &Potential::zero()).unwrap().value;
        let shifted = sft_pressure(&t, &Potential::constant(c)).unwrap().value;
        prop_assert!((shifted - h - c).abs() < 1e-10);
        prop_assert!(h <= (3f64).ln() + 1e-12 && h >= 0.0);
    }

    #[test]
    fn truncations_increase(n in 2u64..60) {
        let spec = ShiftSpec::Generator(cmspress::shift::Generator::Renewal);
        let a = sft_pressure(&truncate(&spec, n), &Potential::zero()).unwrap().value;
        let b = sft_pressure(&truncate(&spec, n + 1), &Potential::zero()).unwrap().value;
        prop_assert!(b >= a - 1e-12);
    }
}
