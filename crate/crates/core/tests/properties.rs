use grac::bloch::{BlochVector, Mat3};
use grac::channels::BlochMap;
use grac::classical::classical_optimum;
use grac::eacc::linalg::{identity, max_abs_diff};
use grac::eacc::{random_strategy, OPERATOR_TOL};
use grac::mubs::{classify_quadruple, full_mubs, subsets, FunctionSet, ParityLabel};
use grac::quantum::{evaluate_pm, norm_cancellation_check, PMStrategy};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn all_sets() -> Vec<FunctionSet> {
    (1..=7).flat_map(|k| subsets(3, k).unwrap()).collect()
}

fn arb_set() -> impl Strategy<Value = FunctionSet> {
    let sets = all_sets();
    (0..sets.len()).prop_map(move |i| sets[i].clone())
}

fn arb_quadruple() -> impl Strategy<Value = FunctionSet> {
    let sets: Vec<FunctionSet> = subsets(3, 4).unwrap().collect();
    (0..sets.len()).prop_map(move |i| sets[i].clone())
}

fn arb_vector(max_norm: f64) -> impl Strategy<Value = BlochVector> {
    (any::<u64>(), 0.0..=max_norm)
        .prop_map(|(seed, s)| BlochVector::random_unit(&mut ChaCha8Rng::seed_from_u64(seed)) * s)
}

fn arb_unit() -> impl Strategy<Value = BlochVector> {
    any::<u64>().prop_map(|seed| BlochVector::random_unit(&mut ChaCha8Rng::seed_from_u64(seed)))
}

/// Applies a permutation of bit positions to every label of the set.
fn permute_bits(set: &FunctionSet, perm: &[usize; 3]) -> FunctionSet {
    let labels = set.iter().map(|l| {
        let bits = l.bits();
        let r = (0..3).fold(0u32, |acc, i| acc | (((bits >> i) & 1) << perm[i]));
        ParityLabel::new(3, r).unwrap()
    });
    FunctionSet::new(3, labels).unwrap()
}

fn arb_perm() -> impl Strategy<Value = [usize; 3]> {
    Just(vec![0usize, 1, 2])
        .prop_shuffle()
        .prop_map(|v| [v[0], v[1], v[2]])
}

fn random_pm(seed: u64, set: &FunctionSet) -> PMStrategy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let preparations = (0..8).map(|_| BlochVector::random_unit(&mut rng)).collect();
    let measurements = set
        .iter()
        .map(|l| (*l, BlochVector::random_unit(&mut rng)))
        .collect();
    PMStrategy::new(3, preparations, measurements).unwrap()
}

fn close(a: &BlochVector, b: &BlochVector, tol: f64) -> bool {
    a.distance(b) <= tol
}

proptest! {
    #[test]
    fn quadruple_class_is_invariant_under_bit_relabeling(set in arb_quadruple(), perm in arb_perm()) {
        let moved = permute_bits(&set, &perm);
        prop_assert_eq!(classify_quadruple(&set).unwrap(), classify_quadruple(&moved).unwrap());
    }

    #[test]
    fn classical_optimum_is_invariant_under_bit_relabeling(set in arb_set(), perm in arb_perm()) {
        let moved = permute_bits(&set, &perm);
        let a = classical_optimum(&set, 1).unwrap();
        let b = classical_optimum(&moved, 1).unwrap();
        prop_assert_eq!(a.value, b.value);
        prop_assert_eq!(a.optimal_encodings, b.optimal_encodings);
    }

    #[test]
    fn pm_value_is_rotation_invariant(set in arb_set(), seed in any::<u64>(), rot_seed in any::<u64>()) {
        let strat = random_pm(seed, &set);
        let rot = Mat3::random_rotation(&mut ChaCha8Rng::seed_from_u64(rot_seed));
        let rotated = strat.map_vectors(|v| rot.apply(v));
        let a = evaluate_pm(&strat, &set).unwrap();
        let b = evaluate_pm(&rotated, &set).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn pm_value_lies_in_unit_interval(set in arb_set(), seed in any::<u64>()) {
        let v = evaluate_pm(&random_pm(seed, &set), &set).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn norm_cancellation_holds(set in arb_set(), seed in any::<u64>()) {
        let strat = random_pm(seed, &set);
        let got = norm_cancellation_check(&set, strat.measurements()).unwrap();
        prop_assert!((got - (8 * set.len()) as f64).abs() < 1e-9);
    }

    #[test]
    fn depolarizing_is_linear_and_contractive(
        lambda in 0.0..=1.0f64,
        a in arb_vector(1.0),
        b in arb_vector(1.0),
        s in -2.0..2.0f64,
    ) {
        let map = BlochMap::depolarizing(lambda).unwrap();
        let lhs = map.apply(&(a + b * s));
        let rhs = map.apply(&a) + map.apply(&b) * s;
        prop_assert!(close(&lhs, &rhs, 1e-12));
        prop_assert!(map.apply(&a).norm() <= a.norm() + 1e-15);
    }

    #[test]
    fn dephasing_is_linear_and_contractive(
        lambda in 0.0..=0.5f64,
        axis in arb_unit(),
        a in arb_vector(1.0),
        b in arb_vector(1.0),
        s in -2.0..2.0f64,
    ) {
        let map = BlochMap::dephasing(lambda, axis).unwrap();
        let lhs = map.apply(&(a + b * s));
        let rhs = map.apply(&a) + map.apply(&b) * s;
        prop_assert!(close(&lhs, &rhs, 1e-12));
        prop_assert!(map.apply(&a).norm() <= a.norm() + 1e-12);
    }

    #[test]
    fn dephasing_fixes_the_axis_component(lambda in 0.0..=0.5f64, axis in arb_unit(), r in arb_vector(1.0)) {
        let map = BlochMap::dephasing(lambda, axis).unwrap();
        prop_assert!((map.apply(&r).dot(&axis) - r.dot(&axis)).abs() < 1e-12);
        prop_assert!(close(&map.apply(&axis), &axis, 1e-12));
    }

    #[test]
    fn random_eacc_strategies_are_complete(seed in any::<u64>(), da in 2usize..=3, db in 2usize..=3) {
        let set = full_mubs(3).unwrap();
        let strat = random_strategy(&mut ChaCha8Rng::seed_from_u64(seed), &set, da, db);
        prop_assert!(strat.validate(&set).is_ok());
        for x in 0..8 {
            let [e0, e1] = strat.alice(x);
            prop_assert!(max_abs_diff(&(e0 + e1), &identity(da)) < OPERATOR_TOL);
        }
    }
}
