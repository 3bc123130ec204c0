//! Property checks across modules on small random instances.

use proptest::prelude::*;
use subsens::algorithms::Rule;
use subsens::distributions::{exact_output_distribution, sampled_output_distribution, Algorithm, OutputDistribution};
use subsens::oracle::{build_function, check_monotone_submodular, CheckMode, FunctionSpec, ValueOracle};
use subsens::sensitivity::{sensitivity_report, SensitivityOptions};
use subsens::transport::tv_distance;
use subsens::SubsetMask;

fn coverage(n: usize, seed: u64, modular_scale: f64) -> ValueOracle {
    build_function(&FunctionSpec::Coverage {
        n,
        universe: 10,
        density: 0.3,
        modular_scale,
        seed,
    })
    .unwrap()
}

fn rules() -> impl Strategy<Value = Rule> {
    prop_oneof![Just(Rule::Greedy), Just(Rule::RandomizedGreedy), Just(Rule::Proportional)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn coverage_marginals_match_value_differences(seed in 0u64..1000, bits in 0u64..256, e in 0usize..8) {
        let f = coverage(8, seed, 0.4);
        let s = SubsetMask::from_u64(bits).without(e);
        let direct = f.value(&s.with(e)) - f.value(&s);
        prop_assert!((f.marginal(&s, e).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn coverage_is_monotone_submodular(seed in 0u64..1000) {
        let r = check_monotone_submodular(&coverage(8, seed, 0.5), CheckMode::Exhaustive).unwrap();
        prop_assert!(r.ok());
    }

    #[test]
    fn exact_distribution_is_a_distribution_over_k_sets(seed in 0u64..1000, k in 1usize..4, rule in rules()) {
        let f = coverage(7, seed, 0.2);
        let d = exact_output_distribution(&Algorithm::Sequential(rule), &f, k).unwrap();
        prop_assert!((d.total_mass() - 1.0).abs() < 1e-12);
        for (s, p) in d.iter() {
            prop_assert_eq!(s.len(), k);
            prop_assert!(p > 0.0);
        }
        let inclusions: f64 = (0..7).map(|e| d.inclusion(e)).sum();
        prop_assert!((inclusions - k as f64).abs() < 1e-9);
    }

    #[test]
    fn sensitivity_orderings(seed in 0u64..1000, k in 1usize..4, rule in rules()) {
        let f = coverage(6, seed, 0.3);
        let r = sensitivity_report(&Algorithm::Sequential(rule), &f, k, &SensitivityOptions::exact()).unwrap();
        prop_assert!(r.worst_case + 1e-12 >= r.average);
        prop_assert!(r.worst_case <= 2.0 * k as f64 + 1e-9);
        for x in &r.per_element {
            prop_assert!(x.lower_bound <= x.emd + 1e-9);
        }
    }

    #[test]
    fn restrictions_commute(seed in 0u64..1000, a in 0usize..7, b in 0usize..7) {
        prop_assume!(a != b);
        let f = coverage(7, seed, 0.3);
        let ab = f.restrict(a).unwrap().restrict(b).unwrap();
        let ba = f.restrict(b).unwrap().restrict(a).unwrap();
        prop_assert_eq!(ab.id_map(), ba.id_map());
        for bits in 0u64..128 {
            let s = SubsetMask::from_u64(bits).without(a).without(b);
            prop_assert_eq!(ab.value(&s), ba.value(&s));
        }
    }

    #[test]
    fn distribution_csv_round_trips_bit_exactly(weights in proptest::collection::btree_map(0u64..4096, 1u32..1000, 1..20)) {
        let total: u32 = weights.values().sum();
        let d = OutputDistribution::from_probs(
            weights.iter().map(|(&b, &w)| (SubsetMask::from_u64(b), w as f64 / total as f64)).collect(),
        );
        let back = OutputDistribution::from_csv(&d.to_csv()).unwrap();
        prop_assert_eq!(back.probs, d.probs);
    }
}

#[test]
fn sampled_distribution_approaches_exact() {
    let f = coverage(6, 11, 0.3);
    let alg = Algorithm::Sequential(Rule::Proportional);
    let exact = exact_output_distribution(&alg, &f, 2).unwrap();
    let sampled = sampled_output_distribution(&alg, &f, 2, 40_000, 5).unwrap();
    // 15 outcomes at 40k runs: TV noise is well under 0.03
    assert!(tv_distance(&exact, &sampled) < 0.03);
}
