//! EMD solver against vertex enumeration of the transportation polytope.

use std::collections::BTreeMap;
use std::time::Instant;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subsens::distributions::OutputDistribution;
use subsens::transport::{check_plan, emd, sym_diff_cost};
use subsens::SubsetMask;

/// Minimum cost over all basic feasible solutions: every choice of
/// `m + n - 1` cells forming a spanning tree, solved by leaf elimination.
fn brute_force(a: &[(SubsetMask, f64)], b: &[(SubsetMask, f64)]) -> f64 {
    let (m, n) = (a.len(), b.len());
    let cells = m * n;
    let need = m + n - 1;
    let mut best = f64::INFINITY;
    for code in 0u32..(1 << cells) {
        if code.count_ones() as usize != need {
            continue;
        }
        let basis: Vec<usize> = (0..cells).filter(|c| code >> c & 1 == 1).collect();
        let mut row: Vec<f64> = a.iter().map(|x| x.1).collect();
        let mut col: Vec<f64> = b.iter().map(|x| x.1).collect();
        let mut left = basis.clone();
        let mut flow = vec![0.0; cells];
        let mut ok = true;
        while !left.is_empty() {
            // a row or column touched by exactly one remaining cell is a leaf
            let mut progressed = false;
            for node in 0..m + n {
                let touching: Vec<usize> = left
                    .iter()
                    .copied()
                    .filter(|&c| if node < m { c / n == node } else { c % n == node - m })
                    .collect();
                if touching.len() == 1 {
                    let c = touching[0];
                    let (i, j) = (c / n, c % n);
                    let x = if node < m { row[i] } else { col[j] };
                    flow[c] = x;
                    row[i] -= x;
                    col[j] -= x;
                    left.retain(|&d| d != c);
                    progressed = true;
                    break;
                }
            }
            if !progressed {
                ok = false;
                break;
            }
        }
        if !ok || row.iter().chain(&col).any(|r| r.abs() > 1e-12) || flow.iter().any(|&f| f < -1e-12) {
            continue;
        }
        let cost: f64 = (0..cells)
            .map(|c| flow[c] * sym_diff_cost(&a[c / n].0, &b[c % n].0) as f64)
            .sum();
        best = best.min(cost);
    }
    best
}

fn arb_side(universe: usize) -> impl Strategy<Value = Vec<(SubsetMask, u32)>> {
    proptest::collection::btree_map(0u64..(1 << universe), 1u32..10, 1..=4)
        .prop_map(|m| m.into_iter().map(|(bits, w)| (SubsetMask::from_u64(bits), w)).collect())
}

fn normalize(side: &[(SubsetMask, u32)]) -> Vec<(SubsetMask, f64)> {
    let total: u32 = side.iter().map(|x| x.1).sum();
    side.iter().map(|(s, w)| (s.clone(), *w as f64 / total as f64)).collect()
}

fn to_dist(side: &[(SubsetMask, f64)]) -> OutputDistribution {
    OutputDistribution::from_probs(side.iter().cloned().collect())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, failure_persistence: None, ..ProptestConfig::default() })]
    #[test]
    fn matches_vertex_enumeration(a in arb_side(6), b in arb_side(6)) {
        let (a, b) = (normalize(&a), normalize(&b));
        let (da, db) = (to_dist(&a), to_dist(&b));
        let (v, plan) = emd(&da, &db).unwrap();
        prop_assert!((v - brute_force(&a, &b)).abs() < 1e-9, "solver {} brute {}", v, brute_force(&a, &b));
        prop_assert!(check_plan(&da, &db, &plan).ok(1e-9));
    }
}

fn random_side(rng: &mut ChaCha8Rng, n: usize, k: usize, support: usize) -> OutputDistribution {
    let mut counts = BTreeMap::new();
    while counts.len() < support {
        let mut s = SubsetMask::empty();
        while s.len() < k {
            s.insert(rng.gen_range(0..n));
        }
        *counts.entry(s).or_insert(0u64) += rng.gen_range(1..5);
    }
    OutputDistribution::from_counts(counts)
}

#[test]
fn moderate_supports_certify() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for &(n, k, support) in &[(30usize, 4usize, 200usize), (100, 5, 600), (200, 3, 1500)] {
        let a = random_side(&mut rng, n, k, support);
        let b = random_side(&mut rng, n, k, support);
        let start = Instant::now();
        let (v, plan) = emd(&a, &b).unwrap();
        let took = start.elapsed();
        let check = check_plan(&a, &b, &plan);
        assert!(check.ok(1e-9), "{check:?}");
        let (num, den) = plan.exact_cost.unwrap();
        assert!((num as f64 / den as f64 - v).abs() < 1e-12);
        assert!(v <= 2.0 * k as f64);
        eprintln!("support {support}: emd {v:.6} in {took:?}, {} pivots", plan.pivots);
    }
}
