//! Output distributions of the algorithms, exact or sampled, and per-step
//! selection probabilities.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::algorithms::{check_k, rule_distribution, run_sequential_trial, DecisionRule, Rule, StepContext};
use crate::distsim::{barbosa_framework_trial, greedi_trial, greedi_with_assignment, MpcConfig};
use crate::error::{Error, Result};
use crate::mask::SubsetMask;
use crate::oracle::ValueOracle;

/// An algorithm whose output distribution can be measured.
#[derive(Clone, Debug, PartialEq)]
pub enum Algorithm {
    Sequential(Rule),
    Greedi { machines: usize },
    Framework { cfg: MpcConfig, base: Rule },
}

impl Algorithm {
    pub fn name(&self) -> String {
        match self {
            Algorithm::Sequential(r) => r.name(),
            Algorithm::Greedi { machines } => format!("greedi(m={machines})"),
            Algorithm::Framework { cfg, base } => format!(
                "framework(g={},m={},R={},base={})",
                cfg.groups,
                cfg.machines,
                cfg.rounds,
                base.name()
            ),
        }
    }

    /// Output of run number `trial` under `seed`.
    pub fn run_trial(&self, oracle: &ValueOracle, k: usize, seed: u64, trial: u64) -> Result<SubsetMask> {
        Ok(match self {
            Algorithm::Sequential(rule) => run_sequential_trial(oracle, k, rule, seed, trial)?.0,
            Algorithm::Greedi { machines } => greedi_trial(oracle, k, *machines, seed, trial)?.0,
            Algorithm::Framework { cfg, base } => barbosa_framework_trial(oracle, k, cfg, base, seed, trial)?.0,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistMode {
    Exact,
    Empirical { trials: u64 },
}

/// A probability distribution over output sets.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputDistribution {
    pub probs: BTreeMap<SubsetMask, f64>,
    pub mode: DistMode,
    /// Run counts per set, empirical mode only.
    pub counts: BTreeMap<SubsetMask, u64>,
    /// Mass dropped by probability pruning (exact mode).
    pub pruned_mass: f64,
}

impl OutputDistribution {
    pub fn point(s: SubsetMask) -> Self {
        OutputDistribution {
            probs: BTreeMap::from([(s, 1.0)]),
            mode: DistMode::Exact,
            counts: BTreeMap::new(),
            pruned_mass: 0.0,
        }
    }

    pub fn from_probs(probs: BTreeMap<SubsetMask, f64>) -> Self {
        OutputDistribution {
            probs,
            mode: DistMode::Exact,
            counts: BTreeMap::new(),
            pruned_mass: 0.0,
        }
    }

    pub fn from_counts(counts: BTreeMap<SubsetMask, u64>) -> Self {
        let trials: u64 = counts.values().sum();
        OutputDistribution {
            probs: counts.iter().map(|(s, c)| (s.clone(), *c as f64 / trials as f64)).collect(),
            mode: DistMode::Empirical { trials },
            counts,
            pruned_mass: 0.0,
        }
    }

    pub fn prob(&self, s: &SubsetMask) -> f64 {
        self.probs.get(s).copied().unwrap_or(0.0)
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SubsetMask, f64)> {
        self.probs.iter().map(|(s, p)| (s, *p))
    }

    /// `Pr[e ∈ S]`.
    pub fn inclusion(&self, e: usize) -> f64 {
        self.iter().filter(|(s, _)| s.contains(e)).map(|(_, p)| p).sum()
    }

    /// `E|S ∩ block|`.
    pub fn expected_overlap(&self, block: &SubsetMask) -> f64 {
        self.iter().map(|(s, p)| p * s.intersection_len(block) as f64).sum()
    }

    /// Distribution of `|S ∩ block|`, indexed by the count.
    pub fn overlap_histogram(&self, block: &SubsetMask) -> Vec<f64> {
        let mut h = Vec::new();
        for (s, p) in self.iter() {
            let c = s.intersection_len(block);
            if h.len() <= c {
                h.resize(c + 1, 0.0);
            }
            h[c] += p;
        }
        h
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("set_bitmask_hex,probability\n");
        for (s, p) in self.iter() {
            let _ = writeln!(out, "{},{}", s.to_hex(), p);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut probs = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with("set_bitmask_hex")) {
                continue;
            }
            let (h, p) = line
                .split_once(',')
                .ok_or_else(|| Error::Format(format!("line {}: expected `hex,probability`", i + 1)))?;
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad probability `{p}`", i + 1)))?;
            if !(p >= 0.0) {
                return Err(Error::Format(format!("line {}: negative probability", i + 1)));
            }
            *probs.entry(SubsetMask::from_hex(h)?).or_insert(0.0) += p;
        }
        Ok(Self::from_probs(probs))
    }
}

/// Per-step selection probabilities.
///
/// `p[i][e]` is the probability that step `i` (0-based) picks `e`; `cum[i][e]`
/// the probability that `e` has been picked by the end of step `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionProfile {
    pub p: Vec<Vec<f64>>,
    pub cum: Vec<Vec<f64>>,
}

impl SelectionProfile {
    fn new(k: usize, universe: usize) -> Self {
        SelectionProfile {
            p: vec![vec![0.0; universe]; k],
            cum: vec![vec![0.0; universe]; k],
        }
    }

    fn accumulate(&mut self) {
        for i in 0..self.p.len() {
            for e in 0..self.p[i].len() {
                let prev = if i == 0 { 0.0 } else { self.cum[i - 1][e] };
                self.cum[i][e] = prev + self.p[i][e];
            }
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,element,p,P\n");
        for (i, row) in self.p.iter().enumerate() {
            for (e, &q) in row.iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{}", i + 1, e, q, self.cum[i][e]);
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactOptions {
    /// Maximum number of expanded branches.
    pub node_budget: u64,
    /// Branches with path probability below this are dropped.
    pub p_min: f64,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            node_budget: 10_000_000,
            p_min: 0.0,
        }
    }
}

/// Level-by-level forward recursion over unordered sets.
///
/// All states at level `i` have `|S| = i`, so keying on the set alone also
/// keys on the step. States are expanded in mask order and their branches
/// merged in that same order, so the result does not depend on threading.
fn sequential_dp(
    rule: &dyn DecisionRule,
    oracle: &ValueOracle,
    k: usize,
    opts: ExactOptions,
    profile: bool,
) -> Result<(OutputDistribution, Option<SelectionProfile>)> {
    check_k(oracle, k)?;
    let mut level: BTreeMap<SubsetMask, f64> = BTreeMap::from([(SubsetMask::empty(), 1.0)]);
    let mut prof = profile.then(|| SelectionProfile::new(k, oracle.universe()));
    let mut nodes: u64 = 0;
    let mut pruned = 0.0;
    for step in 0..k {
        let states: Vec<(&SubsetMask, f64)> = level.iter().map(|(s, q)| (s, *q)).collect();
        let branches: Vec<Vec<(usize, f64)>> = states
            .par_iter()
            .map(|(s, _)| {
                rule_distribution(rule, oracle, s, StepContext { step, k })
                    .map(|d| d.into_iter().filter(|x| x.2 > 0.0).map(|x| (x.0, x.2)).collect())
            })
            .collect::<Result<_>>()?;
        nodes += branches.iter().map(|b| b.len() as u64).sum::<u64>();
        if nodes > opts.node_budget {
            return Err(Error::NodeBudgetExceeded(opts.node_budget));
        }
        let mut next = BTreeMap::new();
        for ((s, q), br) in states.iter().zip(&branches) {
            for &(e, pe) in br {
                let mass = q * pe;
                if let Some(pr) = prof.as_mut() {
                    pr.p[step][e] += mass;
                }
                if mass < opts.p_min {
                    pruned += mass;
                    continue;
                }
                *next.entry(s.with(e)).or_insert(0.0) += mass;
            }
        }
        level = next;
    }
    if let Some(pr) = prof.as_mut() {
        pr.accumulate();
    }
    let mut d = OutputDistribution::from_probs(level);
    d.pruned_mass = pruned;
    Ok((d, prof))
}

pub fn exact_output_distribution(alg: &Algorithm, oracle: &ValueOracle, k: usize) -> Result<OutputDistribution> {
    exact_output_distribution_with(alg, oracle, k, ExactOptions::default())
}

/// Exact distribution. GreeDi enumerates all `m^n` assignments; the framework
/// is only enumerable with a single machine in a single round.
pub fn exact_output_distribution_with(
    alg: &Algorithm,
    oracle: &ValueOracle,
    k: usize,
    opts: ExactOptions,
) -> Result<OutputDistribution> {
    match alg {
        Algorithm::Sequential(rule) => Ok(sequential_dp(rule, oracle, k, opts, false)?.0),
        Algorithm::Greedi { machines } => {
            check_k(oracle, k)?;
            let m = *machines as u64;
            let ids = oracle.id_map();
            let total = (m as f64).powi(ids.len() as i32);
            if m == 0 || total > opts.node_budget as f64 {
                return Err(Error::NodeBudgetExceeded(opts.node_budget));
            }
            let total = total as u64;
            let w = 1.0 / total as f64;
            let outcomes: Vec<SubsetMask> = (0..total)
                .into_par_iter()
                .map(|mut code| {
                    let mut a = vec![usize::MAX; oracle.universe()];
                    for &e in &ids {
                        a[e] = (code % m) as usize;
                        code /= m;
                    }
                    greedi_with_assignment(oracle, k, m as usize, &a).map(|r| r.0)
                })
                .collect::<Result<_>>()?;
            let mut counts: BTreeMap<SubsetMask, u64> = BTreeMap::new();
            for s in outcomes {
                *counts.entry(s).or_insert(0) += 1;
            }
            Ok(OutputDistribution::from_probs(
                counts.into_iter().map(|(s, c)| (s, c as f64 * w)).collect(),
            ))
        }
        Algorithm::Framework { cfg, base } => {
            if cfg.groups * cfg.machines * cfg.rounds == 1 {
                exact_output_distribution_with(&Algorithm::Sequential(base.clone()), oracle, k, opts)
            } else {
                Err(Error::NodeBudgetExceeded(opts.node_budget))
            }
        }
    }
}

/// Empirical distribution of `trials` seeded runs.
pub fn sampled_output_distribution(
    alg: &Algorithm,
    oracle: &ValueOracle,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<OutputDistribution> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let outcomes: Vec<SubsetMask> = (0..trials)
        .into_par_iter()
        .map(|t| alg.run_trial(oracle, k, seed, t))
        .collect::<Result<_>>()?;
    let mut counts: BTreeMap<SubsetMask, u64> = BTreeMap::new();
    for s in outcomes {
        *counts.entry(s).or_insert(0) += 1;
    }
    Ok(OutputDistribution::from_counts(counts))
}

pub fn selection_profile(rule: &dyn DecisionRule, oracle: &ValueOracle, k: usize) -> Result<SelectionProfile> {
    selection_profile_with(rule, oracle, k, ExactOptions::default())
}

pub fn selection_profile_with(
    rule: &dyn DecisionRule,
    oracle: &ValueOracle,
    k: usize,
    opts: ExactOptions,
) -> Result<SelectionProfile> {
    Ok(sequential_dp(rule, oracle, k, opts, true)?.1.expect("profile requested"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{deterministic_greedy, OrdinalSchedule};
    use crate::oracle::{build_function, FunctionSpec};
    use crate::transport::tv_distance;

    fn seq(r: Rule) -> Algorithm {
        Algorithm::Sequential(r)
    }

    #[test]
    fn deterministic_greedy_is_a_point_mass() {
        let f = ValueOracle::modular(vec![3.0, 1.0, 2.0, 5.0]);
        let d = exact_output_distribution(&seq(Rule::Greedy), &f, 2).unwrap();
        assert_eq!(d, OutputDistribution::point(deterministic_greedy(&f, 2).unwrap().0));
        let e = sampled_output_distribution(&seq(Rule::Greedy), &f, 2, 50, 1).unwrap();
        assert_eq!(e.probs, d.probs);
        assert_eq!(e.mode, DistMode::Empirical { trials: 50 });
    }

    #[test]
    fn forced_exhaustion() {
        let f = ValueOracle::modular(vec![3.0, 1.0, 2.0]);
        let d = exact_output_distribution(&seq(Rule::RandomizedGreedy), &f, 3).unwrap();
        assert_eq!(d, OutputDistribution::point(SubsetMask::full(3)));
    }

    #[test]
    fn randomized_greedy_modular_probabilities() {
        // top-3 of 6 distinct weights: step one is uniform on {0,1,2}
        let f = ValueOracle::modular(vec![6.0, 5.0, 4.0, 3.0, 2.0, 1.0]);
        let pr = selection_profile(&Rule::RandomizedGreedy, &f, 3).unwrap();
        assert!((pr.p[0][0] - 1.0 / 3.0).abs() < 1e-15);
        for row in &pr.p {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let d = exact_output_distribution(&seq(Rule::RandomizedGreedy), &f, 3).unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
        for e in 0..6 {
            assert!((d.inclusion(e) - pr.cum[2][e]).abs() < 1e-12);
        }
        // by hand: any first pick, then 2/3 to stay in the block, then 1/3
        assert!((d.prob(&SubsetMask::from_elements([0, 1, 2])) - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn greedy_profile_is_zero_one() {
        let f = build_function(&FunctionSpec::Coverage {
            n: 10,
            universe: 25,
            density: 0.2,
            modular_scale: 0.1,
            seed: 1,
        })
        .unwrap();
        let pr = selection_profile(&Rule::Greedy, &f, 4).unwrap();
        assert!(pr.cum.iter().flatten().all(|&x| x == 0.0 || x == 1.0));
    }

    #[test]
    fn budget_and_pruning() {
        let f = ValueOracle::modular((1..=12).map(|x| x as f64).collect());
        let opts = ExactOptions {
            node_budget: 100,
            p_min: 0.0,
        };
        assert_eq!(
            exact_output_distribution_with(&seq(Rule::Proportional), &f, 4, opts).unwrap_err(),
            Error::NodeBudgetExceeded(100)
        );
        let opts = ExactOptions {
            node_budget: 10_000_000,
            p_min: 1e-3,
        };
        let d = exact_output_distribution_with(&seq(Rule::Proportional), &f, 3, opts).unwrap();
        assert!(d.pruned_mass > 0.0);
        assert!((d.total_mass() + d.pruned_mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_matches_exact() {
        let f = build_function(&FunctionSpec::Coverage {
            n: 10,
            universe: 25,
            density: 0.2,
            modular_scale: 0.1,
            seed: 5,
        })
        .unwrap();
        let alg = seq(Rule::RandomizedGreedy);
        let exact = exact_output_distribution(&alg, &f, 3).unwrap();
        let emp = sampled_output_distribution(&alg, &f, 3, 100_000, 11).unwrap();
        assert!(tv_distance(&exact, &emp) < 0.02);
        assert_eq!(emp, sampled_output_distribution(&alg, &f, 3, 100_000, 11).unwrap());
    }

    #[test]
    fn ordinal_randgreedy_matches_rule() {
        let f = ValueOracle::modular(vec![6.0, 5.0, 4.0, 3.0, 2.0, 1.0, 0.5]);
        let a = exact_output_distribution(&seq(Rule::RandomizedGreedy), &f, 3).unwrap();
        let b = exact_output_distribution(&seq(Rule::Ordinal(OrdinalSchedule::RandGreedy)), &f, 3).unwrap();
        assert!(tv_distance(&a, &b) < 1e-12);
    }

    #[test]
    fn greedi_exact_on_modular() {
        let f = ValueOracle::modular(vec![6.0, 5.0, 4.0, 3.0, 2.0, 1.0]);
        let d = exact_output_distribution(&Algorithm::Greedi { machines: 2 }, &f, 2).unwrap();
        assert_eq!(d, OutputDistribution::point(SubsetMask::from_elements([0, 1])));
    }

    #[test]
    fn csv_roundtrip() {
        let f = ValueOracle::modular(vec![3.0, 2.0, 1.0, 1.0]);
        let d = exact_output_distribution(&seq(Rule::Proportional), &f, 2).unwrap();
        let back = OutputDistribution::from_csv(&d.to_csv()).unwrap();
        assert_eq!(back.probs, d.probs);
        assert!(OutputDistribution::from_csv("set_bitmask_hex,probability\nzz,1").is_err());
    }
}
