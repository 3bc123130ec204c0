//! In-process simulation of GreeDi and the multi-round pool framework.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::algorithms::{check_k, derive_seed, deterministic_greedy, run_sequential_trial, step_rng, DecisionRule};
use crate::error::{Error, Result};
use crate::mask::SubsetMask;
use crate::oracle::ValueOracle;

/// Machine layout for the distributed runs.
#[derive(Clone, Debug, PartialEq)]
pub struct MpcConfig {
    pub groups: usize,
    pub machines: usize,
    pub rounds: usize,
    /// Per-machine capacity; enforced on the pool when `strict`.
    pub capacity: Option<usize>,
    pub eps: f64,
    /// Approximation ratio of the base algorithm.
    pub alpha: f64,
    pub strict: bool,
}

pub const DEFAULT_EPS: f64 = 0.2;

impl MpcConfig {
    /// `machines` per group with `g = ⌈1/(αε)⌉` groups and `R = ⌈1/ε⌉` rounds.
    pub fn new(machines: usize, eps: f64, alpha: f64) -> Self {
        MpcConfig {
            groups: (1.0 / (alpha * eps)).ceil() as usize,
            machines,
            rounds: (1.0 / eps).ceil() as usize,
            capacity: None,
            eps,
            alpha,
            strict: false,
        }
    }

    pub fn single(groups: usize, machines: usize, rounds: usize) -> Self {
        MpcConfig {
            groups,
            machines,
            rounds,
            ..Self::new(machines, DEFAULT_EPS, 1.0 - (-1.0f64).exp())
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.groups == 0 || self.machines == 0 || self.rounds == 0 {
            return Err(Error::InvalidParameter(format!(
                "groups, machines and rounds must be positive (g = {}, m = {}, R = {})",
                self.groups, self.machines, self.rounds
            )));
        }
        if !(self.eps > 0.0 && self.alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("eps = {}, alpha = {}", self.eps, self.alpha)));
        }
        if self.strict {
            let lim = (n as f64).powf(0.9);
            if self.machines as f64 >= lim || self.capacity(n) as f64 >= lim {
                return Err(Error::InvalidParameter(format!(
                    "strict MPC needs m and capacity below n^0.9 = {lim:.1}"
                )));
            }
        }
        Ok(())
    }

    /// Declared capacity, or the largest integer below `n^0.9`.
    pub fn capacity(&self, n: usize) -> usize {
        self.capacity
            .unwrap_or_else(|| ((n as f64).powf(0.9).ceil() as usize).saturating_sub(1))
    }
}

/// One machine's work in one round.
#[derive(Clone, Debug, PartialEq)]
pub struct MachineRecord {
    pub round: usize,
    pub group: usize,
    pub machine: usize,
    pub shard_size: usize,
    pub solution: SubsetMask,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DistTrace {
    pub records: Vec<MachineRecord>,
    /// Pool after each round (framework only).
    pub pools: Vec<SubsetMask>,
    /// Incumbent value after each round (framework only).
    pub incumbent_values: Vec<f64>,
    /// Machine each element went to, GreeDi only (`usize::MAX` off the ground set).
    pub assignment: Vec<usize>,
    /// GreeDi's final argmax had more than one maximizer.
    pub tie: bool,
}

impl DistTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,group,machine,shard_size,solution,value\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.round,
                r.group,
                r.machine,
                r.shard_size,
                r.solution.to_hex(),
                r.value
            );
        }
        out
    }
}

/// Uniform machine for every ground element, drawn in id order.
pub fn random_assignment(oracle: &ValueOracle, machines: usize, seed: u64, trial: u64) -> Vec<usize> {
    let mut rng = step_rng(seed, trial, 0);
    let mut a = vec![usize::MAX; oracle.universe()];
    for e in oracle.ground().iter() {
        a[e] = rng.gen_range(0..machines);
    }
    a
}

fn greedy_on(oracle: &ValueOracle, k: usize) -> Result<SubsetMask> {
    let kk = k.min(oracle.n());
    if kk == 0 {
        return Ok(SubsetMask::empty());
    }
    Ok(deterministic_greedy(oracle, kk)?.0)
}

/// GreeDi for a fixed element-to-machine assignment.
///
/// Ties in the final argmax prefer the merged solution, then the lowest
/// machine; `trace.tie` reports whether one happened.
pub fn greedi_with_assignment(
    oracle: &ValueOracle,
    k: usize,
    machines: usize,
    assignment: &[usize],
) -> Result<(SubsetMask, DistTrace)> {
    check_k(oracle, k)?;
    if machines == 0 {
        return Err(Error::InvalidParameter("machines must be positive".into()));
    }
    let mut shards = vec![SubsetMask::empty(); machines];
    for e in oracle.ground().iter() {
        let m = assignment[e];
        if m >= machines {
            return Err(Error::InvalidParameter(format!("element {e} assigned to machine {m}")));
        }
        shards[m].insert(e);
    }
    let partial: Vec<(SubsetMask, f64)> = shards
        .par_iter()
        .map(|shard| {
            let s = greedy_on(&oracle.restrict_to(shard), k)?;
            let v = oracle.value(&s);
            Ok((s, v))
        })
        .collect::<Result<_>>()?;
    let mut trace = DistTrace {
        assignment: assignment.to_vec(),
        ..Default::default()
    };
    let mut union = SubsetMask::empty();
    for (i, (s, v)) in partial.iter().enumerate() {
        union = union.union(s);
        trace.records.push(MachineRecord {
            round: 1,
            group: 0,
            machine: i,
            shard_size: shards[i].len(),
            solution: s.clone(),
            value: *v,
        });
    }
    let merged = greedy_on(&oracle.restrict_to(&union), k)?;
    let merged_value = oracle.value(&merged);
    trace.records.push(MachineRecord {
        round: 2,
        group: 0,
        machine: 0,
        shard_size: union.len(),
        solution: merged.clone(),
        value: merged_value,
    });
    let (mut best, mut best_value) = (merged, merged_value);
    for (s, v) in &partial {
        if *v > best_value {
            best = s.clone();
            best_value = *v;
        }
    }
    trace.tie = std::iter::once((&trace.records.last().unwrap().solution, merged_value))
        .chain(partial.iter().map(|(s, v)| (s, *v)))
        .any(|(s, v)| v == best_value && *s != best);
    Ok((best, trace))
}

pub fn greedi_trial(oracle: &ValueOracle, k: usize, machines: usize, seed: u64, trial: u64) -> Result<(SubsetMask, DistTrace)> {
    if machines == 0 {
        return Err(Error::InvalidParameter("machines must be positive".into()));
    }
    let a = random_assignment(oracle, machines, seed, trial);
    greedi_with_assignment(oracle, k, machines, &a)
}

pub fn greedi(oracle: &ValueOracle, k: usize, machines: usize, seed: u64) -> Result<(SubsetMask, DistTrace)> {
    greedi_trial(oracle, k, machines, seed, 0)
}

/// The multi-round framework: `g` groups of `m` machines, a growing pool and
/// an incumbent, each machine running `base` on its shard plus the pool.
pub fn barbosa_framework_trial(
    oracle: &ValueOracle,
    k: usize,
    cfg: &MpcConfig,
    base: &dyn DecisionRule,
    seed: u64,
    trial: u64,
) -> Result<(SubsetMask, DistTrace)> {
    check_k(oracle, k)?;
    let n = oracle.n();
    cfg.validate(n)?;
    let run_seed = derive_seed(seed, &[trial]);
    let mut pool = SubsetMask::empty();
    let mut best = SubsetMask::empty();
    let mut best_value = oracle.value(&best);
    let mut trace = DistTrace::default();
    for round in 1..=cfg.rounds {
        let mut jobs = Vec::with_capacity(cfg.groups * cfg.machines);
        for group in 0..cfg.groups {
            let a = random_assignment(oracle, cfg.machines, derive_seed(run_seed, &[round as u64, group as u64]), 0);
            let mut shards = vec![SubsetMask::empty(); cfg.machines];
            for e in oracle.ground().iter() {
                shards[a[e]].insert(e);
            }
            for (machine, shard) in shards.into_iter().enumerate() {
                jobs.push((group, machine, shard));
            }
        }
        let results: Vec<(SubsetMask, f64)> = jobs
            .par_iter()
            .map(|(group, machine, shard)| {
                let local = oracle.restrict_to(&shard.union(&pool));
                let kk = k.min(local.n());
                let s = if kk == 0 {
                    SubsetMask::empty()
                } else {
                    let sub_seed = derive_seed(run_seed, &[round as u64, *group as u64, *machine as u64]);
                    run_sequential_trial(&local, kk, base, sub_seed, 0)?.0
                };
                let v = oracle.value(&s);
                Ok((s, v))
            })
            .collect::<Result<_>>()?;
        for ((group, machine, shard), (s, v)) in jobs.into_iter().zip(results) {
            if v > best_value {
                best = s.clone();
                best_value = v;
            }
            pool = pool.union(&s);
            trace.records.push(MachineRecord {
                round,
                group,
                machine,
                shard_size: shard.len(),
                solution: s,
                value: v,
            });
        }
        if cfg.strict {
            let cap = cfg.capacity(n);
            if pool.len() > cap {
                return Err(Error::PoolOverflow {
                    pool: pool.len(),
                    capacity: cap,
                });
            }
        }
        trace.pools.push(pool.clone());
        trace.incumbent_values.push(best_value);
    }
    Ok((best, trace))
}

pub fn barbosa_framework(
    oracle: &ValueOracle,
    k: usize,
    cfg: &MpcConfig,
    base: &dyn DecisionRule,
    seed: u64,
) -> Result<(SubsetMask, DistTrace)> {
    barbosa_framework_trial(oracle, k, cfg, base, seed, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{run_sequential, Rule};
    use crate::oracle::{build_function, FunctionSpec};

    fn coverage(n: usize, seed: u64) -> ValueOracle {
        build_function(&FunctionSpec::Coverage {
            n,
            universe: 40,
            density: 0.15,
            modular_scale: 0.2,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn single_machine_greedi_is_greedy() {
        for seed in 0..5 {
            let f = coverage(14, seed);
            let (s, t) = greedi(&f, 4, 1, seed).unwrap();
            assert_eq!(s, deterministic_greedy(&f, 4).unwrap().0);
            assert_eq!(t.records.len(), 2);
        }
    }

    #[test]
    fn greedi_beats_every_machine() {
        let f = coverage(20, 3);
        for seed in 0..10 {
            let (s, t) = greedi(&f, 3, 4, seed).unwrap();
            let v = f.value(&s);
            assert!(t.records.iter().all(|r| r.value <= v));
        }
    }

    #[test]
    fn greedi_modular_finds_top_k_exhaustively() {
        let f = ValueOracle::modular(vec![6.0, 5.0, 4.0, 3.0, 2.0, 1.0]);
        for code in 0..64u32 {
            let a: Vec<usize> = (0..6).map(|i| (code >> i & 1) as usize).collect();
            let (s, _) = greedi_with_assignment(&f, 2, 2, &a).unwrap();
            assert_eq!(s, SubsetMask::from_elements([0, 1]));
        }
    }

    #[test]
    fn one_round_one_machine_framework_is_base() {
        let f = coverage(12, 8);
        let cfg = MpcConfig::single(1, 1, 1);
        let rule = Rule::RandomizedGreedy;
        for seed in 0..5 {
            let (s, _) = barbosa_framework(&f, 3, &cfg, &rule, seed).unwrap();
            let local_seed = derive_seed(derive_seed(seed, &[0]), &[1, 0, 0]);
            assert_eq!(s, run_sequential(&f, 3, &rule, local_seed).unwrap().0);
        }
    }

    #[test]
    fn framework_pool_and_incumbent_grow() {
        let f = coverage(30, 2);
        let cfg = MpcConfig::new(3, 0.25, 0.5);
        assert_eq!((cfg.groups, cfg.rounds), (8, 4));
        let (_, t) = barbosa_framework(&f, 3, &cfg, &Rule::Greedy, 7).unwrap();
        for w in t.pools.windows(2) {
            assert!(w[0].is_subset(&w[1]));
        }
        for w in t.incumbent_values.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn strict_pool_overflow() {
        let f = coverage(30, 2);
        let cfg = MpcConfig {
            capacity: Some(2),
            strict: true,
            ..MpcConfig::single(2, 2, 2)
        };
        assert!(matches!(
            barbosa_framework(&f, 2, &cfg, &Rule::Greedy, 0),
            Err(Error::PoolOverflow { capacity: 2, .. })
        ));
        let cfg = MpcConfig {
            strict: true,
            ..MpcConfig::single(1, 30, 1)
        };
        assert!(matches!(cfg.validate(30), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn framework_lb_pool_holds_large_block() {
        let k = 4;
        let f = build_function(&FunctionSpec::FrameworkLb {
            n: 40,
            k,
            c: 0.5,
            pivot: 0,
            big_c: None,
        })
        .unwrap();
        let cfg = MpcConfig::single(2, 4, 1);
        for seed in 0..10 {
            let (_, t) = barbosa_framework(&f, k, &cfg, &Rule::Greedy, seed).unwrap();
            assert!(SubsetMask::full(k).is_subset(&t.pools[0]));
        }
    }

    #[test]
    fn csv_header() {
        let f = coverage(8, 1);
        let (_, t) = greedi(&f, 2, 2, 0).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("round,group,machine,shard_size,solution,value\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
