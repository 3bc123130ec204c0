//! Sequential maximization: greedy variants, decision rules and ordinal schedules.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mask::SubsetMask;
use crate::oracle::ValueOracle;

/// Generator for one random draw, keyed by `(seed, trial, step)`.
///
/// The stream is a pure function of the key, so runs are reproducible no
/// matter how trials are scheduled across threads.
pub fn step_rng(seed: u64, trial: u64, step: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng.set_word_pos((step as u128) << 16);
    rng
}

/// Mixes `parts` into `seed` (splitmix64 finalizer per part).
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    let mut h = seed;
    for &p in parts {
        h ^= p.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
        h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h ^= h >> 31;
    }
    h
}

/// Where a rule is being applied: 0-based step out of `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepContext {
    pub step: usize,
    pub k: usize,
}

/// A per-step selection rule that only looks at marginal gains.
///
/// `marginals` lists `(element, f_S(e))` for every `e ∈ E ∖ S` in increasing
/// id order; the result is aligned with it.
pub trait DecisionRule: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn probabilities(&self, marginals: &[(usize, f64)], ctx: StepContext) -> Result<Vec<f64>>;
}

/// Candidate positions sorted by marginal, largest first, ties by lowest id.
fn ranked(marginals: &[(usize, f64)]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..marginals.len()).collect();
    idx.sort_by(|&a, &b| {
        marginals[b]
            .1
            .total_cmp(&marginals[a].1)
            .then(marginals[a].0.cmp(&marginals[b].0))
    });
    idx
}

/// Per-step index sets `S_{k,i}` (1-based positions in the sorted order) and
/// their distributions `D_{k,i}`.
#[derive(Clone, Debug, PartialEq)]
pub enum OrdinalSchedule {
    /// `S_{k,i} = {1}`.
    Greedy,
    /// `S_{k,i} = {1..k}`, uniform.
    RandGreedy,
    /// Explicit steps keyed by 1-based step; `fallback` covers unlisted steps.
    Explicit {
        steps: BTreeMap<usize, StepSchedule>,
        fallback: Option<StepSchedule>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepSchedule {
    pub indices: Vec<usize>,
    pub probs: Vec<f64>,
}

impl StepSchedule {
    pub fn new(indices: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if indices.is_empty() || indices.len() != probs.len() {
            return Err(Error::InvalidParameter(format!(
                "schedule step has {} indices and {} probabilities",
                indices.len(),
                probs.len()
            )));
        }
        if indices.iter().any(|&j| j == 0) {
            return Err(Error::InvalidParameter("schedule indices are 1-based".into()));
        }
        let mut seen = indices.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != indices.len() {
            return Err(Error::InvalidParameter("repeated schedule index".into()));
        }
        if probs.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter("schedule probabilities must be positive".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("schedule probabilities sum to {total}")));
        }
        Ok(StepSchedule { indices, probs })
    }

    fn to_line(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        format!(
            "indices=[{}] probs=[{}]",
            join(self.indices.iter().map(|i| i.to_string()).collect()),
            join(self.probs.iter().map(|p| p.to_string()).collect())
        )
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, key: &str) -> Result<Vec<T>> {
    let start = text
        .find(&format!("{key}=["))
        .ok_or_else(|| Error::ConfigParse(format!("schedule line lacks `{key}=[...]`: `{text}`")))?
        + key.len()
        + 2;
    let end = text[start..]
        .find(']')
        .ok_or_else(|| Error::ConfigParse(format!("unclosed `{key}` list")))?
        + start;
    text[start..end]
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::ConfigParse(format!("bad `{key}` entry `{s}`")))
        })
        .collect()
}

impl OrdinalSchedule {
    /// Step schedule for 1-based step `i` of a run with budget `k`.
    pub fn step(&self, i: usize, k: usize) -> Result<StepSchedule> {
        match self {
            OrdinalSchedule::Greedy => Ok(StepSchedule {
                indices: vec![1],
                probs: vec![1.0],
            }),
            OrdinalSchedule::RandGreedy => Ok(StepSchedule {
                indices: (1..=k).collect(),
                probs: vec![1.0 / k as f64; k],
            }),
            OrdinalSchedule::Explicit { steps, fallback } => steps
                .get(&i)
                .or(fallback.as_ref())
                .cloned()
                .ok_or_else(|| Error::InvalidParameter(format!("schedule has no entry for step {i}"))),
        }
    }

    /// Parses a preset name or lines of the form `i: indices=[..] probs=[..]`
    /// (`*` as the step applies to every step without its own line).
    pub fn parse(text: &str) -> Result<OrdinalSchedule> {
        let t = text.trim();
        match t {
            "greedy" => return Ok(OrdinalSchedule::Greedy),
            "randgreedy" => return Ok(OrdinalSchedule::RandGreedy),
            _ => {}
        }
        let mut steps = BTreeMap::new();
        let mut fallback = None;
        for line in t.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (head, rest) = line
                .split_once(':')
                .ok_or_else(|| Error::ConfigParse(format!("schedule line lacks `step:`: `{line}`")))?;
            let step = StepSchedule::new(parse_list(rest, "indices")?, parse_list(rest, "probs")?)?;
            match head.trim() {
                "*" => fallback = Some(step),
                h => {
                    let i: usize = h
                        .parse()
                        .map_err(|_| Error::ConfigParse(format!("bad schedule step `{h}`")))?;
                    if i == 0 {
                        return Err(Error::ConfigParse("schedule steps are 1-based".into()));
                    }
                    steps.insert(i, step);
                }
            }
        }
        if steps.is_empty() && fallback.is_none() {
            return Err(Error::ConfigParse(format!("empty or unknown schedule `{t}`")));
        }
        Ok(OrdinalSchedule::Explicit { steps, fallback })
    }

    pub fn to_text(&self) -> String {
        match self {
            OrdinalSchedule::Greedy => "greedy".into(),
            OrdinalSchedule::RandGreedy => "randgreedy".into(),
            OrdinalSchedule::Explicit { steps, fallback } => {
                let mut out: Vec<String> = steps.iter().map(|(i, s)| format!("{i}: {}", s.to_line())).collect();
                if let Some(f) = fallback {
                    out.push(format!("*: {}", f.to_line()));
                }
                out.join("\n")
            }
        }
    }
}

/// The shipped decision rules.
#[derive(Clone, Debug, PartialEq)]
pub enum Rule {
    Greedy,
    RandomizedGreedy,
    Proportional,
    Ordinal(OrdinalSchedule),
}

pub fn greedy_rule() -> Rule {
    Rule::Greedy
}

pub fn randomized_greedy_rule() -> Rule {
    Rule::RandomizedGreedy
}

pub fn proportional_greedy_rule() -> Rule {
    Rule::Proportional
}

impl Rule {
    /// True when every step is a point mass.
    pub fn is_deterministic(&self) -> bool {
        matches!(self, Rule::Greedy | Rule::Ordinal(OrdinalSchedule::Greedy))
    }
}

impl DecisionRule for Rule {
    fn name(&self) -> String {
        match self {
            Rule::Greedy => "greedy".into(),
            Rule::RandomizedGreedy => "randgreedy".into(),
            Rule::Proportional => "proportional".into(),
            Rule::Ordinal(OrdinalSchedule::Greedy) => "ordinal:greedy".into(),
            Rule::Ordinal(OrdinalSchedule::RandGreedy) => "ordinal:randgreedy".into(),
            Rule::Ordinal(_) => "ordinal".into(),
        }
    }

    fn probabilities(&self, marginals: &[(usize, f64)], ctx: StepContext) -> Result<Vec<f64>> {
        let r = marginals.len();
        let mut p = vec![0.0; r];
        if r == 0 {
            return Ok(p);
        }
        match self {
            Rule::Greedy => p[ranked(marginals)[0]] = 1.0,
            Rule::RandomizedGreedy => {
                let m = ctx.k.min(r);
                for &i in &ranked(marginals)[..m] {
                    p[i] = 1.0 / m as f64;
                }
            }
            Rule::Proportional => {
                if let Some(&(element, value)) = marginals.iter().find(|(_, v)| *v < 0.0) {
                    return Err(Error::NegativeMarginal { element, value });
                }
                let total: f64 = marginals.iter().map(|(_, v)| v).sum();
                if total > 0.0 {
                    for (pi, (_, v)) in p.iter_mut().zip(marginals) {
                        *pi = v / total;
                    }
                } else {
                    p.iter_mut().for_each(|x| *x = 1.0 / r as f64);
                }
            }
            Rule::Ordinal(schedule) => {
                let step = schedule.step(ctx.step + 1, ctx.k)?;
                let order = ranked(marginals);
                for (&j, &q) in step.indices.iter().zip(&step.probs) {
                    if j > r {
                        return Err(Error::IndexBeyondRemaining {
                            step: ctx.step + 1,
                            position: j,
                            remaining: r,
                        });
                    }
                    p[order[j - 1]] += q;
                }
            }
        }
        Ok(p)
    }
}

/// `(element, marginal)` for every element of the ground set outside `s`.
pub fn marginals(oracle: &ValueOracle, s: &SubsetMask) -> Vec<(usize, f64)> {
    oracle
        .ground()
        .difference(s)
        .iter()
        .map(|e| (e, oracle.marginal_unchecked(s, e)))
        .collect()
}

/// Applies `rule` at `s`: returns `(element, marginal, probability)` triples
/// in increasing id order, including zero-probability elements.
pub fn rule_distribution(
    rule: &dyn DecisionRule,
    oracle: &ValueOracle,
    s: &SubsetMask,
    ctx: StepContext,
) -> Result<Vec<(usize, f64, f64)>> {
    let m = marginals(oracle, s);
    let p = rule.probabilities(&m, ctx)?;
    Ok(m.into_iter().zip(p).map(|((e, v), q)| (e, v, q)).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub step: usize,
    pub element: usize,
    pub marginal: f64,
    pub probability: f64,
}

/// The choices made by one run, in order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunTrace {
    pub steps: Vec<TraceStep>,
}

impl RunTrace {
    pub fn elements(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.element).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

pub(crate) fn check_k(oracle: &ValueOracle, k: usize) -> Result<()> {
    let n = oracle.n();
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    Ok(())
}

/// Index drawn from `probs` with a single uniform variate.
pub(crate) fn draw(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// One run of the sequential framework, trial `trial` of seed `seed`.
pub fn run_sequential_trial(
    oracle: &ValueOracle,
    k: usize,
    rule: &dyn DecisionRule,
    seed: u64,
    trial: u64,
) -> Result<(SubsetMask, RunTrace)> {
    check_k(oracle, k)?;
    let mut s = SubsetMask::empty();
    let mut trace = RunTrace::default();
    for step in 0..k {
        let dist = rule_distribution(rule, oracle, &s, StepContext { step, k })?;
        let probs: Vec<f64> = dist.iter().map(|d| d.2).collect();
        let pick = if probs.iter().filter(|&&p| p > 0.0).count() == 1 {
            probs.iter().position(|&p| p > 0.0).expect("one positive entry")
        } else {
            draw(&probs, &mut step_rng(seed, trial, step as u64))
        };
        let (element, marginal, probability) = dist[pick];
        s.insert(element);
        trace.steps.push(TraceStep {
            step,
            element,
            marginal,
            probability,
        });
    }
    Ok((s, trace))
}

pub fn run_sequential(
    oracle: &ValueOracle,
    k: usize,
    rule: &dyn DecisionRule,
    seed: u64,
) -> Result<(SubsetMask, RunTrace)> {
    run_sequential_trial(oracle, k, rule, seed, 0)
}

/// Greedy with ties broken by lowest id.
pub fn deterministic_greedy(oracle: &ValueOracle, k: usize) -> Result<(SubsetMask, RunTrace)> {
    run_sequential(oracle, k, &Rule::Greedy, 0)
}

pub fn independent_sequential(
    oracle: &ValueOracle,
    k: usize,
    schedule: &OrdinalSchedule,
    seed: u64,
) -> Result<(SubsetMask, RunTrace)> {
    run_sequential(oracle, k, &Rule::Ordinal(schedule.clone()), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{build_function, FunctionSpec};

    fn set(ids: &[usize]) -> SubsetMask {
        SubsetMask::from_elements(ids.iter().copied())
    }

    #[test]
    fn greedy_on_modular() {
        let o = ValueOracle::modular(vec![5.0, 4.0, 3.0, 2.0, 1.0]);
        let (s, t) = deterministic_greedy(&o, 2).unwrap();
        assert_eq!(s, set(&[0, 1]));
        assert_eq!(t.elements(), vec![0, 1]);
        assert_eq!(t.steps[0].probability, 1.0);
        assert_eq!(deterministic_greedy(&o, 6).unwrap_err(), Error::KOutOfRange { k: 6, n: 5 });
        assert!(deterministic_greedy(&o, 0).is_err());
    }

    #[test]
    fn greedy_on_curvature_det_lb() {
        let f = build_function(&FunctionSpec::CurvatureDetLb {
            k: 3,
            c: 0.5,
            big_c: Some(100.0),
        })
        .unwrap();
        let (s, _) = deterministic_greedy(&f, 3).unwrap();
        assert_eq!(s, set(&[0, 4, 5]));
        let g = f.restrict(0).unwrap();
        let (s, _) = deterministic_greedy(&g, 3).unwrap();
        assert_eq!(s, set(&[1, 2, 3]));
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let o = ValueOracle::modular(vec![1.0, 2.0, 2.0, 2.0]);
        assert_eq!(deterministic_greedy(&o, 2).unwrap().0, set(&[1, 2]));
    }

    #[test]
    fn randomized_greedy_probabilities() {
        let ctx = StepContext { step: 0, k: 3 };
        let m = [(0, 3.0), (1, 1.0), (2, 2.0)];
        assert_eq!(Rule::RandomizedGreedy.probabilities(&m, ctx).unwrap(), vec![1.0 / 3.0; 3]);
        let m = [(0, 3.0), (1, 1.0), (2, 2.0), (3, 0.5)];
        let p = Rule::RandomizedGreedy.probabilities(&m, ctx).unwrap();
        assert_eq!(p, vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]);
        let p = Rule::RandomizedGreedy.probabilities(&m[..2], ctx).unwrap();
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn randomized_greedy_first_step_on_randgreedy_lb() {
        let f = build_function(&FunctionSpec::RandGreedyLb { n: 10, k: 3, big_c: None }).unwrap();
        let d = rule_distribution(&Rule::RandomizedGreedy, &f, &SubsetMask::empty(), StepContext { step: 0, k: 3 }).unwrap();
        let support: Vec<usize> = d.iter().filter(|x| x.2 > 0.0).map(|x| x.0).collect();
        // C first, then the two lowest unit-weight ids
        assert_eq!(support, vec![0, 1, 2]);
        assert!(d.iter().filter(|x| x.2 > 0.0).all(|x| x.2 == 1.0 / 3.0));
    }

    #[test]
    fn proportional_rule() {
        let ctx = StepContext { step: 0, k: 2 };
        let p = Rule::Proportional.probabilities(&[(0, 3.0), (1, 1.0)], ctx).unwrap();
        assert_eq!(p, vec![0.75, 0.25]);
        let p = Rule::Proportional.probabilities(&[(0, 0.0), (1, 0.0)], ctx).unwrap();
        assert_eq!(p, vec![0.5, 0.5]);
        assert_eq!(
            Rule::Proportional.probabilities(&[(0, 1.0), (4, -0.5)], ctx).unwrap_err(),
            Error::NegativeMarginal { element: 4, value: -0.5 }
        );
        let o = ValueOracle::modular(vec![1.0, 1.0]);
        for seed in 0..5 {
            assert_eq!(run_sequential(&o, 2, &Rule::Proportional, seed).unwrap().0, set(&[0, 1]));
        }
    }

    #[test]
    fn proportional_after_e_star_on_appendix_d() {
        let c = 0.5;
        let f = build_function(&FunctionSpec::AppendixDLb { n: 10, c, big_m: None }).unwrap();
        let d = rule_distribution(&Rule::Proportional, &f, &set(&[0]), StepContext { step: 1, k: 3 }).unwrap();
        let total: f64 = d.iter().map(|x| x.1).sum();
        let b = *d.last().unwrap();
        assert_eq!(b.1, 1.0 - c);
        assert!((b.2 - (1.0 - c) / total).abs() < 1e-15);
    }

    #[test]
    fn ordinal_point_mass_on_second() {
        let o = ValueOracle::modular(vec![5.0, 4.0, 3.0]);
        let sched = OrdinalSchedule::parse("1: indices=[2] probs=[1]").unwrap();
        assert_eq!(independent_sequential(&o, 1, &sched, 0).unwrap().0, set(&[1]));
        let sched = OrdinalSchedule::parse("*: indices=[4] probs=[1]").unwrap();
        assert_eq!(
            independent_sequential(&o, 1, &sched, 0).unwrap_err(),
            Error::IndexBeyondRemaining { step: 1, position: 4, remaining: 3 }
        );
    }

    #[test]
    fn ordinal_greedy_matches_greedy() {
        let f = build_function(&FunctionSpec::Coverage {
            n: 12,
            universe: 30,
            density: 0.2,
            modular_scale: 0.1,
            seed: 4,
        })
        .unwrap();
        let a = deterministic_greedy(&f, 4).unwrap().0;
        let b = independent_sequential(&f, 4, &OrdinalSchedule::Greedy, 9).unwrap().0;
        assert_eq!(a, b);
    }

    #[test]
    fn schedule_text_roundtrip() {
        let text = "1: indices=[1,2] probs=[0.5,0.5]\n*: indices=[1] probs=[1]";
        let s = OrdinalSchedule::parse(text).unwrap();
        assert_eq!(OrdinalSchedule::parse(&s.to_text()).unwrap(), s);
        assert!(OrdinalSchedule::parse("1: indices=[0] probs=[1]").is_err());
        assert!(OrdinalSchedule::parse("1: indices=[1,2] probs=[0.5,0.4]").is_err());
        assert_eq!(OrdinalSchedule::parse("randgreedy").unwrap(), OrdinalSchedule::RandGreedy);
    }

    #[test]
    fn seeded_runs_reproduce() {
        let f = build_function(&FunctionSpec::RandGreedyLb { n: 12, k: 3, big_c: None }).unwrap();
        let a = run_sequential(&f, 3, &Rule::RandomizedGreedy, 17).unwrap();
        let b = run_sequential(&f, 3, &Rule::RandomizedGreedy, 17).unwrap();
        assert_eq!(a, b);
    }
}
