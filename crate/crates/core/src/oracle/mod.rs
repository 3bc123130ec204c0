//! Monotone set functions, value oracles and structural checks.

mod families;
mod gated;

use std::borrow::Cow;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mask::SubsetMask;

pub use families::{appendix_d_alpha, appendix_d_b_count, build_function, FunctionSpec, FAMILIES};
pub use gated::{Gate, GatedModular};

/// A set function over ids `0..universe()`.
pub trait SetFunction: Send + Sync {
    fn universe(&self) -> usize;

    fn value(&self, s: &SubsetMask) -> f64;

    /// `f(S + e) - f(S)` for `e ∉ S`.
    fn marginal(&self, s: &SubsetMask, e: usize) -> f64 {
        self.value(&s.with(e)) - self.value(s)
    }
}

/// Wraps a plain closure as a [`SetFunction`].
pub struct FnSetFunction<F> {
    n: usize,
    f: F,
}

impl<F> FnSetFunction<F>
where
    F: Fn(&SubsetMask) -> f64 + Send + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        FnSetFunction { n, f }
    }
}

impl<F> SetFunction for FnSetFunction<F>
where
    F: Fn(&SubsetMask) -> f64 + Send + Sync,
{
    fn universe(&self) -> usize {
        self.n
    }

    fn value(&self, s: &SubsetMask) -> f64 {
        (self.f)(s)
    }
}

/// Weighted coverage plus a modular term.
#[derive(Clone, Debug)]
pub struct Coverage {
    item_weights: Vec<f64>,
    covers: Vec<Vec<usize>>,
    modular: Vec<f64>,
}

impl Coverage {
    pub fn new(item_weights: Vec<f64>, covers: Vec<Vec<usize>>, modular: Vec<f64>) -> Self {
        assert_eq!(covers.len(), modular.len());
        Coverage {
            item_weights,
            covers,
            modular,
        }
    }
}

impl SetFunction for Coverage {
    fn universe(&self) -> usize {
        self.covers.len()
    }

    fn value(&self, s: &SubsetMask) -> f64 {
        let mut covered = vec![false; self.item_weights.len()];
        let mut v = 0.0;
        for e in s.iter() {
            v += self.modular[e];
            for &it in &self.covers[e] {
                if !covered[it] {
                    covered[it] = true;
                    v += self.item_weights[it];
                }
            }
        }
        v
    }

    fn marginal(&self, s: &SubsetMask, e: usize) -> f64 {
        let mut fresh: Vec<usize> = self.covers[e].clone();
        for x in s.iter() {
            fresh.retain(|it| !self.covers[x].contains(it));
        }
        self.modular[e] + fresh.iter().map(|&it| self.item_weights[it]).sum::<f64>()
    }
}

/// A set function together with the ground set it is currently defined on.
///
/// `restrict` and `contract` never renumber elements: ids stay in the
/// original space, so distributions over outputs of `f` and of `f^{∖e}` are
/// directly comparable. Clones share the query counter.
#[derive(Clone)]
pub struct ValueOracle {
    func: Arc<dyn SetFunction>,
    ground: SubsetMask,
    base: SubsetMask,
    base_value: f64,
    queries: Arc<AtomicU64>,
}

impl fmt::Debug for ValueOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ValueOracle")
            .field("ground", &self.ground)
            .field("base", &self.base)
            .finish()
    }
}

impl ValueOracle {
    pub fn new(func: Arc<dyn SetFunction>) -> Self {
        let n = func.universe();
        ValueOracle {
            func,
            ground: SubsetMask::full(n),
            base: SubsetMask::empty(),
            base_value: 0.0,
            queries: Arc::new(AtomicU64::new(0)),
        }
    }

    pub fn from_fn<F>(n: usize, f: F) -> Self
    where
        F: Fn(&SubsetMask) -> f64 + Send + Sync + 'static,
    {
        Self::new(Arc::new(FnSetFunction::new(n, f)))
    }

    pub fn modular(weights: Vec<f64>) -> Self {
        Self::new(Arc::new(GatedModular::new(weights, Vec::new())))
    }

    pub fn ground(&self) -> &SubsetMask {
        &self.ground
    }

    /// Number of elements in the current ground set.
    pub fn n(&self) -> usize {
        self.ground.len()
    }

    /// Size of the original id space.
    pub fn universe(&self) -> usize {
        self.func.universe()
    }

    /// Original ids of the surviving elements, in increasing order.
    pub fn id_map(&self) -> Vec<usize> {
        self.ground.to_vec()
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    fn lift<'a>(&self, s: &'a SubsetMask) -> Cow<'a, SubsetMask> {
        if self.base.is_empty() {
            Cow::Borrowed(s)
        } else {
            Cow::Owned(s.union(&self.base))
        }
    }

    /// `f(S)`; one query.
    pub fn value(&self, s: &SubsetMask) -> f64 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.func.value(&self.lift(s)) - self.base_value
    }

    /// `f(S + e) - f(S)`; counted as two queries.
    pub fn marginal(&self, s: &SubsetMask, e: usize) -> Result<f64> {
        if s.contains(e) {
            return Err(Error::ElementInSet(e));
        }
        if !self.ground.contains(e) {
            return Err(Error::InvalidElement(e));
        }
        Ok(self.marginal_unchecked(s, e))
    }

    pub(crate) fn marginal_unchecked(&self, s: &SubsetMask, e: usize) -> f64 {
        self.queries.fetch_add(2, Ordering::Relaxed);
        self.func.marginal(&self.lift(s), e)
    }

    /// `f^{∖e}`: the same function on the ground set without `e`.
    pub fn restrict(&self, e: usize) -> Result<ValueOracle> {
        if !self.ground.contains(e) {
            return Err(Error::InvalidElement(e));
        }
        Ok(self.restrict_to(&self.ground.without(e)))
    }

    /// The same function on `ground ∩ keep`.
    pub fn restrict_to(&self, keep: &SubsetMask) -> ValueOracle {
        ValueOracle {
            func: Arc::clone(&self.func),
            ground: self.ground.intersection(keep),
            base: self.base.clone(),
            base_value: self.base_value,
            queries: Arc::new(AtomicU64::new(0)),
        }
    }

    /// `T ↦ f(S ∪ T) - f(S)` on `E ∖ S`.
    pub fn contract(&self, s: &SubsetMask) -> ValueOracle {
        let base = self.base.union(s);
        let base_value = self.func.value(&base);
        ValueOracle {
            func: Arc::clone(&self.func),
            ground: self.ground.difference(s),
            base,
            base_value,
            queries: Arc::new(AtomicU64::new(0)),
        }
    }
}

/// `1 - min_e f_{E∖e}(e) / f(e)` over the current ground set.
pub fn curvature(oracle: &ValueOracle) -> Result<f64> {
    let ground = oracle.ground();
    let mut min_ratio = f64::INFINITY;
    for e in ground.iter() {
        let single = oracle.value(&SubsetMask::from_elements([e]));
        if single <= 0.0 {
            return Err(Error::ZeroSingleton(e));
        }
        let last = oracle.marginal_unchecked(&ground.without(e), e);
        min_ratio = min_ratio.min(last / single);
    }
    if min_ratio.is_infinite() {
        return Ok(0.0);
    }
    Ok((1.0 - min_ratio).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Monotonicity,
    DiminishingReturns,
}

/// `f_S(e) < f_T(e)` with `S ⊆ T`, or `f(S + e) < f(S)` (then `T = S`).
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub s: SubsetMask,
    pub t: SubsetMask,
    pub element: usize,
    pub gap: f64,
}

#[derive(Clone, Debug, Default)]
pub struct StructureReport {
    pub checked: u64,
    pub violation_count: u64,
    /// First few witnesses, in enumeration order.
    pub violations: Vec<Violation>,
}

impl StructureReport {
    pub fn ok(&self) -> bool {
        self.violation_count == 0
    }
}

#[derive(Clone, Copy, Debug)]
pub enum CheckMode {
    Exhaustive,
    Sampled { pairs: u64, seed: u64 },
}

pub const EXHAUSTIVE_LIMIT: usize = 20;
const MAX_WITNESSES: usize = 16;

fn close_enough(lhs: f64, rhs: f64) -> bool {
    // lhs >= rhs up to relative rounding
    lhs >= rhs - 1e-9 * lhs.abs().max(rhs.abs()).max(1.0)
}

/// Checks monotonicity and diminishing returns on pairs `S ⊂ S + x`.
///
/// Single-element extensions suffice: `f_S(e) ≥ f_{S+x}(e)` for all `S, x, e`
/// implies the property for every `S ⊆ T` by chaining.
pub fn check_monotone_submodular(oracle: &ValueOracle, mode: CheckMode) -> Result<StructureReport> {
    let ids = oracle.id_map();
    let n = ids.len();
    let mut report = StructureReport::default();
    let record = |report: &mut StructureReport, v: Violation| {
        report.violation_count += 1;
        if report.violations.len() < MAX_WITNESSES {
            report.violations.push(v);
        }
    };
    let check_at = |report: &mut StructureReport, s: &SubsetMask, e: usize, x: Option<usize>| {
        let gain = oracle.marginal_unchecked(s, e);
        report.checked += 1;
        match x {
            None => {
                if !close_enough(gain, 0.0) {
                    record(
                        report,
                        Violation {
                            kind: ViolationKind::Monotonicity,
                            s: s.clone(),
                            t: s.clone(),
                            element: e,
                            gap: -gain,
                        },
                    );
                }
            }
            Some(x) => {
                let t = s.with(x);
                let later = oracle.marginal_unchecked(&t, e);
                if !close_enough(gain, later) {
                    record(
                        report,
                        Violation {
                            kind: ViolationKind::DiminishingReturns,
                            s: s.clone(),
                            t,
                            element: e,
                            gap: later - gain,
                        },
                    );
                }
            }
        }
    };
    match mode {
        CheckMode::Exhaustive => {
            if n > EXHAUSTIVE_LIMIT {
                return Err(Error::GroundSetTooLarge {
                    n,
                    limit: EXHAUSTIVE_LIMIT,
                });
            }
            for bits in 0u64..(1u64 << n) {
                let s: SubsetMask = (0..n).filter(|i| bits >> i & 1 == 1).map(|i| ids[i]).collect();
                for (ei, &e) in ids.iter().enumerate() {
                    if bits >> ei & 1 == 1 {
                        continue;
                    }
                    check_at(&mut report, &s, e, None);
                    for (xi, &x) in ids.iter().enumerate() {
                        if xi != ei && bits >> xi & 1 == 0 {
                            check_at(&mut report, &s, e, Some(x));
                        }
                    }
                }
            }
        }
        CheckMode::Sampled { pairs, seed } => {
            if n < 2 {
                return Ok(report);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..pairs {
                let p: f64 = rng.gen();
                let s: SubsetMask = ids.iter().copied().filter(|_| rng.gen::<f64>() < p).collect();
                let free: Vec<usize> = ids.iter().copied().filter(|&i| !s.contains(i)).collect();
                if free.len() < 2 {
                    continue;
                }
                let e = free[rng.gen_range(0..free.len())];
                let x = loop {
                    let x = free[rng.gen_range(0..free.len())];
                    if x != e {
                        break x;
                    }
                };
                check_at(&mut report, &s, e, None);
                check_at(&mut report, &s, e, Some(x));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginal_errors() {
        let o = ValueOracle::modular(vec![1.0, 2.0]);
        let s = SubsetMask::from_elements([0]);
        assert_eq!(o.marginal(&s, 0), Err(Error::ElementInSet(0)));
        assert_eq!(o.marginal(&s, 5), Err(Error::InvalidElement(5)));
        assert_eq!(o.marginal(&s, 1), Ok(2.0));
        let r = o.restrict(1).unwrap();
        assert_eq!(r.marginal(&SubsetMask::empty(), 1), Err(Error::InvalidElement(1)));
        assert_eq!(o.restrict(7).unwrap_err(), Error::InvalidElement(7));
    }

    #[test]
    fn query_counter_counts_each_value_call() {
        let o = ValueOracle::modular(vec![1.0; 4]);
        let s = SubsetMask::from_elements([1, 2]);
        for i in 1..=5 {
            o.value(&s);
            assert_eq!(o.queries(), i);
        }
        o.marginal(&s, 0).unwrap();
        assert_eq!(o.queries(), 7);
    }

    #[test]
    fn modular_has_zero_curvature() {
        let o = ValueOracle::modular(vec![5.0, 4.0, 3.0]);
        assert_eq!(curvature(&o).unwrap(), 0.0);
        let z = ValueOracle::modular(vec![1.0, 0.0]);
        assert_eq!(curvature(&z), Err(Error::ZeroSingleton(1)));
    }

    #[test]
    fn modular_passes_checks() {
        let o = ValueOracle::modular(vec![0.5, 1.0, 2.0, 0.0, 3.0]);
        let r = check_monotone_submodular(&o, CheckMode::Exhaustive).unwrap();
        assert!(r.ok());
        assert!(r.checked > 0);
    }

    #[test]
    fn square_of_size_is_flagged() {
        let o = ValueOracle::from_fn(5, |s| (s.len() * s.len()) as f64);
        let r = check_monotone_submodular(&o, CheckMode::Exhaustive).unwrap();
        assert!(!r.ok());
        assert_eq!(r.violations[0].kind, ViolationKind::DiminishingReturns);
        let r = check_monotone_submodular(&o, CheckMode::Sampled { pairs: 200, seed: 3 }).unwrap();
        assert!(!r.ok());
    }

    #[test]
    fn decreasing_function_is_flagged() {
        let o = ValueOracle::from_fn(3, |s| -(s.len() as f64));
        let r = check_monotone_submodular(&o, CheckMode::Exhaustive).unwrap();
        assert!(r.violations.iter().any(|v| v.kind == ViolationKind::Monotonicity));
    }

    #[test]
    fn exhaustive_limit() {
        let o = ValueOracle::modular(vec![1.0; 21]);
        assert!(matches!(
            check_monotone_submodular(&o, CheckMode::Exhaustive),
            Err(Error::GroundSetTooLarge { n: 21, .. })
        ));
    }

    #[test]
    fn contraction_normalizes() {
        let o = ValueOracle::modular(vec![1.0, 2.0, 4.0]);
        let c = o.contract(&SubsetMask::from_elements([0]));
        assert_eq!(c.value(&SubsetMask::empty()), 0.0);
        assert_eq!(c.value(&SubsetMask::from_elements([2])), 4.0);
        assert_eq!(c.n(), 2);
    }
}
