//! Earth mover's distance between output distributions under the
//! symmetric-difference ground cost.
//!
//! The residual transportation problem is solved by a primal network simplex
//! on the bipartite graph plus an artificial root. Costs are integers, so node
//! potentials and reduced costs are exact; only the flows are floating point
//! (or integers, for two empirical measures).

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::ops::{Add, Sub};

use crate::distributions::{DistMode, OutputDistribution};
use crate::error::{Error, Result};
use crate::mask::SubsetMask;

pub const DEFAULT_SUPPORT_CAP: usize = 50_000;
const MASS_TOL: f64 = 1e-9;

/// `|S △ T|`.
pub fn sym_diff_cost(s: &SubsetMask, t: &SubsetMask) -> u64 {
    s.sym_diff_len(t) as u64
}

/// An optimal coupling with its dual certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan {
    /// `(source, target, mass)` with positive mass.
    pub entries: Vec<(SubsetMask, SubsetMask, f64)>,
    pub cost: f64,
    /// Cost as a reduced fraction, when both inputs are empirical measures.
    pub exact_cost: Option<(u128, u128)>,
    /// A 1-Lipschitz potential `φ` on the union of both supports with
    /// `Σ D2 φ - Σ D1 φ = cost`; `(u, v) = (-φ, φ)` is dual optimal.
    pub potential: BTreeMap<SubsetMask, i64>,
    pub pivots: u64,
}

impl TransportPlan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("source_hex,target_hex,mass,cost_contrib\n");
        for (s, t, m) in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                s.to_hex(),
                t.to_hex(),
                m,
                m * sym_diff_cost(s, t) as f64
            );
        }
        out
    }
}

/// Result of checking a plan against its inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateCheck {
    pub max_marginal_error: f64,
    /// Largest `φ(T) - φ(S) - |S △ T|` over all support pairs (≤ 0 when feasible).
    pub max_dual_violation: i64,
    /// Largest reduced cost on an arc carrying flow.
    pub max_slackness_violation: i64,
    pub duality_gap: f64,
}

impl CertificateCheck {
    pub fn ok(&self, tol: f64) -> bool {
        self.max_marginal_error <= tol
            && self.max_dual_violation <= 0
            && self.max_slackness_violation == 0
            && self.duality_gap.abs() <= tol.max(1e-7)
    }
}

/// Verifies marginals, dual feasibility, complementary slackness and the
/// duality gap. Quadratic in the support size.
pub fn check_plan(d1: &OutputDistribution, d2: &OutputDistribution, plan: &TransportPlan) -> CertificateCheck {
    let mut rows: BTreeMap<&SubsetMask, f64> = BTreeMap::new();
    let mut cols: BTreeMap<&SubsetMask, f64> = BTreeMap::new();
    let mut slack = 0i64;
    let phi = |s: &SubsetMask| plan.potential.get(s).copied().unwrap_or(0);
    for (s, t, m) in &plan.entries {
        *rows.entry(s).or_insert(0.0) += m;
        *cols.entry(t).or_insert(0.0) += m;
        let rc = sym_diff_cost(s, t) as i64 - (phi(t) - phi(s));
        slack = slack.max(rc.abs());
    }
    let mut err: f64 = 0.0;
    for (s, p) in d1.iter() {
        err = err.max((rows.get(s).copied().unwrap_or(0.0) - p).abs());
    }
    for (t, q) in d2.iter() {
        err = err.max((cols.get(t).copied().unwrap_or(0.0) - q).abs());
    }
    for s in rows.keys() {
        if d1.prob(s) == 0.0 {
            err = err.max(rows[s]);
        }
    }
    let mut viol = i64::MIN;
    for (s, _) in d1.iter() {
        for (t, _) in d2.iter() {
            viol = viol.max(phi(t) - phi(s) - sym_diff_cost(s, t) as i64);
        }
    }
    let dual: f64 = d2.iter().map(|(t, q)| q * phi(t) as f64).sum::<f64>()
        - d1.iter().map(|(s, p)| p * phi(s) as f64).sum::<f64>();
    CertificateCheck {
        max_marginal_error: err,
        max_dual_violation: viol.max(0),
        max_slackness_violation: slack,
        duality_gap: plan.cost - dual,
    }
}

trait Mass: Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> + fmt::Debug {
    const ZERO: Self;
    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl Mass for f64 {
    const ZERO: Self = 0.0;
}

impl Mass for i64 {
    const ZERO: Self = 0;
}

/// Packed bitsets of equal word width for fast cost evaluation.
struct Points {
    width: usize,
    words: Vec<u64>,
}

impl Points {
    fn new(sets: &[&SubsetMask], width: usize) -> Self {
        let mut words = vec![0u64; sets.len() * width];
        for (i, s) in sets.iter().enumerate() {
            for e in s.iter() {
                words[i * width + e / 64] |= 1u64 << (e % 64);
            }
        }
        Points { width, words }
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.words[i * self.width..(i + 1) * self.width]
    }
}

fn cost_of(a: &[u64], b: &[u64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones() as i64).sum()
}

#[derive(Clone, Copy, Debug)]
enum ArcKind {
    Real(u32, u32),
    Artificial,
}

#[derive(Clone, Copy, Debug)]
struct TreeEdge<F> {
    s: usize,
    t: usize,
    kind: ArcKind,
    flow: F,
}

struct Simplex<'a, F> {
    m: usize,
    n: usize,
    src: &'a Points,
    dst: &'a Points,
    big: i64,
    edges: Vec<TreeEdge<F>>,
    parent: Vec<usize>,
    pedge: Vec<usize>,
    depth: Vec<usize>,
    pi: Vec<i64>,
    adj: Vec<Vec<usize>>,
    next_arc: usize,
    block: usize,
    pivots: u64,
}

impl<'a, F: Mass> Simplex<'a, F> {
    fn new(supply: &[F], demand: &[F], src: &'a Points, dst: &'a Points) -> Self {
        let (m, n) = (supply.len(), demand.len());
        let root = m + n;
        let max_cost = (64 * src.width.max(1)) as i64;
        let mut edges = Vec::with_capacity(m + n);
        // strongly feasible start: every artificial arc carries positive flow
        for (i, &a) in supply.iter().enumerate() {
            edges.push(TreeEdge {
                s: i,
                t: root,
                kind: ArcKind::Artificial,
                flow: a,
            });
        }
        for (j, &b) in demand.iter().enumerate() {
            edges.push(TreeEdge {
                s: root,
                t: m + j,
                kind: ArcKind::Artificial,
                flow: b,
            });
        }
        let arcs = m * n;
        let mut sx = Simplex {
            m,
            n,
            src,
            dst,
            big: (max_cost + 1) * (root as i64 + 1),
            edges,
            parent: vec![usize::MAX; root + 1],
            pedge: vec![usize::MAX; root + 1],
            depth: vec![0; root + 1],
            pi: vec![0; root + 1],
            adj: Vec::new(),
            next_arc: 0,
            block: ((arcs as f64).sqrt() as usize).max(10),
            pivots: 0,
        };
        sx.rebuild();
        sx
    }

    fn arc_cost(&self, kind: ArcKind) -> i64 {
        match kind {
            ArcKind::Real(i, j) => cost_of(self.src.row(i as usize), self.dst.row(j as usize)),
            ArcKind::Artificial => self.big,
        }
    }

    /// Builds adjacency and labels the whole tree from the root.
    fn rebuild(&mut self) {
        let nodes = self.m + self.n + 1;
        let root = nodes - 1;
        self.adj = vec![Vec::new(); nodes];
        for (k, e) in self.edges.iter().enumerate() {
            self.adj[e.s].push(k);
            self.adj[e.t].push(k);
        }
        self.parent[root] = usize::MAX;
        self.pedge[root] = usize::MAX;
        self.depth[root] = 0;
        self.pi[root] = 0;
        self.relabel(root);
    }

    /// Recomputes parents, depths and potentials below `top`, whose own
    /// labels must already be correct.
    fn relabel(&mut self, top: usize) {
        let mut stack = vec![top];
        while let Some(u) = stack.pop() {
            for idx in 0..self.adj[u].len() {
                let k = self.adj[u][idx];
                if k == self.pedge[u] {
                    continue;
                }
                let e = self.edges[k];
                let v = if e.s == u { e.t } else { e.s };
                let c = self.arc_cost(e.kind);
                self.parent[v] = u;
                self.pedge[v] = k;
                self.depth[v] = self.depth[u] + 1;
                // c + π_s - π_t = 0 on tree arcs
                self.pi[v] = if e.s == u { self.pi[u] + c } else { self.pi[u] - c };
                stack.push(v);
            }
        }
    }

    fn reduced(&self, arc: usize) -> i64 {
        let (i, j) = (arc / self.n, arc % self.n);
        cost_of(self.src.row(i), self.dst.row(j)) + self.pi[i] - self.pi[self.m + j]
    }

    /// Block search: the most negative reduced cost within the first block
    /// that has one.
    fn entering(&mut self) -> Option<usize> {
        let total = self.m * self.n;
        let mut best: Option<(i64, usize)> = None;
        let mut seen = 0;
        let mut a = self.next_arc;
        while seen < total {
            let r = self.reduced(a);
            if r < 0 && best.map_or(true, |(b, _)| r < b) {
                best = Some((r, a));
            }
            seen += 1;
            a += 1;
            if a == total {
                a = 0;
            }
            if seen % self.block == 0 && best.is_some() {
                break;
            }
        }
        self.next_arc = a;
        best.map(|(_, arc)| arc)
    }

    fn pivot(&mut self, arc: usize) {
        let (i, j) = (arc / self.n, arc % self.n);
        let (u, v) = (i, self.m + j);
        let (mut a, mut b) = (u, v);
        while a != b {
            if self.depth[a] >= self.depth[b] {
                a = self.parent[a];
            } else {
                b = self.parent[b];
            }
        }
        let join = a;
        let mut delta: Option<F> = None;
        let mut out = usize::MAX;
        let mut out_on_u_side = false;
        // flow travels down the u side and up the v side
        let mut w = u;
        while w != join {
            let k = self.pedge[w];
            let e = self.edges[k];
            if e.s == w && delta.map_or(true, |d| e.flow < d) {
                delta = Some(e.flow);
                out = k;
                out_on_u_side = true;
            }
            w = self.parent[w];
        }
        let mut w = v;
        while w != join {
            let k = self.pedge[w];
            let e = self.edges[k];
            if e.t == w && delta.map_or(true, |d| e.flow <= d) {
                delta = Some(e.flow);
                out = k;
                out_on_u_side = false;
            }
            w = self.parent[w];
        }
        let delta = delta.expect("uncapacitated problem with non-negative costs is bounded");
        for (start, down_gains) in [(u, true), (v, false)] {
            let mut w = start;
            while w != join {
                let k = self.pedge[w];
                let e = &mut self.edges[k];
                let down = e.t == w;
                if down == down_gains {
                    e.flow = e.flow + delta;
                } else {
                    e.flow = e.flow - delta;
                }
                w = self.parent[w];
            }
        }
        let old = self.edges[out];
        self.adj[old.s].retain(|&k| k != out);
        self.adj[old.t].retain(|&k| k != out);
        self.edges[out] = TreeEdge {
            s: u,
            t: v,
            kind: ArcKind::Real(i as u32, j as u32),
            flow: delta,
        };
        self.adj[u].push(out);
        self.adj[v].push(out);
        // the side that lost its tree arc hangs off the entering arc now
        let c = self.arc_cost(self.edges[out].kind);
        let (top, above) = if out_on_u_side { (u, v) } else { (v, u) };
        self.parent[top] = above;
        self.pedge[top] = out;
        self.depth[top] = self.depth[above] + 1;
        self.pi[top] = if top == v { self.pi[u] + c } else { self.pi[v] - c };
        self.relabel(top);
        self.pivots += 1;
    }

    fn solve(&mut self) {
        while let Some(arc) = self.entering() {
            self.pivot(arc);
        }
    }
}

struct Residual<F> {
    sources: Vec<SubsetMask>,
    sinks: Vec<SubsetMask>,
    supply: Vec<F>,
    demand: Vec<F>,
    diagonal: Vec<(SubsetMask, F)>,
}

/// Moves `min(D1(S), D2(S))` onto the diagonal. Some optimal plan always does
/// this when the cost is a metric.
fn presolve<F: Mass>(a: &BTreeMap<SubsetMask, F>, b: &BTreeMap<SubsetMask, F>) -> Residual<F> {
    let mut r = Residual {
        sources: Vec::new(),
        sinks: Vec::new(),
        supply: Vec::new(),
        demand: Vec::new(),
        diagonal: Vec::new(),
    };
    for (s, &p) in a {
        let q = b.get(s).copied().unwrap_or(F::ZERO);
        let d = F::min_of(p, q);
        if d > F::ZERO {
            r.diagonal.push((s.clone(), d));
        }
        if p - d > F::ZERO {
            r.sources.push(s.clone());
            r.supply.push(p - d);
        }
    }
    for (t, &q) in b {
        let p = a.get(t).copied().unwrap_or(F::ZERO);
        let d = F::min_of(p, q);
        if q - d > F::ZERO {
            r.sinks.push(t.clone());
            r.demand.push(q - d);
        }
    }
    r
}

struct Solved<F> {
    entries: Vec<(SubsetMask, SubsetMask, F, i64)>,
    potential: BTreeMap<SubsetMask, i64>,
    pivots: u64,
}

fn solve_generic<F: Mass>(a: &BTreeMap<SubsetMask, F>, b: &BTreeMap<SubsetMask, F>) -> Solved<F> {
    let res = presolve(a, b);
    let width = a
        .keys()
        .chain(b.keys())
        .map(|s| s.bound().div_ceil(64))
        .max()
        .unwrap_or(0)
        .max(1);
    let src_refs: Vec<&SubsetMask> = res.sources.iter().collect();
    let dst_refs: Vec<&SubsetMask> = res.sinks.iter().collect();
    let src = Points::new(&src_refs, width);
    let dst = Points::new(&dst_refs, width);
    let mut entries: Vec<(SubsetMask, SubsetMask, F, i64)> =
        res.diagonal.iter().map(|(s, d)| (s.clone(), s.clone(), *d, 0)).collect();
    let mut potential = BTreeMap::new();
    let mut pivots = 0;
    if !res.sources.is_empty() && !res.sinks.is_empty() {
        let mut sx = Simplex::new(&res.supply, &res.demand, &src, &dst);
        sx.solve();
        pivots = sx.pivots;
        for e in &sx.edges {
            if let ArcKind::Real(i, j) = e.kind {
                if e.flow > F::ZERO {
                    let (i, j) = (i as usize, j as usize);
                    entries.push((
                        res.sources[i].clone(),
                        res.sinks[j].clone(),
                        e.flow,
                        cost_of(src.row(i), dst.row(j)),
                    ));
                }
            }
        }
        // c-transform of the source duals u_i = -π_i; 1-Lipschitz by construction
        let m = res.sources.len();
        let phi = |p: &[u64]| -> i64 {
            (0..m)
                .map(|i| cost_of(src.row(i), p) + sx.pi[i])
                .min()
                .expect("non-empty sources")
        };
        for s in a.keys().chain(b.keys()) {
            if !potential.contains_key(s) {
                let p = Points::new(&[s], width);
                potential.insert(s.clone(), phi(p.row(0)));
            }
        }
    } else {
        for s in a.keys().chain(b.keys()) {
            potential.insert(s.clone(), 0);
        }
    }
    entries.sort_by(|x, y| (&x.0, &x.1).cmp(&(&y.0, &y.1)));
    Solved {
        entries,
        potential,
        pivots,
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmdOptions {
    /// Cap on `|supp D1| + |supp D2|`.
    pub support_cap: usize,
}

impl Default for EmdOptions {
    fn default() -> Self {
        EmdOptions {
            support_cap: DEFAULT_SUPPORT_CAP,
        }
    }
}

/// Earth mover's distance under `|S △ T|` with an optimal plan.
pub fn emd(d1: &OutputDistribution, d2: &OutputDistribution) -> Result<(f64, TransportPlan)> {
    emd_with(d1, d2, EmdOptions::default())
}

pub fn emd_with(d1: &OutputDistribution, d2: &OutputDistribution, opts: EmdOptions) -> Result<(f64, TransportPlan)> {
    let support = d1.support_len() + d2.support_len();
    if support > opts.support_cap {
        return Err(Error::SupportCapExceeded {
            support,
            cap: opts.support_cap,
        });
    }
    let (m1, m2) = (d1.total_mass(), d2.total_mass());
    if (m1 - m2).abs() > MASS_TOL {
        return Err(Error::InfeasibleMarginals(m1, m2));
    }
    let plan = match (d1.mode, d2.mode) {
        (DistMode::Empirical { trials: t1 }, DistMode::Empirical { trials: t2 })
            if !d1.counts.is_empty() && !d2.counts.is_empty() =>
        {
            // both sides scaled to the common total t1·t2
            let scale = |d: &OutputDistribution, f: u64| -> BTreeMap<SubsetMask, i64> {
                d.counts.iter().map(|(s, c)| (s.clone(), (*c * f) as i64)).collect()
            };
            let solved = solve_generic(&scale(d1, t2), &scale(d2, t1));
            let den = t1 as u128 * t2 as u128;
            let num: u128 = solved.entries.iter().map(|e| e.2 as u128 * e.3 as u128).sum();
            let g = gcd(num, den).max(1);
            TransportPlan {
                entries: solved
                    .entries
                    .into_iter()
                    .map(|(s, t, f, _)| (s, t, f as f64 / den as f64))
                    .collect(),
                cost: num as f64 / den as f64,
                exact_cost: Some((num / g, den / g)),
                potential: solved.potential,
                pivots: solved.pivots,
            }
        }
        _ => {
            let pos = |d: &OutputDistribution| -> BTreeMap<SubsetMask, f64> {
                d.iter().filter(|(_, p)| *p > 0.0).map(|(s, p)| (s.clone(), p)).collect()
            };
            let solved = solve_generic(&pos(d1), &pos(d2));
            let cost = solved.entries.iter().map(|e| e.2 * e.3 as f64).sum();
            TransportPlan {
                entries: solved.entries.into_iter().map(|(s, t, f, _)| (s, t, f)).collect(),
                cost,
                exact_cost: None,
                potential: solved.potential,
                pivots: solved.pivots,
            }
        }
    };
    Ok((plan.cost, plan))
}

/// `½ Σ_S |D1(S) - D2(S)|`.
pub fn tv_distance(d1: &OutputDistribution, d2: &OutputDistribution) -> f64 {
    let mut sum = 0.0;
    for (s, p) in d1.iter() {
        sum += (p - d2.prob(s)).abs();
    }
    for (s, q) in d2.iter() {
        if !d1.probs.contains_key(s) {
            sum += q;
        }
    }
    sum / 2.0
}

/// `Σ_e |Pr_{D1}[e ∈ S] - Pr_{D2}[e ∈ S]|`, a lower bound on the EMD.
pub fn inclusion_probability_lower_bound(d1: &OutputDistribution, d2: &OutputDistribution) -> f64 {
    let mut diff: BTreeMap<usize, f64> = BTreeMap::new();
    for (s, p) in d1.iter() {
        for e in s.iter() {
            *diff.entry(e).or_insert(0.0) += p;
        }
    }
    for (s, q) in d2.iter() {
        for e in s.iter() {
            *diff.entry(e).or_insert(0.0) -= q;
        }
    }
    diff.values().map(|x| x.abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(ids: &[usize]) -> SubsetMask {
        SubsetMask::from_elements(ids.iter().copied())
    }

    fn dist(pairs: &[(&[usize], f64)]) -> OutputDistribution {
        let mut m = BTreeMap::new();
        for (s, p) in pairs {
            *m.entry(set(s)).or_insert(0.0) += p;
        }
        OutputDistribution::from_probs(m)
    }

    #[test]
    fn sym_diff_examples() {
        assert_eq!(sym_diff_cost(&set(&[0, 1, 2]), &set(&[0, 3])), 3);
        assert_eq!(sym_diff_cost(&set(&[0, 1]), &set(&[0, 1])), 0);
        assert_eq!(sym_diff_cost(&set(&[0, 1, 2]), &set(&[3, 4, 5])), 6);
    }

    #[test]
    fn emd_examples() {
        let a = dist(&[(&[0], 0.5), (&[1], 0.5)]);
        let b = dist(&[(&[0], 1.0)]);
        let (v, plan) = emd(&a, &b).unwrap();
        assert_eq!(v, 1.0);
        assert!(check_plan(&a, &b, &plan).ok(1e-9));
        assert_eq!(tv_distance(&a, &b), 0.5);
        assert_eq!(emd(&a, &a).unwrap().0, 0.0);
        let p = dist(&[(&[0, 1, 2], 1.0)]);
        let q = dist(&[(&[3, 4, 5], 1.0)]);
        assert_eq!(emd(&p, &q).unwrap().0, 6.0);
        assert_eq!(inclusion_probability_lower_bound(&p, &q), 6.0);
        assert_eq!(tv_distance(&p, &q), 1.0);
    }

    #[test]
    fn errors() {
        let a = dist(&[(&[0], 0.5)]);
        let b = dist(&[(&[0], 1.0)]);
        assert!(matches!(emd(&a, &b), Err(Error::InfeasibleMarginals(..))));
        let big = dist(&[(&[0], 0.5), (&[1], 0.5)]);
        assert_eq!(
            emd_with(&big, &b, EmdOptions { support_cap: 2 }).unwrap_err(),
            Error::SupportCapExceeded { support: 3, cap: 2 }
        );
    }

    #[test]
    fn empirical_exact_rational() {
        let a = OutputDistribution::from_counts(BTreeMap::from([(set(&[0]), 2), (set(&[1]), 1)]));
        let b = OutputDistribution::from_counts(BTreeMap::from([(set(&[0]), 1), (set(&[2]), 1)]));
        let (v, plan) = emd(&a, &b).unwrap();
        // keep 1/2 on {0}, move 1/6 from {0} and 1/3 from {1} to {2}
        assert_eq!(plan.exact_cost, Some((1, 1)));
        assert!((v - 1.0).abs() < 1e-15);
        assert!(check_plan(&a, &b, &plan).ok(1e-9));
    }

    #[test]
    fn plan_csv() {
        let a = dist(&[(&[0], 0.5), (&[1], 0.5)]);
        let b = dist(&[(&[0], 1.0)]);
        let (_, plan) = emd(&a, &b).unwrap();
        assert_eq!(plan.to_csv(), "source_hex,target_hex,mass,cost_contrib\n1,1,0.5,0\n2,1,0.5,1\n");
    }

    fn arb_dist(n: usize, k: usize) -> impl Strategy<Value = OutputDistribution> {
        proptest::collection::vec((proptest::sample::subsequence((0..n).collect::<Vec<_>>(), k), 1u32..20), 1..8)
            .prop_map(|v| {
                let total: u32 = v.iter().map(|x| x.1).sum();
                let mut m = BTreeMap::new();
                for (s, w) in v {
                    *m.entry(SubsetMask::from_elements(s)).or_insert(0.0) += w as f64 / total as f64;
                }
                OutputDistribution::from_probs(m)
            })
    }

    proptest! {
        #[test]
        fn metric_and_bounds(a in arb_dist(6, 3), b in arb_dist(6, 3), c in arb_dist(6, 3)) {
            let (ab, plan) = emd(&a, &b).unwrap();
            let ba = emd(&b, &a).unwrap().0;
            let bc = emd(&b, &c).unwrap().0;
            let ac = emd(&a, &c).unwrap().0;
            prop_assert!(check_plan(&a, &b, &plan).ok(1e-9));
            prop_assert!((ab - ba).abs() < 1e-9);
            prop_assert!(ac <= ab + bc + 1e-9);
            prop_assert!(emd(&a, &a).unwrap().0.abs() < 1e-12);
            prop_assert!(inclusion_probability_lower_bound(&a, &b) <= ab + 1e-9);
            prop_assert!(ab <= 6.0 + 1e-9);
        }
    }
}
