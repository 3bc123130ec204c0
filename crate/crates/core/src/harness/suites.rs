//! Fixed reproduction suites, one per acceptance criterion.
//!
//! Every suite returns a CSV table and a list of pass/fail checks. Runtimes are
//! kept out of the CSV so reruns with the same seed are byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algorithms::{derive_seed, Rule};
use crate::distributions::{exact_output_distribution, Algorithm, OutputDistribution};
use crate::distsim::{barbosa_framework_trial, MpcConfig};
use crate::error::{Error, Result};
use crate::mask::SubsetMask;
use crate::oracle::{
    appendix_d_b_count, build_function, check_monotone_submodular, curvature, CheckMode, FunctionSpec, ValueOracle,
};
use crate::sensitivity::{
    bound_pa_pb, bound_prop_greedy_approx, bound_prop_greedy_sensitivity, bound_prop_greedy_sensitivity_lb,
    bound_randgreedy_lb, sensitivity_report, Mode, SensitivityOptions, SensitivityReport,
};
use crate::transport::{emd, inclusion_probability_lower_bound, sym_diff_cost};

pub const DEFAULT_SEED: u64 = 1;

/// Published suite metadata.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteInfo {
    pub id: &'static str,
    pub criterion: usize,
    pub title: &'static str,
    /// Instance sizes, fixed so each suite finishes in minutes on one core.
    pub caps: &'static str,
}

pub const SUITES: &[SuiteInfo] = &[
    SuiteInfo {
        id: "curvature",
        criterion: 1,
        title: "curvature of the bounded-curvature families equals the target",
        caps: "ground <= 13, c in {0.25, 0.5, 0.75, 1}",
    },
    SuiteInfo {
        id: "structure",
        criterion: 2,
        title: "every family is monotone submodular (exhaustive)",
        caps: "ground <= 12",
    },
    SuiteInfo {
        id: "det-greedy-lb",
        criterion: 3,
        title: "deterministic greedy has sensitivity >= k under curvature",
        caps: "k in {3, 5, 8}, exact",
    },
    SuiteInfo {
        id: "randgreedy-lb",
        criterion: 4,
        title: "randomized greedy EMD after deleting e1 meets 2k(1 - 2((k-1)/k)^k)",
        caps: "(n, k) in {(16, 3), (20, 4)}, exact",
    },
    SuiteInfo {
        id: "prop-lb",
        criterion: 5,
        title: "proportional rules have sensitivity close to 2k",
        caps: "n in {8, 12}, k = n/2, exact",
    },
    SuiteInfo {
        id: "prop-approx",
        criterion: 6,
        title: "proportional greedy approximation factor 1 - e^(-c/(1-c)) at k = cn",
        caps: "20 coverage instances, n = 10, k in {3, 5}, exact",
    },
    SuiteInfo {
        id: "prop-ub",
        criterion: 7,
        title: "proportional greedy sensitivity upper bound (1-sqrt(1-c))^2/c (k-1) + 2",
        caps: "every family, ground <= 12, k in {2, 5}, exact",
    },
    SuiteInfo {
        id: "prop-sens-lb",
        criterion: 8,
        title: "proportional greedy sensitivity lower-bound instance and p_A/p_B bounds",
        caps: "c = 3/4, k = 2, n in {12, 24} exact, n = 48 sampled (1e5 runs)",
    },
    SuiteInfo {
        id: "emd-solver",
        criterion: 9,
        title: "EMD solver against brute force, metric axioms, inclusion lower bound",
        caps: "100 instances up to 4x4, 100 triples",
    },
    SuiteInfo {
        id: "greedi-lb",
        criterion: 10,
        title: "GreeDi and the multi-round framework have Omega(k) sensitivity",
        caps: "k = 4, m = 8, n in {256, 1024, 4096}, 2000 runs; framework n = 1024, 1000 runs",
    },
    SuiteInfo {
        id: "avg-sens",
        criterion: 11,
        title: "average sensitivity grows like k^2/n",
        caps: "n in {12, 16, 20}, k = n/2, exact",
    },
];

pub fn find_suite(id: &str) -> Result<&'static SuiteInfo> {
    SUITES
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::UnknownSuite(id.to_string()))
}

/// One threshold comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub relation: &'static str,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Check {
        Check {
            name: name.into(),
            measured,
            relation: ">=",
            threshold,
            pass: measured >= threshold,
        }
    }

    fn above(name: impl Into<String>, measured: f64, threshold: f64) -> Check {
        Check {
            name: name.into(),
            measured,
            relation: ">",
            threshold,
            pass: measured > threshold,
        }
    }

    fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Check {
        Check {
            name: name.into(),
            measured,
            relation: "<=",
            threshold,
            pass: measured <= threshold,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {}: {} {} {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.relation,
            self.threshold
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutcome {
    pub id: &'static str,
    pub criterion: usize,
    pub checks: Vec<Check>,
    pub csv: String,
}

impl SuiteOutcome {
    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    /// Summary line plus one line per failing check (all checks if `verbose`).
    pub fn report(&self, verbose: bool) -> String {
        let mut out = String::new();
        let failed = self.failures().len();
        let _ = writeln!(
            out,
            "criterion {:>2} {:<14} {} ({}/{} checks pass)",
            self.criterion,
            self.id,
            if self.pass() { "PASS" } else { "FAIL" },
            self.checks.len() - failed,
            self.checks.len()
        );
        for c in &self.checks {
            if verbose || !c.pass {
                let _ = writeln!(out, "    {}", c.line());
            }
        }
        out
    }
}

struct Table {
    text: String,
}

impl Table {
    fn new(header: &str) -> Table {
        Table {
            text: format!("{header}\n"),
        }
    }

    fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }
}

macro_rules! fields {
    ($($x:expr),* $(,)?) => { vec![$($x.to_string()),*] };
}

fn params(spec: &FunctionSpec) -> String {
    spec.to_pairs()
        .into_iter()
        .skip(1)
        .map(|(k, v)| format!("{k}={}", v.replace(',', " ")))
        .collect::<Vec<_>>()
        .join(";")
}

fn exact_opts(deletions: Option<Vec<usize>>) -> SensitivityOptions {
    SensitivityOptions {
        deletions,
        ..SensitivityOptions::exact()
    }
}

fn report(spec: &FunctionSpec, alg: &Algorithm, k: usize, opts: &SensitivityOptions) -> Result<SensitivityReport> {
    sensitivity_report(alg, &build_function(spec)?, k, opts)
}

fn seq(rule: Rule) -> Algorithm {
    Algorithm::Sequential(rule)
}

pub fn run_suite(id: &str, seed: u64) -> Result<SuiteOutcome> {
    let info = find_suite(id)?;
    let (checks, csv) = match info.id {
        "curvature" => suite_curvature()?,
        "structure" => suite_structure()?,
        "det-greedy-lb" => suite_det_greedy()?,
        "randgreedy-lb" => suite_randgreedy()?,
        "prop-lb" => suite_prop_lb()?,
        "prop-approx" => suite_prop_approx(seed)?,
        "prop-ub" => suite_prop_ub()?,
        "prop-sens-lb" => suite_prop_sens_lb(seed)?,
        "emd-solver" => suite_emd(seed)?,
        "greedi-lb" => suite_greedi(seed)?,
        "avg-sens" => suite_avg()?,
        _ => unreachable!("suite table and dispatch agree"),
    };
    Ok(SuiteOutcome {
        id: info.id,
        criterion: info.criterion,
        checks,
        csv,
    })
}

type SuiteResult = Result<(Vec<Check>, String)>;

const C_GRID: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

fn suite_curvature() -> SuiteResult {
    let mut t = Table::new("family,params,target,measured,abs_error,pass");
    let mut checks = Vec::new();
    for &c in &C_GRID {
        let specs = [
            FunctionSpec::CurvatureDetLb { k: 5, c, big_c: None },
            FunctionSpec::CurvatureRandLb { k: 3, c, big_c: None },
            FunctionSpec::GreediLb { n: 16, c, big_c: None },
            FunctionSpec::AppendixDLb { n: 12, c, big_m: None },
        ];
        for spec in specs {
            let measured = curvature(&build_function(&spec)?)?;
            let err = (measured - c).abs();
            let ch = Check::at_most(format!("{} c={c} |curvature - c|", spec.family()), err, 1e-9);
            t.row(&fields![spec.family(), params(&spec), c, measured, err, ch.pass]);
            checks.push(ch);
        }
    }
    Ok((checks, t.text))
}

/// One representative instance per family, ground set at most 12.
fn structure_instances() -> Vec<FunctionSpec> {
    let mut v = vec![
        FunctionSpec::Modular {
            weights: vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0, 5.0, 8.0],
        },
        FunctionSpec::Coverage {
            n: 12,
            universe: 16,
            density: 0.25,
            modular_scale: 0.5,
            seed: 7,
        },
        FunctionSpec::PropLb { n: 12, k: 6, ratio: None },
        FunctionSpec::RandGreedyLb { n: 12, k: 3, big_c: None },
        FunctionSpec::LargeElement { n: 12, k: 3, eps: None },
        FunctionSpec::AvgPropLb { n: 12, k: 6, ratio: None },
        FunctionSpec::AvgRandGreedyLb { n: 12, k: 4, big_c: None },
    ];
    for &c in &[0.0, 0.5, 1.0] {
        v.extend([
            FunctionSpec::CurvatureDetLb { k: 5, c, big_c: None },
            FunctionSpec::CurvatureRandLb { k: 2, c, big_c: None },
            FunctionSpec::NearEquality {
                n: 12,
                c: c.min(0.75),
                pivot: 1,
                i_max: 5,
                eps: None,
            },
            FunctionSpec::GreediLb { n: 12, c, big_c: None },
            FunctionSpec::FrameworkLb {
                n: 12,
                k: 3,
                c,
                pivot: 1,
                big_c: None,
            },
            FunctionSpec::AppendixDLb { n: 11, c, big_m: None },
            FunctionSpec::AvgCurvatureLb {
                n: 12,
                k: 6,
                prefix: None,
                c,
                eps: None,
            },
            FunctionSpec::AvgGreediLb { n: 12, k: 4, c, big_c: None },
            FunctionSpec::AvgFrameworkLb { n: 12, k: 4, c, big_c: None },
        ]);
    }
    v
}

fn suite_structure() -> SuiteResult {
    let specs = structure_instances();
    let results: Vec<(FunctionSpec, usize, u64, u64)> = specs
        .into_par_iter()
        .map(|spec| {
            let f = build_function(&spec)?;
            let r = check_monotone_submodular(&f, CheckMode::Exhaustive)?;
            Ok((spec, f.n(), r.checked, r.violation_count))
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new("family,params,ground,checked,violations,pass");
    let mut checks = Vec::new();
    let mut seen = BTreeMap::new();
    for (spec, n, checked, viol) in results {
        t.row(&fields![spec.family(), params(&spec), n, checked, viol, viol == 0]);
        *seen.entry(spec.family()).or_insert(0) += 1;
        checks.push(Check::at_most(format!("{} [{}] violations", spec.family(), params(&spec)), viol as f64, 0.0));
    }
    for fam in crate::oracle::FAMILIES {
        checks.push(Check::at_least(format!("{fam} instances checked"), *seen.get(fam).unwrap_or(&0) as f64, 1.0));
    }
    Ok((checks, t.text))
}

fn suite_det_greedy() -> SuiteResult {
    let c = 0.5;
    let mut t = Table::new("k,c,worst_case,argmax,average,expected_2k,pass");
    let mut checks = Vec::new();
    for &k in &[3usize, 5, 8] {
        let spec = FunctionSpec::CurvatureDetLb { k, c, big_c: None };
        let r = report(&spec, &seq(Rule::Greedy), k, &exact_opts(None))?;
        let ch = Check::at_least(format!("k={k} worst case"), r.worst_case, k as f64);
        t.row(&fields![k, c, r.worst_case, r.argmax.map(|a| a as i64).unwrap_or(-1), r.average, 2 * k, ch.pass]);
        checks.push(ch);
    }
    Ok((checks, t.text))
}

fn suite_randgreedy() -> SuiteResult {
    let mut t = Table::new("n,k,emd_delete_e1,emd_fraction,bound,pass");
    let mut checks = Vec::new();
    for &(n, k) in &[(16usize, 3usize), (20, 4)] {
        let spec = FunctionSpec::RandGreedyLb { n, k, big_c: None };
        let r = report(&spec, &seq(Rule::RandomizedGreedy), k, &exact_opts(Some(vec![0])))?;
        let e1 = &r.per_element[0];
        let bound = bound_randgreedy_lb(k);
        let ch = Check::at_least(format!("n={n} k={k} EMD after deleting e1"), e1.emd, bound - 1e-9);
        let frac = e1.exact_emd.map(|(p, q)| format!("{p}/{q}")).unwrap_or_default();
        t.row(&fields![n, k, e1.emd, frac, bound, ch.pass]);
        checks.push(ch);
    }
    Ok((checks, t.text))
}

fn mass_within(d: &OutputDistribution, block: &SubsetMask) -> f64 {
    d.iter().filter(|(s, _)| s.is_subset(block)).map(|(_, p)| p).sum()
}

fn suite_prop_lb() -> SuiteResult {
    let mut t = Table::new("n,k,delta,pr_first_block,pr_second_block_without_e1,worst_case,threshold,pass");
    let mut checks = Vec::new();
    for &n in &[8usize, 12] {
        let k = n / 2;
        let spec = FunctionSpec::PropLb { n, k, ratio: None };
        let f = build_function(&spec)?;
        let alg = seq(Rule::Proportional);
        let delta = 1.0 / (8 * n * k) as f64;
        let first = SubsetMask::from_elements(0..n / 2);
        let second = SubsetMask::from_elements(n / 2..n);
        let p1 = mass_within(&exact_output_distribution(&alg, &f, k)?, &first);
        let p2 = mass_within(&exact_output_distribution(&alg, &f.restrict(0)?, k)?, &second);
        let r = sensitivity_report(&alg, &f, k, &exact_opts(None))?;
        let thr = 0.9 * 2.0 * k as f64;
        let cs = [
            Check::above(format!("n={n} Pr[output in first block]"), p1, 1.0 - delta),
            Check::above(format!("n={n} Pr[output in second block without e1]"), p2, 1.0 - k as f64 * delta),
            Check::at_least(format!("n={n} worst case"), r.worst_case, thr),
        ];
        let pass = cs.iter().all(|c| c.pass);
        t.row(&fields![n, k, delta, p1, p2, r.worst_case, thr, pass]);
        checks.extend(cs);
    }
    Ok((checks, t.text))
}

fn best_of_size(f: &ValueOracle, k: usize) -> f64 {
    let n = f.n();
    let mut best = 0.0f64;
    for bits in 0u64..(1 << n) {
        if bits.count_ones() as usize == k {
            best = best.max(f.value(&SubsetMask::from_u64(bits)));
        }
    }
    best
}

fn suite_prop_approx(seed: u64) -> SuiteResult {
    let n = 10;
    let cases: Vec<(u64, usize)> = (0..20u64).flat_map(|i| [(i, 3usize), (i, 5)]).collect();
    let rows: Vec<(FunctionSpec, usize, f64, f64, f64)> = cases
        .into_par_iter()
        .map(|(i, k)| {
            let spec = FunctionSpec::Coverage {
                n,
                universe: 15,
                density: 0.25,
                modular_scale: if i % 2 == 0 { 0.3 } else { 0.0 },
                seed: derive_seed(seed, &[6, i]),
            };
            let f = build_function(&spec)?;
            let d = exact_output_distribution(&seq(Rule::Proportional), &f, k)?;
            let expected: f64 = d.iter().map(|(s, p)| p * f.value(s)).sum();
            let opt = best_of_size(&f, k);
            let factor = bound_prop_greedy_approx(k as f64 / n as f64)?;
            Ok((spec, k, expected, opt, factor))
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new("instance,k,c,expected_value,opt,ratio,factor,pass");
    let mut checks = Vec::new();
    for (i, (spec, k, expected, opt, factor)) in rows.into_iter().enumerate() {
        let ch = Check::at_least(format!("instance {} k={k} expected value", i / 2), expected, factor * opt - 1e-9);
        t.row(&fields![
            params(&spec),
            k,
            k as f64 / n as f64,
            expected,
            opt,
            expected / opt,
            factor,
            ch.pass
        ]);
        checks.push(ch);
    }
    Ok((checks, t.text))
}

/// Instances for the upper-bound sweep: `(spec, k)` with ground at most 12.
fn prop_ub_instances() -> Vec<(FunctionSpec, usize)> {
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut v = Vec::new();
    for &k in &[2usize, 5] {
        v.push((
            FunctionSpec::Modular {
                weights: vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0, 5.0, 8.0],
            },
            k,
        ));
        v.push((
            FunctionSpec::Coverage {
                n: 12,
                universe: 16,
                density: 0.25,
                modular_scale: 0.5,
                seed: 7,
            },
            k,
        ));
        v.push((FunctionSpec::PropLb { n: 12, k, ratio: None }, k));
        v.push((FunctionSpec::RandGreedyLb { n: 12, k, big_c: None }, k));
        v.push((FunctionSpec::LargeElement { n: 12, k, eps: None }, k));
        v.push((FunctionSpec::AvgPropLb { n: 12, k, ratio: None }, k));
        v.push((FunctionSpec::AvgRandGreedyLb { n: 12, k, big_c: None }, k));
        for &c in &grid {
            v.push((FunctionSpec::CurvatureDetLb { k, c, big_c: None }, k));
            if k == 2 {
                v.push((FunctionSpec::CurvatureRandLb { k, c, big_c: None }, k));
            }
            v.push((
                FunctionSpec::NearEquality {
                    n: 12,
                    c,
                    pivot: if c < 1.0 { 1 } else { 0 },
                    i_max: 5,
                    eps: None,
                },
                k,
            ));
            v.push((FunctionSpec::GreediLb { n: 12, c, big_c: None }, k));
            v.push((
                FunctionSpec::FrameworkLb {
                    n: 12,
                    k,
                    c,
                    pivot: 0,
                    big_c: None,
                },
                k,
            ));
            v.push((FunctionSpec::AppendixDLb { n: 11, c, big_m: None }, k));
            v.push((
                FunctionSpec::AvgCurvatureLb {
                    n: 12,
                    k,
                    prefix: None,
                    c,
                    eps: None,
                },
                k,
            ));
            v.push((FunctionSpec::AvgGreediLb { n: 12, k, c, big_c: None }, k));
            v.push((FunctionSpec::AvgFrameworkLb { n: 12, k, c, big_c: None }, k));
        }
    }
    v
}

fn suite_prop_ub() -> SuiteResult {
    let rows: Vec<(FunctionSpec, usize, f64, SensitivityReport)> = prop_ub_instances()
        .into_par_iter()
        .map(|(spec, k)| {
            let f = build_function(&spec)?;
            let c = curvature(&f)?;
            let r = sensitivity_report(&seq(Rule::Proportional), &f, k, &exact_opts(None))?;
            Ok((spec, k, c, r))
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new("family,params,k,curvature,worst_case,argmax,bound,doubled_bound,pass");
    let mut checks = Vec::new();
    for (spec, k, c, r) in rows {
        // clamp rounding noise in the measured curvature
        let c = c.clamp(0.0, 1.0);
        let bound = bound_prop_greedy_sensitivity(c, k)?;
        let doubled = 2.0 * (bound - 2.0) + 2.0;
        let ch = Check::at_most(
            format!("{} [{}] k={k} c={c:.4} worst case", spec.family(), params(&spec)),
            r.worst_case,
            bound + 1e-6,
        );
        t.row(&fields![
            spec.family(),
            params(&spec),
            k,
            c,
            r.worst_case,
            r.argmax.map(|a| a as i64).unwrap_or(-1),
            bound,
            doubled,
            ch.pass
        ]);
        checks.push(ch);
    }
    Ok((checks, t.text))
}

fn suite_prop_sens_lb(seed: u64) -> SuiteResult {
    let (c, k) = (0.75, 2usize);
    let lb = bound_prop_greedy_sensitivity_lb(c, k)?;
    let alg = seq(Rule::Proportional);
    let mut checks = Vec::new();
    let mut t = Table::new("table,n,mode,value,reference,pass");
    let mut series = Vec::new();
    for &n in &[12usize, 24, 48] {
        let spec = FunctionSpec::AppendixDLb { n, c, big_m: None };
        let opts = if n <= 24 {
            exact_opts(None)
        } else {
            SensitivityOptions {
                mode: Mode::Sampled { trials: 100_000 },
                seed: derive_seed(seed, &[8, n as u64]),
                deletions: Some(vec![0, 1, n]),
                bootstrap: 0,
                ..Default::default()
            }
        };
        let r = report(&spec, &alg, k, &opts)?;
        let mode = if n <= 24 { "exact" } else { "sampled" };
        let ch = Check::at_least(format!("n={n} worst case vs 0.6 * lower bound"), r.worst_case, 0.6 * lb);
        t.row(&fields!["sensitivity", n, mode, r.worst_case, 0.6 * lb, ch.pass]);
        checks.push(ch);
        series.push((n, r.worst_case));
    }
    for w in series.windows(2) {
        checks.push(Check::at_least(format!("worst case n={} vs n={}", w[1].0, w[0].0), w[1].1, w[0].1));
    }
    for &n in &[12usize, 24] {
        let f = build_function(&FunctionSpec::AppendixDLb { n, c, big_m: None })?;
        let nb = appendix_d_b_count(n, c);
        let na = n - nb;
        let d = exact_output_distribution(&alg, &f.contract(&SubsetMask::from_elements([0])), k)?;
        let pa = (1..=na).map(|e| d.inclusion(e)).sum::<f64>() / na as f64;
        let pb = (na + 1..=n).map(|e| d.inclusion(e)).sum::<f64>() / nb as f64;
        let (pa_lb, pb_ub) = bound_pa_pb(k, n, c)?;
        let ca = Check::at_least(format!("n={n} p_A"), pa, pa_lb - 1e-12);
        let cb = Check::at_most(format!("n={n} p_B"), pb, pb_ub + 1e-12);
        t.row(&fields!["p_A", n, "exact", pa, pa_lb, ca.pass]);
        t.row(&fields!["p_B", n, "exact", pb, pb_ub, cb.pass]);
        t.row(&fields!["k/n", n, "exact", k as f64 / n as f64, "", ""]);
        checks.extend([ca, cb]);
    }
    Ok((checks, t.text))
}

/// Minimum cost over all basic feasible solutions of the transportation
/// problem: every set of `m + n - 1` cells that forms a spanning tree.
fn vertex_enumeration(a: &[(SubsetMask, f64)], b: &[(SubsetMask, f64)]) -> f64 {
    let (m, n) = (a.len(), b.len());
    let cells = m * n;
    let mut best = f64::INFINITY;
    for code in 0u32..(1 << cells) {
        if code.count_ones() as usize != m + n - 1 {
            continue;
        }
        let mut left: Vec<usize> = (0..cells).filter(|c| code >> c & 1 == 1).collect();
        let mut row: Vec<f64> = a.iter().map(|x| x.1).collect();
        let mut col: Vec<f64> = b.iter().map(|x| x.1).collect();
        let mut flow = vec![0.0; cells];
        let mut tree = true;
        while !left.is_empty() {
            // peel a row or column that touches exactly one remaining cell
            let leaf = (0..m + n).find_map(|node| {
                let mut it = left
                    .iter()
                    .filter(|&&c| if node < m { c / n == node } else { c % n == node - m });
                match (it.next(), it.next()) {
                    (Some(&c), None) => Some((node, c)),
                    _ => None,
                }
            });
            let Some((node, c)) = leaf else {
                tree = false;
                break;
            };
            let (i, j) = (c / n, c % n);
            let x = if node < m { row[i] } else { col[j] };
            flow[c] = x;
            row[i] -= x;
            col[j] -= x;
            left.retain(|&d| d != c);
        }
        if !tree || row.iter().chain(&col).any(|r| r.abs() > 1e-12) || flow.iter().any(|&x| x < -1e-12) {
            continue;
        }
        let cost: f64 = (0..cells)
            .map(|c| flow[c] * sym_diff_cost(&a[c / n].0, &b[c % n].0) as f64)
            .sum();
        best = best.min(cost);
    }
    best
}

fn random_support(rng: &mut ChaCha8Rng, universe: usize, max_support: usize) -> Vec<(SubsetMask, f64)> {
    let size = rng.gen_range(1..=max_support);
    let mut w: BTreeMap<SubsetMask, u32> = BTreeMap::new();
    while w.len() < size {
        w.insert(SubsetMask::from_u64(rng.gen_range(0..1u64 << universe)), rng.gen_range(1..10));
    }
    let total: u32 = w.values().sum();
    w.into_iter().map(|(s, x)| (s, x as f64 / total as f64)).collect()
}

fn as_dist(side: &[(SubsetMask, f64)]) -> OutputDistribution {
    OutputDistribution::from_probs(side.iter().cloned().collect())
}

fn suite_emd(seed: u64) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[9]));
    let mut t = Table::new("kind,instance,value,reference,pass");
    let mut worst_brute = 0.0f64;
    let mut worst_lb = f64::NEG_INFINITY;
    let mut worst_tri = f64::NEG_INFINITY;
    let mut worst_sym = 0.0f64;
    let mut worst_self = 0.0f64;
    let mut min_distinct = f64::INFINITY;
    for i in 0..100 {
        let a = random_support(&mut rng, 6, 4);
        let b = random_support(&mut rng, 6, 4);
        let (da, db) = (as_dist(&a), as_dist(&b));
        let v = emd(&da, &db)?.0;
        let brute = vertex_enumeration(&a, &b);
        let lb = inclusion_probability_lower_bound(&da, &db);
        worst_brute = worst_brute.max((v - brute).abs());
        worst_lb = worst_lb.max(lb - v);
        t.row(&fields!["brute_force", i, v, brute, (v - brute).abs() <= 1e-9]);
        t.row(&fields!["inclusion_lb", i, v, lb, lb <= v + 1e-9]);
    }
    for i in 0..100 {
        let [a, b, c] = [0, 1, 2].map(|_| as_dist(&random_support(&mut rng, 8, 6)));
        let ab = emd(&a, &b)?.0;
        let ba = emd(&b, &a)?.0;
        let bc = emd(&b, &c)?.0;
        let ac = emd(&a, &c)?.0;
        let aa = emd(&a, &a)?.0;
        worst_tri = worst_tri.max(ac - ab - bc);
        worst_sym = worst_sym.max((ab - ba).abs());
        worst_self = worst_self.max(aa.abs());
        if a.probs != b.probs {
            min_distinct = min_distinct.min(ab);
        }
        t.row(&fields!["triangle", i, ac, ab + bc, ac <= ab + bc + 1e-9]);
        t.row(&fields!["symmetry", i, ab, ba, (ab - ba).abs() <= 1e-9]);
    }
    let checks = vec![
        Check::at_most("max |solver - vertex enumeration|", worst_brute, 1e-9),
        Check::at_most("max (inclusion lower bound - EMD)", worst_lb, 1e-9),
        Check::at_most("max (d(a,c) - d(a,b) - d(b,c))", worst_tri, 1e-9),
        Check::at_most("max |d(a,b) - d(b,a)|", worst_sym, 1e-9),
        Check::at_most("max d(a,a)", worst_self, 1e-12),
        Check::above("min d(a,b) over distinct a, b", min_distinct, 0.0),
    ];
    Ok((checks, t.text))
}

fn suite_greedi(seed: u64) -> SuiteResult {
    let k = 4;
    let machines = 8;
    let trials = 2000;
    let mut t = Table::new("kind,n,k,runs,value,threshold,pass");
    let mut checks = Vec::new();
    let mut series = Vec::new();
    for &n in &[256usize, 1024, 4096] {
        let spec = FunctionSpec::GreediLb { n, c: 1.0, big_c: None };
        let opts = SensitivityOptions {
            mode: Mode::Sampled { trials },
            seed: derive_seed(seed, &[10, n as u64]),
            deletions: Some(vec![0]),
            bootstrap: 0,
            ..Default::default()
        };
        let r = report(&spec, &Algorithm::Greedi { machines }, k, &opts)?;
        t.row(&fields!["greedi_emd_delete_e1", n, k, trials, r.worst_case, 0.8 * k as f64, r.worst_case >= 0.8 * k as f64]);
        series.push((n, r.worst_case));
    }
    let (n_max, v_max) = *series.last().expect("non-empty sweep");
    checks.push(Check::at_least(format!("GreeDi n={n_max} sensitivity"), v_max, 0.8 * k as f64));
    for w in series.windows(2) {
        checks.push(Check::at_least(format!("GreeDi n={} vs n={}", w[1].0, w[0].0), w[1].1, w[0].1));
    }

    let n = 1024;
    let runs = 1000u64;
    let f = build_function(&FunctionSpec::FrameworkLb {
        n,
        k,
        c: 1.0,
        pivot: 0,
        big_c: None,
    })?;
    let cfg = MpcConfig::single(2, machines, 3);
    let large = SubsetMask::from_elements(0..k);
    let base = Rule::Greedy;
    let fw_seed = derive_seed(seed, &[10, 0xf]);
    let hits: Vec<bool> = (0..runs)
        .into_par_iter()
        .map(|trial| {
            let (_, trace) = barbosa_framework_trial(&f, k, &cfg, &base, fw_seed, trial)?;
            Ok(large.is_subset(&trace.pools[0]))
        })
        .collect::<Result<_>>()?;
    let frac = hits.iter().filter(|&&h| h).count() as f64 / runs as f64;
    let ch = Check::at_least("framework: C_1 holds every large element (fraction of runs)", frac, 0.99);
    t.row(&fields!["framework_pool_fraction", n, k, runs, frac, 0.99, ch.pass]);
    checks.push(ch);
    Ok((checks, t.text))
}

fn suite_avg() -> SuiteResult {
    let c = 0.5;
    let rows: Vec<(usize, usize, SensitivityReport)> = [12usize, 16, 20]
        .into_par_iter()
        .map(|n| {
            let k = n / 2;
            let spec = FunctionSpec::AvgCurvatureLb {
                n,
                k,
                prefix: None,
                c,
                eps: None,
            };
            Ok((n, k, report(&spec, &seq(Rule::Greedy), k, &exact_opts(None))?))
        })
        .collect::<Result<_>>()?;
    // least-squares slope through the origin of average against k^2/n
    let xs: Vec<f64> = rows.iter().map(|(n, k, _)| (k * k) as f64 / *n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.2.average).collect();
    let beta = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>() / xs.iter().map(|x| x * x).sum::<f64>();
    let mut checks = vec![Check::above("fitted beta", beta, 0.0)];
    let mut t = Table::new("n,k,k2_over_n,average,worst_case,fit,pass");
    for ((n, k, r), x) in rows.iter().zip(&xs) {
        let fit = beta * x;
        let a = Check::at_least(format!("n={n} average vs beta/2 * k^2/n"), r.average, 0.5 * fit);
        let w = Check::at_least(format!("n={n} worst case vs average"), r.worst_case, r.average);
        t.row(&fields![n, k, x, r.average, r.worst_case, fit, a.pass && w.pass]);
        checks.extend([a, w]);
    }
    Ok((checks, t.text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite() {
        assert!(matches!(run_suite("nope", 1), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn suite_ids_are_unique_and_cover_criteria() {
        let ids: std::collections::BTreeSet<_> = SUITES.iter().map(|s| s.id).collect();
        assert_eq!(ids.len(), SUITES.len());
        let crits: Vec<usize> = SUITES.iter().map(|s| s.criterion).collect();
        assert_eq!(crits, (1..=11).collect::<Vec<_>>());
    }

    #[test]
    fn vertex_enumeration_point_masses() {
        let a = vec![(SubsetMask::from_u64(0b011), 1.0)];
        let b = vec![(SubsetMask::from_u64(0b110), 1.0)];
        assert_eq!(vertex_enumeration(&a, &b), 2.0);
        let a = vec![(SubsetMask::from_u64(0b1), 0.5), (SubsetMask::from_u64(0b10), 0.5)];
        let b = vec![(SubsetMask::from_u64(0b10), 0.5), (SubsetMask::from_u64(0b1), 0.5)];
        assert_eq!(vertex_enumeration(&a, &b), 0.0);
    }

    #[test]
    fn curvature_suite_passes() {
        let out = run_suite("curvature", DEFAULT_SEED).unwrap();
        assert!(out.pass(), "{}", out.report(true));
    }
}
