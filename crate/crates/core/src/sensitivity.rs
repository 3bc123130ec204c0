//! Worst-case and average sensitivity, plus the closed-form bounds they are
//! compared against.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::algorithms::{derive_seed, step_rng};
use crate::distributions::{
    exact_output_distribution_with, sampled_output_distribution, Algorithm, ExactOptions, OutputDistribution,
};
use crate::error::{Error, Result};
use crate::oracle::ValueOracle;
use crate::transport::{emd_with, inclusion_probability_lower_bound, EmdOptions};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    Exact(ExactOptions),
    Sampled { trials: u64 },
    /// Exact when the enumeration budget admits it, sampled otherwise.
    Auto { exact: ExactOptions, trials: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SensitivityOptions {
    pub mode: Mode,
    pub seed: u64,
    /// Elements to delete; `None` means the whole ground set.
    pub deletions: Option<Vec<usize>>,
    /// Bootstrap resamples for sampled mode; 0 disables.
    pub bootstrap: usize,
    pub emd: EmdOptions,
}

impl Default for SensitivityOptions {
    fn default() -> Self {
        SensitivityOptions {
            mode: Mode::Auto {
                exact: ExactOptions::default(),
                trials: 10_000,
            },
            seed: 0,
            deletions: None,
            bootstrap: 200,
            emd: EmdOptions::default(),
        }
    }
}

impl SensitivityOptions {
    pub fn exact() -> Self {
        SensitivityOptions {
            mode: Mode::Exact(ExactOptions::default()),
            ..Default::default()
        }
    }

    pub fn sampled(trials: u64, seed: u64) -> Self {
        SensitivityOptions {
            mode: Mode::Sampled { trials },
            seed,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeUsed {
    Exact,
    Sampled { trials: u64 },
}

impl ModeUsed {
    fn label(&self) -> &'static str {
        match self {
            ModeUsed::Exact => "exact",
            ModeUsed::Sampled { .. } => "sampled",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementSensitivity {
    pub element: usize,
    pub emd: f64,
    /// Inclusion-probability lower bound on the same pair.
    pub lower_bound: f64,
    pub mode: ModeUsed,
    /// Reduced fraction, when both sides are empirical.
    pub exact_emd: Option<(u128, u128)>,
    /// Bootstrap 95% half-width, sampled mode only.
    pub half_width: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub name: String,
    pub value: f64,
    /// Upper bound on the worst case (`true`) or lower bound (`false`).
    pub upper: bool,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SensitivityReport {
    pub algorithm: String,
    pub k: usize,
    pub per_element: Vec<ElementSensitivity>,
    pub worst_case: f64,
    pub argmax: Option<usize>,
    pub average: f64,
    /// True when every ground element was deleted; otherwise the worst case is
    /// a lower bound and the average is over the deleted subset only.
    pub complete: bool,
    pub base_mode: ModeUsed,
    pub bounds: Vec<BoundCheck>,
    pub notes: Vec<String>,
}

impl SensitivityReport {
    /// Checks `worst_case ≤ value + tol`.
    pub fn attach_upper(&mut self, name: &str, value: f64, tol: f64) -> bool {
        let pass = self.worst_case <= value + tol;
        self.bounds.push(BoundCheck {
            name: name.to_string(),
            value,
            upper: true,
            tolerance: tol,
            pass,
        });
        pass
    }

    /// Checks `worst_case ≥ value - tol`.
    pub fn attach_lower(&mut self, name: &str, value: f64, tol: f64) -> bool {
        let pass = self.worst_case >= value - tol;
        self.bounds.push(BoundCheck {
            name: name.to_string(),
            value,
            upper: false,
            tolerance: tol,
            pass,
        });
        pass
    }

    pub fn pass(&self) -> bool {
        self.bounds.iter().all(|b| b.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("deleted_element,emd,mode,trials\n");
        for e in &self.per_element {
            let trials = match e.mode {
                ModeUsed::Exact => String::new(),
                ModeUsed::Sampled { trials } => trials.to_string(),
            };
            let _ = writeln!(out, "{},{},{},{}", e.element, e.emd, e.mode.label(), trials);
        }
        let first = |upper: bool| {
            self.bounds
                .iter()
                .find(|b| b.upper == upper)
                .map(|b| b.value.to_string())
                .unwrap_or_default()
        };
        out.push('\n');
        out.push_str("worst_case,average,bound_ub,bound_lb,pass\n");
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            self.worst_case,
            self.average,
            first(true),
            first(false),
            self.pass()
        );
        out
    }
}

fn distribution(
    alg: &Algorithm,
    oracle: &ValueOracle,
    k: usize,
    mode: Mode,
    seed: u64,
) -> Result<(OutputDistribution, ModeUsed)> {
    match mode {
        Mode::Exact(opts) => Ok((exact_output_distribution_with(alg, oracle, k, opts)?, ModeUsed::Exact)),
        Mode::Sampled { trials } => Ok((
            sampled_output_distribution(alg, oracle, k, trials, seed)?,
            ModeUsed::Sampled { trials },
        )),
        Mode::Auto { exact, trials } => match exact_output_distribution_with(alg, oracle, k, exact) {
            Err(Error::NodeBudgetExceeded(_)) => distribution(alg, oracle, k, Mode::Sampled { trials }, seed),
            other => Ok((other?, ModeUsed::Exact)),
        },
    }
}

fn resample(d: &OutputDistribution, trials: u64, seed: u64, rep: u64) -> OutputDistribution {
    let sets: Vec<_> = d.counts.keys().cloned().collect();
    let mut cum = Vec::with_capacity(sets.len());
    let mut acc = 0u64;
    for c in d.counts.values() {
        acc += c;
        cum.push(acc);
    }
    let mut rng = step_rng(seed, rep, 0);
    let mut counts = std::collections::BTreeMap::new();
    for _ in 0..trials {
        let u = rng.gen_range(0..acc);
        let i = cum.partition_point(|&c| c <= u);
        *counts.entry(sets[i].clone()).or_insert(0u64) += 1;
    }
    OutputDistribution::from_counts(counts)
}

fn bootstrap_half_width(
    a: &OutputDistribution,
    b: &OutputDistribution,
    reps: usize,
    seed: u64,
    emd: EmdOptions,
) -> Result<f64> {
    let (ta, tb) = (a.counts.values().sum::<u64>(), b.counts.values().sum::<u64>());
    let mut vals: Vec<f64> = (0..reps as u64)
        .map(|r| {
            let ra = resample(a, ta, derive_seed(seed, &[1]), r);
            let rb = resample(b, tb, derive_seed(seed, &[2]), r);
            emd_with(&ra, &rb, emd).map(|x| x.0)
        })
        .collect::<Result<_>>()?;
    vals.sort_by(f64::total_cmp);
    let q = |p: f64| vals[((vals.len() - 1) as f64 * p).round() as usize];
    Ok((q(0.975) - q(0.025)) / 2.0)
}

/// Per-element EMDs between `A(f)` and `A(f^{∖e})`, aggregated as both the
/// worst case and the average.
pub fn sensitivity_report(
    alg: &Algorithm,
    oracle: &ValueOracle,
    k: usize,
    opts: &SensitivityOptions,
) -> Result<SensitivityReport> {
    let (base, base_mode) = distribution(alg, oracle, k, opts.mode, opts.seed)?;
    let deletions: Vec<usize> = match &opts.deletions {
        Some(d) => {
            for &e in d {
                if !oracle.ground().contains(e) {
                    return Err(Error::InvalidElement(e));
                }
            }
            d.clone()
        }
        None => oracle.id_map(),
    };
    let complete = deletions.len() == oracle.n();
    let per_element: Vec<ElementSensitivity> = deletions
        .par_iter()
        .map(|&e| {
            let restricted = oracle.restrict(e)?;
            let mode = match base_mode {
                ModeUsed::Exact => match opts.mode {
                    Mode::Exact(x) | Mode::Auto { exact: x, .. } => Mode::Exact(x),
                    m => m,
                },
                ModeUsed::Sampled { trials } => Mode::Sampled { trials },
            };
            let (d, mode_used) = distribution(alg, &restricted, k, mode, derive_seed(opts.seed, &[e as u64 + 1]))?;
            let (v, plan) = emd_with(&base, &d, opts.emd)?;
            let half_width = match mode_used {
                ModeUsed::Sampled { .. } if opts.bootstrap > 0 => Some(bootstrap_half_width(
                    &base,
                    &d,
                    opts.bootstrap,
                    derive_seed(opts.seed, &[e as u64, 0xb007]),
                    opts.emd,
                )?),
                _ => None,
            };
            Ok(ElementSensitivity {
                element: e,
                emd: v,
                lower_bound: inclusion_probability_lower_bound(&base, &d),
                mode: mode_used,
                exact_emd: plan.exact_cost,
                half_width,
            })
        })
        .collect::<Result<_>>()?;
    let mut worst_case = 0.0;
    let mut argmax = None;
    for r in &per_element {
        if argmax.is_none() || r.emd > worst_case {
            worst_case = r.emd;
            argmax = Some(r.element);
        }
    }
    let average = if per_element.is_empty() {
        0.0
    } else {
        per_element.iter().map(|r| r.emd).sum::<f64>() / per_element.len() as f64
    };
    let mut notes = Vec::new();
    if !complete {
        notes.push(format!(
            "{} of {} elements deleted; worst case is a lower bound",
            per_element.len(),
            oracle.n()
        ));
    }
    Ok(SensitivityReport {
        algorithm: alg.name(),
        k,
        per_element,
        worst_case,
        argmax,
        average,
        complete,
        base_mode,
        bounds: Vec::new(),
        notes,
    })
}

pub fn worst_case_sensitivity(
    alg: &Algorithm,
    oracle: &ValueOracle,
    k: usize,
    opts: &SensitivityOptions,
) -> Result<SensitivityReport> {
    sensitivity_report(alg, oracle, k, opts)
}

pub fn average_sensitivity(
    alg: &Algorithm,
    oracle: &ValueOracle,
    k: usize,
    opts: &SensitivityOptions,
) -> Result<SensitivityReport> {
    sensitivity_report(alg, oracle, k, opts)
}

fn check_unit(c: f64) -> Result<()> {
    if (0.0..=1.0).contains(&c) {
        Ok(())
    } else {
        Err(Error::DomainError(format!("c = {c} outside [0, 1]")))
    }
}

/// `(1 - √(1-c))² / c`, with its limit 0 at `c = 0`.
fn prop_constant(c: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        (1.0 - (1.0 - c).sqrt()).powi(2) / c
    }
}

/// Upper bound on the sensitivity of proportional greedy:
/// `(1 - √(1-c))²/c · (k-1) + 2`.
pub fn bound_prop_greedy_sensitivity(c: f64, k: usize) -> Result<f64> {
    check_unit(c)?;
    Ok(prop_constant(c) * (k as f64 - 1.0) + 2.0)
}

/// Lower bound `(1 - √(1-c))²/c · k` (the ε-free limit).
pub fn bound_prop_greedy_sensitivity_lb(c: f64, k: usize) -> Result<f64> {
    check_unit(c)?;
    if c == 0.0 {
        return Err(Error::DomainError("lower bound undefined at c = 0".into()));
    }
    Ok(prop_constant(c) * k as f64)
}

/// Approximation ratio `1 - e^{-c/(1-c)}` of proportional greedy.
pub fn bound_prop_greedy_approx(c: f64) -> Result<f64> {
    check_unit(c)?;
    if c == 1.0 {
        return Err(Error::DomainError("ratio undefined at c = 1 (limit 1)".into()));
    }
    Ok(1.0 - (-c / (1.0 - c)).exp())
}

/// `2k (1 - 2((k-1)/k)^k)`.
pub fn bound_randgreedy_lb(k: usize) -> f64 {
    let kf = k as f64;
    2.0 * kf * (1.0 - 2.0 * ((kf - 1.0) / kf).powi(k as i32))
}

/// `D = (1-α)n + (1-c)αn` with `α = (1 - √(1-c))/c`.
pub fn appendix_d_denominator(n: usize, c: f64) -> f64 {
    let a = crate::oracle::appendix_d_alpha(c);
    let nf = n as f64;
    (1.0 - a) * nf + (1.0 - c) * a * nf
}

/// `(p_A lower bound, p_B upper bound)`:
/// `p_A ≥ k/D · (1 - (k-1)/(2(D-k)))`, `p_B ≤ (1-c)k/(D-k)`.
pub fn bound_pa_pb(k: usize, n: usize, c: f64) -> Result<(f64, f64)> {
    check_unit(c)?;
    let d = appendix_d_denominator(n, c);
    let kf = k as f64;
    if d <= kf {
        return Err(Error::DegenerateD { d, k });
    }
    let pa = kf / d * (1.0 - (kf - 1.0) / (2.0 * (d - kf)));
    let pb = (1.0 - c) * kf / (d - kf);
    Ok((pa, pb))
}
