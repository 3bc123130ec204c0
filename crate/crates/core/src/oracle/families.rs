//! The adversarial function families and their plain-text form.
//!
//! Element ids are 0-based: the construction's `e_1` is id 0.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mask::SubsetMask;

use super::{Coverage, Gate, GatedModular, SetFunction, ValueOracle};

/// A function family plus its parameters. `None` fields take the defaults
/// documented on [`FunctionSpec::resolved`].
#[derive(Clone, Debug, PartialEq)]
pub enum FunctionSpec {
    Modular {
        weights: Vec<f64>,
    },
    /// Random weighted coverage mixed with a modular term.
    Coverage {
        n: usize,
        universe: usize,
        density: f64,
        modular_scale: f64,
        seed: u64,
    },
    PropLb {
        n: usize,
        k: usize,
        ratio: Option<f64>,
    },
    RandGreedyLb {
        n: usize,
        k: usize,
        big_c: Option<f64>,
    },
    CurvatureDetLb {
        k: usize,
        c: f64,
        big_c: Option<f64>,
    },
    CurvatureRandLb {
        k: usize,
        c: f64,
        big_c: Option<f64>,
    },
    LargeElement {
        n: usize,
        k: usize,
        eps: Option<f64>,
    },
    NearEquality {
        n: usize,
        c: f64,
        pivot: usize,
        i_max: usize,
        eps: Option<f64>,
    },
    GreediLb {
        n: usize,
        c: f64,
        big_c: Option<f64>,
    },
    FrameworkLb {
        n: usize,
        k: usize,
        c: f64,
        pivot: usize,
        big_c: Option<f64>,
    },
    AppendixDLb {
        n: usize,
        c: f64,
        big_m: Option<f64>,
    },
    AvgPropLb {
        n: usize,
        k: usize,
        ratio: Option<f64>,
    },
    AvgRandGreedyLb {
        n: usize,
        k: usize,
        big_c: Option<f64>,
    },
    AvgCurvatureLb {
        n: usize,
        k: usize,
        prefix: Option<usize>,
        c: f64,
        eps: Option<f64>,
    },
    AvgGreediLb {
        n: usize,
        k: usize,
        c: f64,
        big_c: Option<f64>,
    },
    AvgFrameworkLb {
        n: usize,
        k: usize,
        c: f64,
        big_c: Option<f64>,
    },
}

pub const FAMILIES: &[&str] = &[
    "modular",
    "coverage",
    "prop_lb",
    "randgreedy_lb",
    "curvature_det_lb",
    "curvature_rand_lb",
    "large_element",
    "near_equality",
    "greedi_lb",
    "framework_lb",
    "appendixD_lb",
    "avg_prop_lb",
    "avg_randgreedy_lb",
    "avg_curvature_lb",
    "avg_greedi_lb",
    "avg_framework_lb",
];

fn half_up(k: usize) -> usize {
    (k + 1) / 2
}

/// `(1 - sqrt(1 - c)) / c`, with its limit 1/2 at `c = 0`.
pub fn appendix_d_alpha(c: f64) -> f64 {
    if c == 0.0 {
        0.5
    } else {
        (1.0 - (1.0 - c).sqrt()) / c
    }
}

/// Size of the B block: `αn` rounded to the nearest integer.
pub fn appendix_d_b_count(n: usize, c: f64) -> usize {
    (appendix_d_alpha(c) * n as f64).round() as usize
}

impl FunctionSpec {
    pub fn family(&self) -> &'static str {
        match self {
            FunctionSpec::Modular { .. } => "modular",
            FunctionSpec::Coverage { .. } => "coverage",
            FunctionSpec::PropLb { .. } => "prop_lb",
            FunctionSpec::RandGreedyLb { .. } => "randgreedy_lb",
            FunctionSpec::CurvatureDetLb { .. } => "curvature_det_lb",
            FunctionSpec::CurvatureRandLb { .. } => "curvature_rand_lb",
            FunctionSpec::LargeElement { .. } => "large_element",
            FunctionSpec::NearEquality { .. } => "near_equality",
            FunctionSpec::GreediLb { .. } => "greedi_lb",
            FunctionSpec::FrameworkLb { .. } => "framework_lb",
            FunctionSpec::AppendixDLb { .. } => "appendixD_lb",
            FunctionSpec::AvgPropLb { .. } => "avg_prop_lb",
            FunctionSpec::AvgRandGreedyLb { .. } => "avg_randgreedy_lb",
            FunctionSpec::AvgCurvatureLb { .. } => "avg_curvature_lb",
            FunctionSpec::AvgGreediLb { .. } => "avg_greedi_lb",
            FunctionSpec::AvgFrameworkLb { .. } => "avg_framework_lb",
        }
    }

    /// Size of the ground set the family builds.
    pub fn ground_size(&self) -> usize {
        match *self {
            FunctionSpec::Modular { ref weights } => weights.len(),
            FunctionSpec::CurvatureDetLb { k, .. } => 2 * k + 1,
            FunctionSpec::CurvatureRandLb { k, .. } => 4 * k + 1,
            FunctionSpec::AppendixDLb { n, .. } => n + 1,
            FunctionSpec::Coverage { n, .. }
            | FunctionSpec::PropLb { n, .. }
            | FunctionSpec::RandGreedyLb { n, .. }
            | FunctionSpec::LargeElement { n, .. }
            | FunctionSpec::NearEquality { n, .. }
            | FunctionSpec::GreediLb { n, .. }
            | FunctionSpec::FrameworkLb { n, .. }
            | FunctionSpec::AvgPropLb { n, .. }
            | FunctionSpec::AvgRandGreedyLb { n, .. }
            | FunctionSpec::AvgCurvatureLb { n, .. }
            | FunctionSpec::AvgGreediLb { n, .. }
            | FunctionSpec::AvgFrameworkLb { n, .. } => n,
        }
    }

    /// Target curvature parameter, when the family has one.
    pub fn curvature_param(&self) -> Option<f64> {
        match *self {
            FunctionSpec::CurvatureDetLb { c, .. }
            | FunctionSpec::CurvatureRandLb { c, .. }
            | FunctionSpec::NearEquality { c, .. }
            | FunctionSpec::GreediLb { c, .. }
            | FunctionSpec::FrameworkLb { c, .. }
            | FunctionSpec::AppendixDLb { c, .. }
            | FunctionSpec::AvgCurvatureLb { c, .. }
            | FunctionSpec::AvgGreediLb { c, .. }
            | FunctionSpec::AvgFrameworkLb { c, .. } => Some(c),
            _ => None,
        }
    }

    /// Fills every `None` with its default:
    ///
    /// * `big_c` (a "large constant"): `16 · ground_size`.
    /// * `big_m`: `n³`.
    /// * `ratio` (step between cascade levels): `16 · n · k`.
    /// * `eps`: `1 / (4n)`.
    /// * `prefix` (size of the indicator set): `⌈k/2⌉`.
    pub fn resolved(&self) -> FunctionSpec {
        let g = self.ground_size() as f64;
        let big = |v: Option<f64>| Some(v.unwrap_or(16.0 * g));
        let eps = |v: Option<f64>, n: usize| Some(v.unwrap_or(1.0 / (4.0 * n as f64)));
        let ratio = |v: Option<f64>, n: usize, k: usize| Some(v.unwrap_or(16.0 * (n * k) as f64));
        let mut s = self.clone();
        match &mut s {
            FunctionSpec::PropLb { n, k, ratio: r } | FunctionSpec::AvgPropLb { n, k, ratio: r } => {
                *r = ratio(*r, *n, *k)
            }
            FunctionSpec::RandGreedyLb { big_c, .. }
            | FunctionSpec::CurvatureDetLb { big_c, .. }
            | FunctionSpec::CurvatureRandLb { big_c, .. }
            | FunctionSpec::GreediLb { big_c, .. }
            | FunctionSpec::FrameworkLb { big_c, .. }
            | FunctionSpec::AvgRandGreedyLb { big_c, .. }
            | FunctionSpec::AvgGreediLb { big_c, .. }
            | FunctionSpec::AvgFrameworkLb { big_c, .. } => *big_c = big(*big_c),
            FunctionSpec::LargeElement { n, eps: e, .. } | FunctionSpec::NearEquality { n, eps: e, .. } => {
                *e = eps(*e, *n)
            }
            FunctionSpec::AvgCurvatureLb { n, k, prefix, eps: e, .. } => {
                *e = eps(*e, *n);
                *prefix = Some(prefix.unwrap_or(half_up(*k)));
            }
            FunctionSpec::AppendixDLb { n, big_m, .. } => {
                *big_m = Some(big_m.unwrap_or((*n as f64).powi(3)))
            }
            FunctionSpec::Modular { .. } | FunctionSpec::Coverage { .. } => {}
        }
        s
    }

    /// Serializes as `key = value` lines, `family` first.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.to_pairs() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mut p: Vec<(&'static str, String)> = vec![("family", self.family().to_string())];
        let mut put = |k: &'static str, v: String| p.push((k, v));
        let opt = |v: &Option<f64>| v.map(|x| x.to_string());
        match self {
            FunctionSpec::Modular { weights } => put(
                "weights",
                weights.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(","),
            ),
            FunctionSpec::Coverage {
                n,
                universe,
                density,
                modular_scale,
                seed,
            } => {
                put("n", n.to_string());
                put("universe", universe.to_string());
                put("density", density.to_string());
                put("modular_scale", modular_scale.to_string());
                put("seed", seed.to_string());
            }
            FunctionSpec::PropLb { n, k, ratio } | FunctionSpec::AvgPropLb { n, k, ratio } => {
                put("n", n.to_string());
                put("k", k.to_string());
                if let Some(r) = opt(ratio) {
                    put("ratio", r);
                }
            }
            FunctionSpec::RandGreedyLb { n, k, big_c } | FunctionSpec::AvgRandGreedyLb { n, k, big_c } => {
                put("n", n.to_string());
                put("k", k.to_string());
                if let Some(v) = opt(big_c) {
                    put("big_c", v);
                }
            }
            FunctionSpec::CurvatureDetLb { k, c, big_c } | FunctionSpec::CurvatureRandLb { k, c, big_c } => {
                put("k", k.to_string());
                put("c", c.to_string());
                if let Some(v) = opt(big_c) {
                    put("big_c", v);
                }
            }
            FunctionSpec::LargeElement { n, k, eps } => {
                put("n", n.to_string());
                put("k", k.to_string());
                if let Some(v) = opt(eps) {
                    put("eps", v);
                }
            }
            FunctionSpec::NearEquality {
                n,
                c,
                pivot,
                i_max,
                eps,
            } => {
                put("n", n.to_string());
                put("c", c.to_string());
                put("pivot", pivot.to_string());
                put("i_max", i_max.to_string());
                if let Some(v) = opt(eps) {
                    put("eps", v);
                }
            }
            FunctionSpec::GreediLb { n, c, big_c } => {
                put("n", n.to_string());
                put("c", c.to_string());
                if let Some(v) = opt(big_c) {
                    put("big_c", v);
                }
            }
            FunctionSpec::FrameworkLb { n, k, c, pivot, big_c } => {
                put("n", n.to_string());
                put("k", k.to_string());
                put("c", c.to_string());
                put("pivot", pivot.to_string());
                if let Some(v) = opt(big_c) {
                    put("big_c", v);
                }
            }
            FunctionSpec::AppendixDLb { n, c, big_m } => {
                put("n", n.to_string());
                put("c", c.to_string());
                if let Some(v) = opt(big_m) {
                    put("big_m", v);
                }
            }
            FunctionSpec::AvgCurvatureLb { n, k, prefix, c, eps } => {
                put("n", n.to_string());
                put("k", k.to_string());
                put("c", c.to_string());
                if let Some(m) = prefix {
                    put("prefix", m.to_string());
                }
                if let Some(v) = opt(eps) {
                    put("eps", v);
                }
            }
            FunctionSpec::AvgGreediLb { n, k, c, big_c } | FunctionSpec::AvgFrameworkLb { n, k, c, big_c } => {
                put("n", n.to_string());
                put("k", k.to_string());
                put("c", c.to_string());
                if let Some(v) = opt(big_c) {
                    put("big_c", v);
                }
            }
        }
        p
    }

    /// Parses the `key = value` map produced by [`FunctionSpec::to_config`].
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<FunctionSpec> {
        let get = |k: &str| -> Result<&str> {
            map.get(k)
                .map(|s| s.as_str())
                .ok_or_else(|| Error::ConfigParse(format!("missing key `{k}`")))
        };
        let usize_of = |k: &str| -> Result<usize> {
            get(k)?
                .parse()
                .map_err(|_| Error::ConfigParse(format!("`{k}` is not an integer")))
        };
        let f64_of = |k: &str| -> Result<f64> {
            get(k)?
                .parse()
                .map_err(|_| Error::ConfigParse(format!("`{k}` is not a number")))
        };
        let opt_f64 = |k: &str| -> Result<Option<f64>> {
            match map.get(k) {
                None => Ok(None),
                Some(_) => f64_of(k).map(Some),
            }
        };
        let family = get("family")?;
        Ok(match family {
            "modular" => FunctionSpec::Modular {
                weights: get("weights")?
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse()
                            .map_err(|_| Error::ConfigParse(format!("bad weight `{s}`")))
                    })
                    .collect::<Result<_>>()?,
            },
            "coverage" => FunctionSpec::Coverage {
                n: usize_of("n")?,
                universe: usize_of("universe")?,
                density: f64_of("density")?,
                modular_scale: f64_of("modular_scale")?,
                seed: get("seed")?
                    .parse()
                    .map_err(|_| Error::ConfigParse("`seed` is not an integer".into()))?,
            },
            "prop_lb" => FunctionSpec::PropLb {
                n: usize_of("n")?,
                k: usize_of("k")?,
                ratio: opt_f64("ratio")?,
            },
            "avg_prop_lb" => FunctionSpec::AvgPropLb {
                n: usize_of("n")?,
                k: usize_of("k")?,
                ratio: opt_f64("ratio")?,
            },
            "randgreedy_lb" => FunctionSpec::RandGreedyLb {
                n: usize_of("n")?,
                k: usize_of("k")?,
                big_c: opt_f64("big_c")?,
            },
            "avg_randgreedy_lb" => FunctionSpec::AvgRandGreedyLb {
                n: usize_of("n")?,
                k: usize_of("k")?,
                big_c: opt_f64("big_c")?,
            },
            "curvature_det_lb" => FunctionSpec::CurvatureDetLb {
                k: usize_of("k")?,
                c: f64_of("c")?,
                big_c: opt_f64("big_c")?,
            },
            "curvature_rand_lb" => FunctionSpec::CurvatureRandLb {
                k: usize_of("k")?,
                c: f64_of("c")?,
                big_c: opt_f64("big_c")?,
            },
            "large_element" => FunctionSpec::LargeElement {
                n: usize_of("n")?,
                k: usize_of("k")?,
                eps: opt_f64("eps")?,
            },
            "near_equality" => FunctionSpec::NearEquality {
                n: usize_of("n")?,
                c: f64_of("c")?,
                pivot: usize_of("pivot")?,
                i_max: usize_of("i_max")?,
                eps: opt_f64("eps")?,
            },
            "greedi_lb" => FunctionSpec::GreediLb {
                n: usize_of("n")?,
                c: f64_of("c")?,
                big_c: opt_f64("big_c")?,
            },
            "framework_lb" => FunctionSpec::FrameworkLb {
                n: usize_of("n")?,
                k: usize_of("k")?,
                c: f64_of("c")?,
                pivot: if map.contains_key("pivot") { usize_of("pivot")? } else { 0 },
                big_c: opt_f64("big_c")?,
            },
            "appendixD_lb" => FunctionSpec::AppendixDLb {
                n: usize_of("n")?,
                c: f64_of("c")?,
                big_m: opt_f64("big_m")?,
            },
            "avg_curvature_lb" => FunctionSpec::AvgCurvatureLb {
                n: usize_of("n")?,
                k: usize_of("k")?,
                prefix: if map.contains_key("prefix") { Some(usize_of("prefix")?) } else { None },
                c: f64_of("c")?,
                eps: opt_f64("eps")?,
            },
            "avg_greedi_lb" => FunctionSpec::AvgGreediLb {
                n: usize_of("n")?,
                k: usize_of("k")?,
                c: f64_of("c")?,
                big_c: opt_f64("big_c")?,
            },
            "avg_framework_lb" => FunctionSpec::AvgFrameworkLb {
                n: usize_of("n")?,
                k: usize_of("k")?,
                c: f64_of("c")?,
                big_c: opt_f64("big_c")?,
            },
            other => return Err(Error::UnknownFamily(other.to_string())),
        })
    }

    /// Parses standalone `key = value` text (blank lines and `#` comments allowed).
    pub fn from_config(text: &str) -> Result<FunctionSpec> {
        let mut map = BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::ConfigParse(format!("expected `key = value`, got `{line}`")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Self::from_map(&map)
    }
}

struct Builder {
    weights: Vec<f64>,
    gates: Vec<Gate>,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder {
            weights: vec![0.0; n],
            gates: Vec::new(),
        }
    }

    fn set(&mut self, ids: std::ops::Range<usize>, w: f64) {
        for i in ids {
            self.weights[i] = w;
        }
    }

    fn gate(&mut self, members: SubsetMask, block: std::ops::Range<usize>, drop: impl Fn(usize) -> f64) {
        let mut drops = vec![0.0; self.weights.len()];
        for i in block {
            drops[i] = drop(i);
        }
        self.gates.push(Gate::new(members, drops));
    }

    fn finish(self) -> GatedModular {
        GatedModular::new(self.weights, self.gates)
    }
}

fn need(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InconsistentDimensions(msg()))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveScale(format!("{name} = {v}")))
    }
}

fn check_c(c: f64) -> Result<()> {
    if (0.0..=1.0).contains(&c) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("curvature c = {c} outside [0, 1]")))
    }
}

fn floor(name: &str, v: f64, min: f64) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} below its floor {min}")))
    }
}

fn prefix(m: usize) -> SubsetMask {
    SubsetMask::full(m)
}

/// Builds the oracle for `spec`. Missing scale constants take the defaults
/// from [`FunctionSpec::resolved`].
pub fn build_function(spec: &FunctionSpec) -> Result<ValueOracle> {
    let func = build_set_function(&spec.resolved())?;
    let oracle = ValueOracle::new(func);
    debug_assert_eq!(oracle.value(&SubsetMask::empty()), 0.0);
    Ok(oracle)
}

fn build_set_function(spec: &FunctionSpec) -> Result<Arc<dyn SetFunction>> {
    let n = spec.ground_size();
    if n == 0 {
        return Err(Error::InconsistentDimensions("empty ground set".into()));
    }
    let gm = |b: Builder| -> Result<Arc<dyn SetFunction>> { Ok(Arc::new(b.finish())) };
    match *spec {
        FunctionSpec::Modular { ref weights } => {
            if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
                return Err(Error::NonPositiveScale(format!("weight {w}")));
            }
            Ok(Arc::new(GatedModular::new(weights.clone(), Vec::new())))
        }
        FunctionSpec::Coverage {
            n,
            universe,
            density,
            modular_scale,
            seed,
        } => {
            need(universe >= 1, || "coverage universe must be non-empty".into())?;
            if !(0.0..=1.0).contains(&density) {
                return Err(Error::InvalidParameter(format!("density {density}")));
            }
            if !(modular_scale >= 0.0 && modular_scale.is_finite()) {
                return Err(Error::NonPositiveScale(format!("modular_scale = {modular_scale}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let items: Vec<f64> = (0..universe).map(|_| rng.gen_range(0.5..1.5)).collect();
            let mut covers = Vec::with_capacity(n);
            let mut modular = Vec::with_capacity(n);
            for _ in 0..n {
                let mut c: Vec<usize> = (0..universe).filter(|_| rng.gen::<f64>() < density).collect();
                if c.is_empty() {
                    c.push(rng.gen_range(0..universe));
                }
                covers.push(c);
                modular.push(modular_scale * rng.gen::<f64>());
            }
            Ok(Arc::new(Coverage::new(items, covers, modular)))
        }
        FunctionSpec::PropLb { n, ratio, .. } => {
            let r = ratio.expect("resolved");
            need(n >= 4 && n % 2 == 0, || format!("prop_lb needs even n >= 4, got {n}"))?;
            floor("ratio", r, 1.0)?;
            let half = n / 2;
            let mut b = Builder::new(n);
            // ids 1..half carry the unit weight; B weights cascade upward from id n-1
            b.set(1..half, 1.0);
            let mut below = (half - 1) as f64;
            for i in (half..n).rev() {
                b.weights[i] = r * below;
                below += b.weights[i];
            }
            b.weights[0] = r * below;
            let bw = b.weights.clone();
            b.gate(prefix(1), half..n, |i| bw[i]);
            gm(b)
        }
        FunctionSpec::AvgPropLb { n, k, ratio } => {
            let r = ratio.expect("resolved");
            need(k >= 2 && n >= k + 2, || format!("avg_prop_lb needs k >= 2 and n >= k + 2 (n = {n}, k = {k})"))?;
            floor("ratio", r, 1.0)?;
            let h = half_up(k);
            let mut b = Builder::new(n);
            // cascade, smallest first: C block h..=k, then B block k+1..n, then A block 0..h
            let mut below = 0.0;
            for i in (h..=k).rev() {
                b.weights[i] = if below == 0.0 { 1.0 } else { r * below };
                below += b.weights[i];
            }
            for i in (k + 1..n).rev().chain((0..h).rev()) {
                b.weights[i] = r * below;
                below += b.weights[i];
            }
            let bw = b.weights.clone();
            b.gate(prefix(h), k + 1..n, |i| bw[i]);
            gm(b)
        }
        FunctionSpec::RandGreedyLb { n, k, big_c } => {
            let c = big_c.expect("resolved");
            need(k >= 1 && n >= 2 * k + 2, || format!("randgreedy_lb needs n >= 2k + 2 (n = {n}, k = {k})"))?;
            positive("big_c", c)?;
            floor("big_c", c, (2 * k) as f64)?;
            let mut b = Builder::new(n);
            b.weights[0] = c;
            b.set(1..2 * k + 1, 1.0);
            b.set(2 * k + 1..n, 0.5);
            b.gate(prefix(1), 1..2 * k + 1, |_| 1.0);
            gm(b)
        }
        FunctionSpec::AvgRandGreedyLb { n, k, big_c } => {
            let c = big_c.expect("resolved");
            need(k >= 2 && n >= 2 * k + 2, || format!("avg_randgreedy_lb needs n >= 2k + 2 (n = {n}, k = {k})"))?;
            positive("big_c", c)?;
            let h = half_up(k);
            floor("big_c", c, (2 * k + 1 - h) as f64)?;
            let mut b = Builder::new(n);
            b.set(0..h, c);
            b.set(h..2 * k + 1, 1.0);
            b.set(2 * k + 1..n, 0.5);
            b.gate(prefix(h), h..2 * k + 1, |_| 1.0);
            gm(b)
        }
        FunctionSpec::CurvatureDetLb { k, c, big_c } => {
            let big = big_c.expect("resolved");
            check_c(c)?;
            need(k >= 1, || "k must be positive".into())?;
            positive("big_c", big)?;
            floor("big_c", big, k as f64)?;
            let mut b = Builder::new(2 * k + 1);
            b.weights[0] = big;
            b.set(1..k + 1, 1.0);
            b.set(k + 1..2 * k + 1, 1.0 - c / 2.0);
            b.gate(prefix(1), 1..k + 1, |_| c);
            gm(b)
        }
        FunctionSpec::CurvatureRandLb { k, c, big_c } => {
            let big = big_c.expect("resolved");
            check_c(c)?;
            need(k >= 1, || "k must be positive".into())?;
            positive("big_c", big)?;
            floor("big_c", big, (2 * k) as f64)?;
            let mut b = Builder::new(4 * k + 1);
            b.weights[0] = big;
            b.set(1..2 * k + 1, 1.0);
            b.set(2 * k + 1..4 * k + 1, 1.0 - c / 2.0);
            b.gate(prefix(1), 1..2 * k + 1, |_| c);
            gm(b)
        }
        FunctionSpec::LargeElement { n, k, eps } => {
            let eps = eps.expect("resolved");
            need(k >= 1 && k <= n, || format!("large_element needs 1 <= k <= n (n = {n}, k = {k})"))?;
            positive("eps", eps)?;
            let mut b = Builder::new(n);
            b.set(0..k, 1.0);
            b.set(k..n, eps);
            gm(b)
        }
        FunctionSpec::NearEquality {
            n,
            c,
            pivot,
            i_max,
            eps,
        } => {
            let eps = eps.expect("resolved");
            check_c(c)?;
            positive("eps", eps)?;
            need(pivot <= i_max, || format!("pivot {pivot} beyond i_max {i_max}"))?;
            need(n >= 2 * i_max + 1, || format!("near_equality needs n >= 2 i_max + 1 (n = {n}, i_max = {i_max})"))?;
            let drop = c * pivot as f64 + eps * (i_max - pivot) as f64;
            if drop > 1.0 {
                return Err(Error::NonMonotone(format!(
                    "pivot marginal 1 - {drop} < 0; need c·pivot + eps·(i_max - pivot) <= 1"
                )));
            }
            let mut b = Builder::new(n);
            b.set(0..pivot + 1, 1.0);
            b.set(pivot + 1..i_max + 1, 1.0 - c + eps);
            b.set(i_max + 1..2 * i_max + 1, 1.0 - c + eps / 2.0);
            b.set(2 * i_max + 1..n, eps);
            let members = SubsetMask::from_elements([pivot]);
            b.gate(members, 0..i_max + 1, |i| {
                if i < pivot {
                    c
                } else if i > pivot {
                    eps
                } else {
                    0.0
                }
            });
            gm(b)
        }
        FunctionSpec::GreediLb { n, c, big_c } => {
            let big = big_c.expect("resolved");
            check_c(c)?;
            need(n >= 4, || format!("greedi_lb needs n >= 4, got {n}"))?;
            positive("big_c", big)?;
            let half = n / 2;
            floor("big_c", big, (half - 1) as f64)?;
            let mut b = Builder::new(n);
            b.weights[0] = big;
            b.set(1..half, 1.0);
            b.set(half..n, 1.0 - c / 2.0);
            b.gate(prefix(1), 1..half, |_| c);
            gm(b)
        }
        FunctionSpec::FrameworkLb { n, k, c, pivot, big_c } => {
            let big = big_c.expect("resolved");
            check_c(c)?;
            need(pivot < k && 2 * k < n, || format!("framework_lb needs pivot < k and 2k < n (n = {n}, k = {k}, pivot = {pivot})"))?;
            positive("big_c", big)?;
            let half = n / 2;
            floor("big_c", big, half as f64)?;
            let mut b = Builder::new(n);
            b.set(0..k, big);
            b.set(k..half, 1.0);
            b.set(half..n, 1.0 - c / 2.0);
            b.gate(SubsetMask::from_elements([pivot]), k..half, |_| c);
            gm(b)
        }
        FunctionSpec::AppendixDLb { n, c, big_m } => {
            let m = big_m.expect("resolved");
            check_c(c)?;
            need(n >= 2, || format!("appendixD_lb needs n >= 2, got {n}"))?;
            positive("big_m", m)?;
            let nb = appendix_d_b_count(n, c);
            floor("big_m", m, nb as f64)?;
            let na = n - nb;
            // id 0 is e*, ids 1..=na form A, the rest B
            let mut b = Builder::new(n + 1);
            b.weights[0] = m;
            b.set(1..n + 1, 1.0);
            b.gate(prefix(1), na + 1..n + 1, |_| c);
            gm(b)
        }
        FunctionSpec::AvgCurvatureLb {
            n,
            k,
            prefix: m,
            c,
            eps,
        } => {
            let m = m.expect("resolved");
            let eps = eps.expect("resolved");
            check_c(c)?;
            positive("eps", eps)?;
            need(m >= 1 && m < k, || format!("prefix {m} must lie in 1..k (k = {k})"))?;
            let mid = k - m + 1;
            let low = k - m;
            need(n >= m + mid + low, || format!("avg_curvature_lb needs n >= 2k - prefix + 1 = {}", m + mid + low))?;
            if eps * mid as f64 > 1.0 {
                return Err(Error::NonMonotone(format!("eps·{mid} > 1")));
            }
            let mut b = Builder::new(n);
            b.set(0..m, 1.0);
            b.set(m..m + mid, 1.0 - c + eps);
            b.set(m + mid..m + mid + low, 1.0 - c + eps / 2.0);
            b.set(m + mid + low..n, eps);
            b.gate(prefix(m), m..m + mid, |_| eps);
            gm(b)
        }
        FunctionSpec::AvgGreediLb { n, k, c, big_c } => {
            let big = big_c.expect("resolved");
            check_c(c)?;
            let h = half_up(k);
            need(k >= 2 && n > h + k, || format!("avg_greedi_lb needs n > ⌈k/2⌉ + k (n = {n}, k = {k})"))?;
            positive("big_c", big)?;
            floor("big_c", big, k as f64)?;
            let mut b = Builder::new(n);
            b.set(0..h, big);
            b.set(h..h + k, 1.0);
            b.set(h + k..n, 1.0 - c / 2.0);
            b.gate(prefix(h), h..h + k, |_| c);
            gm(b)
        }
        FunctionSpec::AvgFrameworkLb { n, k, c, big_c } => {
            let big = big_c.expect("resolved");
            check_c(c)?;
            let h = half_up(k);
            need(k >= 2 && n > k + h, || format!("avg_framework_lb needs n > k + ⌈k/2⌉ (n = {n}, k = {k})"))?;
            positive("big_c", big)?;
            floor("big_c", big, h as f64)?;
            let mut b = Builder::new(n);
            b.set(0..k, big);
            b.set(k..k + h, 1.0);
            b.set(k + h..n, 1.0 - c / 2.0);
            b.gate(prefix(h), k..k + h, |_| c);
            gm(b)
        }
    }
}
