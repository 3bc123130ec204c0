//! The experiment config: flat `key = value` lines under `[section]` headers.
//!
//! ```text
//! [function]
//! family = curvature_det_lb
//! c = 0.5
//!
//! [algorithm]
//! name = greedy
//!
//! [experiment]
//! k = 3, 5, 8
//! mode = exact
//! ```
//!
//! Sections: `function` (the family keys), `algorithm`, `schedule` (raw
//! ordinal schedule lines) and `experiment`. In `experiment`, `n`, `k` and `c`
//! take comma-separated sweep lists.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::algorithms::{OrdinalSchedule, Rule};
use crate::distributions::{Algorithm, ExactOptions};
use crate::distsim::{MpcConfig, DEFAULT_EPS};
use crate::error::{Error, Result};
use crate::oracle::FunctionSpec;
use crate::sensitivity::{Mode, SensitivityOptions};

#[derive(Clone, Debug, PartialEq)]
pub enum ModeSpec {
    Exact,
    Sampled,
    Auto,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Raw `[function]` keys; sweep values are substituted per point.
    pub function: BTreeMap<String, String>,
    pub algorithm: Algorithm,
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub c: Vec<f64>,
    pub mode: ModeSpec,
    pub seed: Option<u64>,
    pub trials: u64,
    pub bootstrap: usize,
    pub deletions: Option<Vec<usize>>,
    pub exact: ExactOptions,
    pub output: Option<PathBuf>,
    pub suite: Option<String>,
}

/// One point of the sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub spec: FunctionSpec,
    pub k: usize,
}

fn parse_sections(text: &str) -> Result<BTreeMap<String, Vec<(usize, String)>>> {
    let mut out: BTreeMap<String, Vec<(usize, String)>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !["function", "algorithm", "schedule", "experiment"].contains(&name.as_str()) {
                return Err(Error::ConfigParse(format!("line {}: unknown section [{name}]", no + 1)));
            }
            out.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let sec = current
            .as_ref()
            .ok_or_else(|| Error::ConfigParse(format!("line {}: entry outside any section", no + 1)))?;
        out.get_mut(sec).expect("section exists").push((no + 1, line.to_string()));
    }
    Ok(out)
}

fn key_values(lines: &[(usize, String)]) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, line) in lines {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::ConfigParse(format!("line {no}: expected `key = value`, got `{line}`")))?;
        if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(Error::ConfigParse(format!("line {no}: duplicate key `{}`", k.trim())));
        }
    }
    Ok(map)
}

pub(crate) fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::ConfigParse(format!("`{key}`: cannot parse `{v}`")))
}

pub(crate) fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    let items: Vec<T> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::ConfigParse(format!("`{key}`: empty sweep list")));
    }
    Ok(items)
}

fn parse_rule(name: &str, schedule: Option<&str>) -> Result<Rule> {
    Ok(match name {
        "greedy" => Rule::Greedy,
        "randgreedy" => Rule::RandomizedGreedy,
        "proportional" => Rule::Proportional,
        "ordinal" => {
            let text = schedule.ok_or_else(|| Error::ConfigParse("ordinal rule needs a schedule".into()))?;
            if text.trim() == "proportional" {
                return Ok(Rule::Proportional);
            }
            Rule::Ordinal(OrdinalSchedule::parse(text)?)
        }
        other => return Err(Error::ConfigParse(format!("unknown algorithm `{other}`"))),
    })
}

/// Builds the algorithm from the `[algorithm]` keys and `[schedule]` lines.
pub fn parse_algorithm(map: &BTreeMap<String, String>, schedule_lines: Option<&str>) -> Result<Algorithm> {
    let name = map
        .get("name")
        .ok_or_else(|| Error::ConfigParse("[algorithm] needs `name`".into()))?;
    let schedule = map.get("schedule").map(String::as_str).or(schedule_lines);
    let get = |k: &str| map.get(k).map(String::as_str);
    match name.as_str() {
        "greedi" => Ok(Algorithm::Greedi {
            machines: parse_num("machines", get("machines").unwrap_or("2"))?,
        }),
        "framework" => {
            let machines = parse_num("machines", get("machines").unwrap_or("2"))?;
            let eps = get("eps").map(|v| parse_num("eps", v)).transpose()?.unwrap_or(DEFAULT_EPS);
            let alpha = get("alpha")
                .map(|v| parse_num("alpha", v))
                .transpose()?
                .unwrap_or(1.0 - (-1.0f64).exp());
            let mut cfg = MpcConfig::new(machines, eps, alpha);
            if let Some(v) = get("groups") {
                cfg.groups = parse_num("groups", v)?;
            }
            if let Some(v) = get("rounds") {
                cfg.rounds = parse_num("rounds", v)?;
            }
            if let Some(v) = get("capacity") {
                cfg.capacity = Some(parse_num("capacity", v)?);
            }
            if let Some(v) = get("strict") {
                cfg.strict = parse_num("strict", v)?;
            }
            let base = parse_rule(get("base").unwrap_or("greedy"), schedule)?;
            Ok(Algorithm::Framework { cfg, base })
        }
        other => Ok(Algorithm::Sequential(parse_rule(other, schedule)?)),
    }
}

/// True when repeated runs can differ, so a seed is required.
pub fn is_randomized(alg: &Algorithm) -> bool {
    match alg {
        Algorithm::Sequential(r) => !r.is_deterministic(),
        Algorithm::Greedi { .. } | Algorithm::Framework { .. } => true,
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let sections = parse_sections(text)?;
        let function = key_values(sections.get("function").map(Vec::as_slice).unwrap_or(&[]))?;
        if !function.contains_key("family") {
            return Err(Error::ConfigParse("[function] needs `family`".into()));
        }
        let alg_map = key_values(sections.get("algorithm").map(Vec::as_slice).unwrap_or(&[]))?;
        let schedule = sections
            .get("schedule")
            .map(|l| l.iter().map(|(_, s)| s.as_str()).collect::<Vec<_>>().join("\n"));
        let algorithm = parse_algorithm(&alg_map, schedule.as_deref())?;
        let exp = key_values(sections.get("experiment").map(Vec::as_slice).unwrap_or(&[]))?;
        for key in exp.keys() {
            if ![
                "n", "k", "c", "mode", "seed", "trials", "bootstrap", "deletions", "node_budget", "p_min", "output",
                "suite",
            ]
            .contains(&key.as_str())
            {
                return Err(Error::ConfigParse(format!("[experiment]: unknown key `{key}`")));
            }
        }
        let list_or = |key: &str, fallback: Option<&String>| -> Result<Vec<usize>> {
            match exp.get(key).or(fallback) {
                Some(v) => parse_list(key, v),
                None => Err(Error::ConfigParse(format!("`{key}` missing from [experiment] and [function]"))),
            }
        };
        let n = if exp.contains_key("n") || function.contains_key("n") {
            list_or("n", function.get("n"))?
        } else {
            Vec::new()
        };
        let k = list_or("k", function.get("k"))?;
        let c = match exp.get("c").or(function.get("c")) {
            Some(v) => parse_list("c", v)?,
            None => Vec::new(),
        };
        let mode = match exp.get("mode").map(String::as_str).unwrap_or("exact") {
            "exact" => ModeSpec::Exact,
            "sampled" => ModeSpec::Sampled,
            "auto" => ModeSpec::Auto,
            other => return Err(Error::ConfigParse(format!("unknown mode `{other}`"))),
        };
        let seed = exp.get("seed").map(|v| parse_num("seed", v)).transpose()?;
        if seed.is_none() && is_randomized(&algorithm) && mode != ModeSpec::Exact {
            return Err(Error::ConfigParse("`seed` is required for randomized sampled runs".into()));
        }
        let mut exact = ExactOptions::default();
        if let Some(v) = exp.get("node_budget") {
            exact.node_budget = parse_num("node_budget", v)?;
        }
        if let Some(v) = exp.get("p_min") {
            exact.p_min = parse_num("p_min", v)?;
        }
        Ok(ExperimentConfig {
            function,
            algorithm,
            n,
            k,
            c,
            mode,
            seed,
            trials: exp.get("trials").map(|v| parse_num("trials", v)).transpose()?.unwrap_or(10_000),
            bootstrap: exp.get("bootstrap").map(|v| parse_num("bootstrap", v)).transpose()?.unwrap_or(200),
            deletions: exp.get("deletions").map(|v| parse_list("deletions", v)).transpose()?,
            exact,
            output: exp.get("output").map(PathBuf::from),
            suite: exp.get("suite").cloned(),
        })
    }

    /// Sweep points in config order: `n` outermost, then `k`, then `c`.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        let ns: Vec<Option<usize>> = if self.n.is_empty() { vec![None] } else { self.n.iter().map(|&v| Some(v)).collect() };
        let cs: Vec<Option<f64>> = if self.c.is_empty() { vec![None] } else { self.c.iter().map(|&v| Some(v)).collect() };
        let mut out = Vec::new();
        for n in &ns {
            for &k in &self.k {
                for c in &cs {
                    let mut map = self.function.clone();
                    if let Some(n) = n {
                        map.insert("n".into(), n.to_string());
                    }
                    if let Some(c) = c {
                        map.insert("c".into(), c.to_string());
                    }
                    map.insert("k".into(), k.to_string());
                    out.push(SweepPoint {
                        spec: FunctionSpec::from_map(&map)?,
                        k,
                    });
                }
            }
        }
        Ok(out)
    }

    pub fn sensitivity_options(&self) -> SensitivityOptions {
        let mode = match self.mode {
            ModeSpec::Exact => Mode::Exact(self.exact),
            ModeSpec::Sampled => Mode::Sampled { trials: self.trials },
            ModeSpec::Auto => Mode::Auto {
                exact: self.exact,
                trials: self.trials,
            },
        };
        SensitivityOptions {
            mode,
            seed: self.seed.unwrap_or(0),
            deletions: self.deletions.clone(),
            bootstrap: self.bootstrap,
            ..Default::default()
        }
    }
}
