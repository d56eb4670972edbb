//! `key = value` configuration files.
//!
//! Later sources override earlier ones: defaults, then the file, then the
//! `PML_SEED` environment variable, then command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::cases::{Method, Scale, TestCase, TestCaseId};
use crate::kde::{BandwidthMethod, SpreadRule, Summation};
use crate::models::BetaSpec;
use crate::particle::Interaction;
use crate::relaxation::{Grid1D, RkTableau};
use crate::{Error, Result};

pub const SEED_ENV: &str = "PML_SEED";
pub const DEFAULT_SEED: u64 = 1;

const RUN_KEYS: &[&str] = &["case", "scale", "methods", "seed", "out"];
const CASE_KEYS: &[&str] = &[
    "n_particles",
    "dt_prob",
    "dt_det",
    "horizon",
    "a",
    "b",
    "dx",
    "u_c",
    "m",
    "phi_at_jump",
    "k",
    "phi",
    "tableau",
    "bandwidth",
    "spread",
    "summation",
    "tol",
    "max_iter",
    "bandwidth_stride",
    "interaction",
    "snapshot_times",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value', got '{line}'", no + 1)))?;
            let key = k.trim().to_ascii_lowercase();
            if !RUN_KEYS.contains(&key.as_str()) && !CASE_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("line {}: unknown key '{key}'", no + 1)));
            }
            entries.insert(key, v.trim().to_owned());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_owned(), value.into());
    }

    fn value<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| Error::Config(format!("bad value for {key}: '{v}'"))))
            .transpose()
    }

    /// Overrides the fields of `tc` named in the file.
    pub fn apply(&self, tc: &mut TestCase) -> Result<()> {
        if let Some(n) = self.value("n_particles")? {
            tc.n_particles = n;
        }
        if let Some(v) = self.value("dt_prob")? {
            tc.dt_prob = v;
        }
        if let Some(v) = self.value("dt_det")? {
            tc.dt_det = v;
        }
        if let Some(v) = self.value("horizon")? {
            tc.horizon = v;
            if self.get("snapshot_times").is_none() {
                tc.snapshot_times.retain(|&t| t <= v);
                if tc.snapshot_times.last() != Some(&v) {
                    tc.snapshot_times.push(v);
                }
            }
        }
        let a = self.value("a")?.unwrap_or(tc.grid.a);
        let b = self.value("b")?.unwrap_or(tc.grid.b);
        let dx = self.value("dx")?.unwrap_or(tc.grid.dx());
        if self.get("a").is_some() || self.get("b").is_some() || self.get("dx").is_some() {
            tc.grid = Grid1D::with_spacing(a, b, dx)?;
        }
        match (self.value::<f64>("u_c")?, self.value::<f64>("m")?) {
            (Some(_), Some(_)) => return Err(Error::Config("set either u_c or m, not both".into())),
            (Some(u_c), None) => tc.beta = BetaSpec::heaviside(u_c)?,
            (None, Some(m)) => tc.beta = BetaSpec::power_law(m)?,
            (None, None) => {}
        }
        if let Some(v) = self.value("phi_at_jump")? {
            tc.beta = tc.beta.clone().with_phi_at_jump(v)?;
        }
        if let Some(v) = self.value("k")? {
            tc.k = v;
        }
        if let Some(v) = self.value("phi")? {
            tc.phi = v;
        }
        if let Some(v) = self.get("tableau") {
            tc.tableau = RkTableau::by_name(v)?;
        }
        if let Some(v) = self.get("bandwidth") {
            tc.bandwidth.method = match v.to_ascii_lowercase().as_str() {
                "silverman" => BandwidthMethod::Silverman,
                "solve-the-equation" | "ste" => BandwidthMethod::SolveTheEquation,
                other => return Err(Error::Config(format!("unknown bandwidth method '{other}'"))),
            };
        }
        if let Some(v) = self.get("spread") {
            tc.bandwidth.spread = match v.to_ascii_lowercase().as_str() {
                "std" | "stddev" => SpreadRule::StdDev,
                "robust" => SpreadRule::Robust,
                other => return Err(Error::Config(format!("unknown spread rule '{other}'"))),
            };
        }
        if let Some(v) = self.get("summation") {
            tc.bandwidth.summation = match parse_kind(v)? {
                ("auto", None) => Summation::Auto,
                ("exact", None) => Summation::Exact,
                ("binned", bins) => Summation::Binned { bins: bins.unwrap_or(crate::kde::DEFAULT_BINS) },
                _ => return Err(Error::Config(format!("unknown summation '{v}'"))),
            };
        }
        if let Some(v) = self.value("tol")? {
            tc.bandwidth.tol = v;
        }
        if let Some(v) = self.value("max_iter")? {
            tc.bandwidth.max_iter = v;
        }
        if let Some(v) = self.value("bandwidth_stride")? {
            tc.bandwidth_stride = v;
        }
        if let Some(v) = self.get("interaction") {
            tc.interaction = match parse_kind(v)? {
                ("auto", None) => Interaction::Auto,
                ("exact", None) => Interaction::Exact,
                ("truncated", None) => Interaction::Truncated,
                ("binned", bins) => Interaction::Binned { bins: bins.unwrap_or(crate::kde::DEFAULT_BINS) },
                _ => return Err(Error::Config(format!("unknown interaction '{v}'"))),
            };
        }
        if let Some(v) = self.get("snapshot_times") {
            tc.snapshot_times = v
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad snapshot time '{s}'"))))
                .collect::<Result<_>>()?;
        }
        Ok(())
    }
}

/// `name` or `name:count`.
fn parse_kind(v: &str) -> Result<(&str, Option<usize>)> {
    match v.split_once(':') {
        None => Ok((v.trim(), None)),
        Some((name, n)) => {
            let n = n.trim().parse().map_err(|_| Error::Config(format!("bad count in '{v}'")))?;
            Ok((name.trim(), Some(n)))
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSettings {
    pub case: TestCase,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub out: PathBuf,
}

/// Merges `file`, the seed environment value and `flags` (as key/value
/// pairs) into a fully resolved run.
pub fn resolve_run(file: ConfigFile, env_seed: Option<&str>, flags: &[(&str, String)]) -> Result<RunSettings> {
    let mut cfg = file;
    if let Some(s) = env_seed {
        cfg.set("seed", s);
    }
    for (k, v) in flags {
        cfg.set(k, v.clone());
    }
    let id: TestCaseId = cfg.get("case").ok_or_else(|| Error::Config("missing --case".into()))?.parse()?;
    let scale: Scale = cfg.get("scale").unwrap_or("desk").parse()?;
    let mut case = TestCase::new(id, scale);
    cfg.apply(&mut case)?;
    let default_methods = if id == TestCaseId::Barenblatt { "particle,relaxation,exact" } else { "particle,relaxation" };
    let methods = Method::parse_list(cfg.get("methods").unwrap_or(default_methods))?;
    let seed = cfg.value("seed")?.unwrap_or(DEFAULT_SEED);
    let out = PathBuf::from(cfg.get("out").unwrap_or("out"));
    Ok(RunSettings { case, methods, seed, out })
}
