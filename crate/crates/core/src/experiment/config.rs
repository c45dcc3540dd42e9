//! Flat `key = value` experiment configuration.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::isoperimetry::ENUMERATION_LIMIT;
use crate::spectral::{DENSE_LIMIT, EIGENSOLVE_LIMIT, SPECTRAL_PROFILE_LIMIT};
use crate::walk::{Model, DEFAULT_CUTOFF};

/// Point process sampled in each cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Process {
    Poisson,
    /// `spacing * Z^d` thinned with `keep_prob`.
    ThinnedLattice,
    /// Intensity `rho_min + (rho - rho_min) (1 + cos(2 pi x_1 / L)) / 2`.
    Inhomogeneous,
}

impl Process {
    pub fn name(self) -> &'static str {
        match self {
            Process::Poisson => "poisson",
            Process::ThinnedLattice => "thinned_lattice",
            Process::Inhomogeneous => "inhomogeneous",
        }
    }
}

impl FromStr for Process {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poisson" => Ok(Process::Poisson),
            "thinned_lattice" => Ok(Process::ThinnedLattice),
            "inhomogeneous" => Ok(Process::Inhomogeneous),
            _ => Err(Error::Config(format!("unknown process {s:?}"))),
        }
    }
}

/// Size thresholds for the exact and dense routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeLimits {
    /// Largest `n` for exhaustive cut enumeration.
    pub cut_enum: usize,
    /// Largest `n` for dense eigendecompositions and exact mixing times.
    pub dense: usize,
    /// Largest `n` for the iterative eigensolver.
    pub eigensolve: usize,
    /// Largest `n` for the exact spectral profile.
    pub profile: usize,
}

impl Default for SizeLimits {
    fn default() -> Self {
        SizeLimits {
            cut_enum: ENUMERATION_LIMIT,
            dense: DENSE_LIMIT,
            eigensolve: EIGENSOLVE_LIMIT,
            profile: SPECTRAL_PROFILE_LIMIT,
        }
    }
}

impl SizeLimits {
    fn parse(value: &str) -> Result<Self> {
        let mut out = SizeLimits::default();
        for item in split_list(value) {
            let (k, v) = item
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("size limit {item:?} is not name:value")))?;
            let v: usize = parse_value("size_limits", v.trim())?;
            match k.trim() {
                "cut_enum" => out.cut_enum = v,
                "dense" => out.dense = v,
                "eigensolve" => out.eigensolve = v,
                "profile" => out.profile = v,
                other => return Err(Error::Config(format!("unknown size limit {other:?}"))),
            }
        }
        Ok(out)
    }

    fn to_text(self) -> String {
        format!(
            "cut_enum:{},dense:{},eigensolve:{},profile:{}",
            self.cut_enum, self.dense, self.eigensolve, self.profile
        )
    }
}

/// Parameters of a sweep. Field names match the config keys, except
/// `l_list` which is spelled `L_list` in files.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub alpha: f64,
    pub rho: f64,
    pub model: Model,
    pub l_list: Vec<u32>,
    pub seeds: Vec<u64>,
    pub cutoff: f64,
    pub size_limits: SizeLimits,
    pub process: Process,
    pub output_path: String,
    /// Intensities of a transition scan; empty means `[rho]`.
    pub rho_list: Vec<f64>,
    /// Box sides of the statistics check.
    pub ell_list: Vec<u32>,
    pub spacing: f64,
    pub keep_prob: f64,
    /// Lower intensity of the inhomogeneous process.
    pub rho_min: f64,
    /// Threshold `g` of the tail event `R >= g ell^d`.
    pub tail_gamma: f64,
    /// Worker threads; `0` lets the thread pool decide, `1` runs sequentially.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dim: 2,
            alpha: 1.0,
            rho: 1.0,
            model: Model::Unit,
            l_list: vec![16],
            seeds: vec![0],
            cutoff: DEFAULT_CUTOFF,
            size_limits: SizeLimits::default(),
            process: Process::Poisson,
            output_path: "results.csv".into(),
            rho_list: Vec::new(),
            ell_list: vec![4, 8, 16, 32],
            spacing: 1.0,
            keep_prob: 1.0,
            rho_min: 1.0,
            tail_gamma: 10.0,
            workers: 0,
        }
    }
}

pub const KEYS: [&str; 17] = [
    "dim",
    "alpha",
    "rho",
    "model",
    "L_list",
    "seeds",
    "cutoff",
    "size_limits",
    "process",
    "output_path",
    "rho_list",
    "ell_list",
    "spacing",
    "keep_prob",
    "rho_min",
    "tail_gamma",
    "workers",
];

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("cannot parse {v:?} for {key}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    split_list(value).map(|v| parse_value(key, v)).collect()
}

/// Comma list of integers and half-open ranges `a..b`.
fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for item in split_list(value) {
        match item.split_once("..") {
            Some((a, b)) => {
                let a: u64 = parse_value("seeds", a.trim())?;
                let b: u64 = parse_value("seeds", b.trim())?;
                if b < a {
                    return Err(Error::Config(format!("empty seed range {item:?}")));
                }
                out.extend(a..b);
            }
            None => out.push(parse_value("seeds", item)?),
        }
    }
    Ok(out)
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Parse a config text on top of the defaults and validate it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::parse(&text)
    }

    /// Set one key from its text value, without validation.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dim" => self.dim = parse_value(key, value)?,
            "alpha" => self.alpha = parse_value(key, value)?,
            "rho" => self.rho = parse_value(key, value)?,
            "model" => {
                let m: u8 = parse_value(key, value)?;
                self.model = Model::try_from(m).map_err(|_| Error::Config(format!("model must be 1, 2 or 3, got {m}")))?;
            }
            "L_list" => self.l_list = parse_list(key, value)?,
            "seeds" => self.seeds = parse_seeds(value)?,
            "cutoff" => self.cutoff = parse_value(key, value)?,
            "size_limits" => self.size_limits = SizeLimits::parse(value)?,
            "process" => self.process = value.parse()?,
            "output_path" => self.output_path = value.to_string(),
            "rho_list" => self.rho_list = parse_list(key, value)?,
            "ell_list" => self.ell_list = parse_list(key, value)?,
            "spacing" => self.spacing = parse_value(key, value)?,
            "keep_prob" => self.keep_prob = parse_value(key, value)?,
            "rho_min" => self.rho_min = parse_value(key, value)?,
            "tail_gamma" => self.tail_gamma = parse_value(key, value)?,
            "workers" => self.workers = parse_value(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.dim == 0 || self.dim > 3 {
            return fail(format!("dim must lie in 1..=3, got {}", self.dim));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return fail(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return fail(format!("rho must be positive, got {}", self.rho));
        }
        if self.l_list.is_empty() || self.l_list[0] == 0 || self.l_list.windows(2).any(|w| w[0] >= w[1]) {
            return fail("L_list must be nonempty, positive and strictly increasing".into());
        }
        if self.seeds.is_empty() {
            return fail("seeds must be nonempty".into());
        }
        if self.seeds.iter().collect::<HashSet<_>>().len() != self.seeds.len() {
            return fail("seeds must be distinct".into());
        }
        if !(0.0..1.0).contains(&self.cutoff) {
            return fail(format!("cutoff must lie in [0, 1), got {}", self.cutoff));
        }
        if self.rho_list.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return fail("rho_list entries must be positive".into());
        }
        if self.ell_list.is_empty() || self.ell_list[0] == 0 || self.ell_list.windows(2).any(|w| w[0] >= w[1]) {
            return fail("ell_list must be nonempty, positive and strictly increasing".into());
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return fail(format!("spacing must be positive, got {}", self.spacing));
        }
        if !(self.keep_prob > 0.0 && self.keep_prob <= 1.0) {
            return fail(format!("keep_prob must lie in (0, 1], got {}", self.keep_prob));
        }
        if self.process == Process::Inhomogeneous && !(self.rho_min > 0.0 && self.rho_min <= self.rho) {
            return fail(format!("rho_min must lie in (0, rho], got {}", self.rho_min));
        }
        if !(self.tail_gamma > 0.0) {
            return fail(format!("tail_gamma must be positive, got {}", self.tail_gamma));
        }
        Ok(())
    }

    /// Text form that parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("dim", self.dim.to_string());
        put("alpha", self.alpha.to_string());
        put("rho", self.rho.to_string());
        put("model", self.model.index().to_string());
        put("L_list", join(&self.l_list));
        put("seeds", join(&self.seeds));
        put("cutoff", self.cutoff.to_string());
        put("size_limits", self.size_limits.to_text());
        put("process", self.process.name().into());
        put("output_path", self.output_path.clone());
        put("rho_list", join(&self.rho_list));
        put("ell_list", join(&self.ell_list));
        put("spacing", self.spacing.to_string());
        put("keep_prob", self.keep_prob.to_string());
        put("rho_min", self.rho_min.to_string());
        put("tail_gamma", self.tail_gamma.to_string());
        put("workers", self.workers.to_string());
        s
    }

    /// Intensities scanned by a transition run.
    pub fn rhos(&self) -> Vec<f64> {
        if self.rho_list.is_empty() {
            vec![self.rho]
        } else {
            self.rho_list.clone()
        }
    }
}
