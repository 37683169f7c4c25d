//! `key=value` settings files and their merge with command-line flags.

use std::collections::BTreeMap;
use std::path::Path;

use hvi_core::{Mode, ReferenceSpec, StudyConfig};

use crate::error::CliError;

/// Settings shared by `solve` and `study`; `None` means "not given".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub levels: Option<Vec<u32>>,
    pub level: Option<u32>,
    pub eta: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub beta: Option<f64>,
    pub mode: Option<Mode>,
    pub reference: Option<ReferenceSpec>,
    pub eps: Option<f64>,
    pub max_iters: Option<usize>,
}

impl Overrides {
    /// Fields set in `other` win.
    pub fn merged_with(self, other: Overrides) -> Overrides {
        Overrides {
            levels: other.levels.or(self.levels),
            level: other.level.or(self.level),
            eta: other.eta.or(self.eta),
            a: other.a.or(self.a),
            b: other.b.or(self.b),
            beta: other.beta.or(self.beta),
            mode: other.mode.or(self.mode),
            reference: other.reference.or(self.reference),
            eps: other.eps.or(self.eps),
            max_iters: other.max_iters.or(self.max_iters),
        }
    }

    pub fn apply(&self, base: StudyConfig) -> StudyConfig {
        StudyConfig {
            levels: self.levels.clone().unwrap_or(base.levels),
            reference: self.reference.unwrap_or(base.reference),
            eta: self.eta.unwrap_or(base.eta),
            a: self.a.unwrap_or(base.a),
            b: self.b.unwrap_or(base.b),
            beta: self.beta.unwrap_or(base.beta),
            eps_stop: self.eps.unwrap_or(base.eps_stop),
            l_max: self.max_iters.unwrap_or(base.l_max),
            mode: self.mode.unwrap_or(base.mode),
        }
    }
}

pub fn parse_levels(s: &str) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u32 = lo
                .trim()
                .parse()
                .map_err(|_| format!("bad level range '{part}'"))?;
            let hi: u32 = hi
                .trim()
                .parse()
                .map_err(|_| format!("bad level range '{part}'"))?;
            if hi < lo {
                return Err(format!("empty level range '{part}'"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| format!("bad level '{part}'"))?);
        }
    }
    if out.is_empty() {
        return Err("no levels given".into());
    }
    Ok(out)
}

pub fn parse_mode(s: &str) -> Result<Mode, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "hvi" => Ok(Mode::Hvi),
        "linear" => Ok(Mode::Linear),
        other => Err(format!("unknown mode '{other}', expected hvi or linear")),
    }
}

pub fn parse_reference(s: &str) -> Result<ReferenceSpec, String> {
    let s = s.trim().to_ascii_lowercase();
    if s == "analytic" {
        return Ok(ReferenceSpec::Analytic);
    }
    match s.strip_prefix("nested:") {
        Some(l) => l
            .trim()
            .parse()
            .map(ReferenceSpec::Nested)
            .map_err(|_| format!("bad nested reference level in '{s}'")),
        None => Err(format!(
            "unknown reference '{s}', expected analytic or nested:<level>"
        )),
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.trim()
        .parse()
        .map_err(|_| format!("bad value '{v}' for {key}"))
}

/// Parses `key = value` lines; `#` starts a comment. Keys may use `-` or `_`.
pub fn parse_str(text: &str) -> Result<Overrides, CliError> {
    let mut seen = BTreeMap::new();
    let mut o = Overrides::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| CliError::Config(format!("line {}: {msg}", lineno + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, got '{line}'")))?;
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        if seen.insert(key.clone(), ()).is_some() {
            return Err(err(format!("duplicate key '{key}'")));
        }
        match key.as_str() {
            "levels" => o.levels = Some(parse_levels(value).map_err(err)?),
            "level" => o.level = Some(num(&key, value).map_err(err)?),
            "eta" => o.eta = Some(num(&key, value).map_err(err)?),
            "a" => o.a = Some(num(&key, value).map_err(err)?),
            "b" => o.b = Some(num(&key, value).map_err(err)?),
            "beta" => o.beta = Some(num(&key, value).map_err(err)?),
            "mode" => o.mode = Some(parse_mode(value).map_err(err)?),
            "reference" => o.reference = Some(parse_reference(value).map_err(err)?),
            "eps" => o.eps = Some(num(&key, value).map_err(err)?),
            "max_iters" => o.max_iters = Some(num(&key, value).map_err(err)?),
            _ => return Err(err(format!("unknown key '{key}'"))),
        }
    }
    Ok(o)
}

pub fn load(path: &Path) -> Result<Overrides, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_str(&text)
}
