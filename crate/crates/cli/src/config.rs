//! Flat `key = value` configuration with per-subcommand schemas.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    Spectrum,
    Equilibrium,
    Evolve,
    CollapseScan,
    Regime,
    Born,
    EnergyDrift,
    OracleCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Equilibrium => "equilibrium",
            Command::Evolve => "evolve",
            Command::CollapseScan => "collapse-scan",
            Command::Regime => "regime",
            Command::Born => "born",
            Command::EnergyDrift => "energy-drift",
            Command::OracleCheck => "oracle-check",
        }
    }
}

pub struct KeySpec {
    pub name: &'static str,
    /// `None` marks a required key.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn key(name: &'static str, default: &'static str, help: &'static str) -> KeySpec {
    KeySpec { name, default: Some(default), help }
}

const fn required(name: &'static str, help: &'static str) -> KeySpec {
    KeySpec { name, default: None, help }
}

const MODEL: KeySpec = key("model_kind", "ladder", "ladder or lieb-mattis");
const CUTOFF: KeySpec = key("cutoff", "64", "number of thin-spectrum levels kept");
const FIELD: KeySpec = key("field_strength", "1e-3", "non-unitary field strength o");

pub fn schema(cmd: Command) -> &'static [KeySpec] {
    match cmd {
        Command::Spectrum => {
            const S: &[KeySpec] = &[
                MODEL,
                required("n_particles", "system size N"),
                CUTOFF,
                key("coupling_j", "1.0", "exchange coupling J"),
            ];
            S
        }
        Command::Equilibrium => {
            const S: &[KeySpec] = &[
                MODEL,
                required("n_particles", "system size N"),
                CUTOFF,
                required("b_values", "comma-separated increasing fields b >= 0"),
            ];
            S
        }
        Command::Evolve => {
            const S: &[KeySpec] = &[
                MODEL,
                required("n_particles", "system size N"),
                CUTOFF,
                FIELD,
                key("time_step", "1.0", "grid spacing in hbar/J"),
                key("steps", "1000", "number of grid steps"),
                key("backend", "scaling-squaring", "dense-eigen, scaling-squaring or stepped-integration"),
                key("rel_tolerance", "1e-10", "relative tolerance in (0, 1e-4]"),
                key("initial", "cat", "cat, favoured, rival or symmetric"),
                key("weight", "0.5", "favoured-branch weight of the cat state"),
                key("beta", "100", "dimensionless branch field b(N/4)/(E1-E0)"),
            ];
            S
        }
        Command::CollapseScan => {
            const S: &[KeySpec] = &[
                MODEL,
                key("n_values", "64,128,256,512,1024,2048,4096,8192", "system sizes"),
                FIELD,
                CUTOFF,
                key("threshold", "0.99", "relative branch weight counted as selected"),
            ];
            S
        }
        Command::Regime => {
            const S: &[KeySpec] = &[MODEL, key("n_values", "64,128,256,512,1024", "system sizes"), FIELD, CUTOFF];
            S
        }
        Command::Born => {
            const S: &[KeySpec] = &[
                MODEL,
                key("n_particles", "1024", "system size N"),
                key("cutoff", "32", "number of thin-spectrum levels kept"),
                FIELD,
                key("weight_initial", "0.5", "initial squared weight on branch L"),
                key("trials", "10000", "number of stochastic trials"),
                key("strategy", "martingale-bias", "martingale-bias or symmetric-flip"),
                key("step_units", "0.1", "field resampling interval in hbar/(N o)"),
                key("absorb", "0.999", "branch weight that ends a trial"),
                key("max_steps", "100000", "step limit per trial"),
            ];
            S
        }
        Command::EnergyDrift => {
            const S: &[KeySpec] = &[
                MODEL,
                key("n_values", "256,512,1024,2048,4096,8192", "system sizes"),
                FIELD,
                CUTOFF,
                key("horizon_multiple", "3.0", "horizon in units of the measured collapse time"),
                key("horizon", "none", "fixed horizon in hbar/J; overrides horizon_multiple"),
            ];
            S
        }
        Command::OracleCheck => {
            const S: &[KeySpec] = &[
                key("n_spins", "8", "full-system size, multiple of 4 up to 12"),
                FIELD,
                key("horizon_units", "2.0", "horizon in units of hbar/(N o)"),
                key("samples", "200", "trajectory grid steps"),
            ];
            S
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_document(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!("line {}: expected `key = value`, got `{line}`", idx + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(CliError::Config(format!("line {}: empty key", idx + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key `{k}`", idx + 1)));
        }
    }
    Ok(out)
}

/// Effective configuration: every schema key with its given or default value.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub command: Command,
    values: BTreeMap<&'static str, String>,
}

pub fn resolve(command: Command, given: BTreeMap<String, String>) -> Result<Resolved, CliError> {
    let keys = schema(command);
    let unknown: Vec<&str> = given.keys().filter(|k| !keys.iter().any(|s| s.name == *k)).map(String::as_str).collect();
    if !unknown.is_empty() {
        return Err(CliError::Config(format!("unknown key(s) for `{}`: {}", command.name(), unknown.join(", "))));
    }
    let mut values = BTreeMap::new();
    let mut missing = Vec::new();
    for s in keys {
        match (given.get(s.name), s.default) {
            (Some(v), _) => {
                values.insert(s.name, normalize(v));
            }
            (None, Some(d)) => {
                values.insert(s.name, d.to_string());
            }
            (None, None) => missing.push(s.name),
        }
    }
    if !missing.is_empty() {
        return Err(CliError::Config(format!(
            "missing required key(s) for `{}`: {}",
            command.name(),
            missing.join(", ")
        )));
    }
    Ok(Resolved { command, values })
}

fn normalize(v: &str) -> String {
    if v.contains(',') {
        v.split(',').map(str::trim).collect::<Vec<_>>().join(",")
    } else {
        v.to_string()
    }
}

impl Resolved {
    /// Sorted `key = value` lines; the hashed identity of a run.
    pub fn canonical(&self, seed: u64) -> String {
        let mut out = format!("command = {}\nseed = {seed}\n", self.command.name());
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    /// Canonical text with each key's description as a trailing comment.
    pub fn annotated(&self, seed: u64) -> String {
        let mut out = format!("# {} (seed {seed})\n", self.command.name());
        for entry in schema(self.command) {
            out.push_str(&format!("{} = {}  # {}\n", entry.name, self.values[entry.name], entry.help));
        }
        out
    }

    pub fn raw(&self, key: &'static str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_else(|| panic!("`{key}` is not in the schema"))
    }

    pub fn get<T: FromStr>(&self, key: &'static str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(key);
        raw.parse().map_err(|e| CliError::Config(format!("key `{key}`: cannot parse `{raw}`: {e}")))
    }

    pub fn optional<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if self.raw(key) == "none" {
            Ok(None)
        } else {
            self.get(key).map(Some)
        }
    }

    pub fn list<T: FromStr>(&self, key: &'static str) -> Result<Vec<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e| CliError::Config(format!("key `{key}`: cannot parse `{s}`: {e}"))))
            .collect()
    }
}
