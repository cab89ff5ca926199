//! Study configuration files: TOML with strict keys, dotted overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use pqec_core::sim::{DynamicsSpec, ExtractSpec, FitStudySpec, ResourceStudySpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    Extract,
    Fit,
    Dynamics,
    Resources,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::Extract => "extract",
            Study::Fit => "fit",
            Study::Dynamics => "dynamics",
            Study::Resources => "resources",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<Study>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extract: Option<ExtractSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitStudySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resources: Option<ResourceStudySpec>,
}

#[derive(Debug)]
pub struct ConfigError {
    pub source: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error in {}: {}", self.source, self.message.trim_end())
    }
}

impl ConfigError {
    pub fn new(source: impl Into<String>, message: impl Into<String>) -> Self {
        Self { source: source.into(), message: message.into() }
    }
}

/// Parse `value` as a TOML value, falling back to a bare string.
fn parse_value(value: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {value}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(value.into())),
        Err(_) => toml::Value::String(value.into()),
    }
}

/// Set `a.b.c = value` inside `table`, creating intermediate tables.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), String> {
    let (key, value) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override `{assignment}` is not of the form key=value"))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(format!("override key `{key}` has an empty component"));
    }
    let mut node = table;
    for part in &path[..path.len() - 1] {
        let entry = node.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| format!("override `{key}`: `{part}` is not a table"))?;
    }
    node.insert(path[path.len() - 1].to_string(), parse_value(value.trim()));
    Ok(())
}

/// Read, override and type-check a config file. Errors carry the line and
/// field that failed.
pub fn load(path: &Path, overrides: &[String]) -> Result<Config, ConfigError> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(&source, format!("cannot read: {e}")))?;
    parse(&text, &source, overrides)
}

pub fn parse(text: &str, source: &str, overrides: &[String]) -> Result<Config, ConfigError> {
    if overrides.is_empty() {
        return toml::from_str(text).map_err(|e| ConfigError::new(source, e.to_string()));
    }
    let mut table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::new(source, e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o).map_err(|e| ConfigError::new(source, e))?;
    }
    // re-serialize so that type errors still point at a line of the resolved text
    let resolved = toml::to_string(&table).map_err(|e| ConfigError::new(source, e.to_string()))?;
    toml::from_str(&resolved)
        .map_err(|e| ConfigError::new(format!("{source} (after --override)"), format!("{e}\nresolved config:\n{resolved}")))
}

impl Config {
    /// Settle the study against the subcommand and push the seed into the
    /// study section: `--seed` beats the top-level `seed`, which beats the
    /// section's own `seed`.
    pub fn resolve(&mut self, subcommand: Study, seed: Option<u64>, source: &str) -> Result<(), ConfigError> {
        match self.study {
            None => self.study = Some(subcommand),
            Some(s) if s == subcommand => {}
            Some(s) => {
                return Err(ConfigError::new(
                    source,
                    format!("`study = \"{}\"` does not match the `{}` subcommand", s.name(), subcommand.name()),
                ))
            }
        }
        if seed.is_some() {
            self.seed = seed;
        }
        let missing = || ConfigError::new(source, format!("missing [{}] section", subcommand.name()));
        let seed = self.seed;
        let validation = |e: pqec_core::Error| ConfigError::new(source, format!("[{}]: {e}", subcommand.name()));
        match subcommand {
            Study::Extract => {
                let s = self.extract.as_mut().ok_or_else(missing)?;
                if let Some(seed) = seed {
                    s.seed = seed;
                }
                s.noise.validate().map_err(validation)?;
                pqec_core::surface_code::SurfaceCode::new(s.distance).map_err(validation)?;
            }
            Study::Fit => {
                let s = self.fit.as_mut().ok_or_else(missing)?;
                if let Some(seed) = seed {
                    s.seed = seed;
                }
                s.validate().map_err(validation)?;
            }
            Study::Dynamics => {
                let s = self.dynamics.as_mut().ok_or_else(missing)?;
                if let Some(seed) = seed {
                    s.seed = seed;
                }
                s.validate().map_err(validation)?;
            }
            Study::Resources => {
                let s = self.resources.as_ref().ok_or_else(missing)?;
                s.validate().map_err(validation)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_create_and_replace() {
        let mut t: toml::Table = toml::from_str("[fit]\nfixed_gamma_tau = 0.08\n").unwrap();
        apply_override(&mut t, "fit.fixed_gamma_tau=0.1").unwrap();
        apply_override(&mut t, "fit.strategy_a.noise.kind = dephasing_only").unwrap();
        apply_override(&mut t, "fit.gamma_tau=[0.01, 0.02]").unwrap();
        assert_eq!(t["fit"]["fixed_gamma_tau"].as_float(), Some(0.1));
        assert_eq!(t["fit"]["strategy_a"]["noise"]["kind"].as_str(), Some("dephasing_only"));
        assert_eq!(t["fit"]["gamma_tau"].as_array().unwrap().len(), 2);
        assert!(apply_override(&mut t, "fit.fixed_gamma_tau.x=1").is_err());
        assert!(apply_override(&mut t, "nothing").is_err());
    }

    #[test]
    fn unknown_keys_fail_with_location() {
        let err = parse("study = \"fit\"\n[fit]\ngama_tau = [0.1]\n", "t.toml", &[]).unwrap_err();
        assert!(err.message.contains("line 3"), "{}", err.message);
        assert!(err.message.contains("gama_tau"));
    }

    #[test]
    fn study_must_match_subcommand() {
        let mut c = parse("study = \"fit\"\n[fit]\n", "t.toml", &[]).unwrap();
        assert!(c.resolve(Study::Dynamics, None, "t.toml").is_err());
        let mut c = parse("[resources]\n", "t.toml", &[]).unwrap();
        c.resolve(Study::Resources, None, "t.toml").unwrap();
        assert_eq!(c.study, Some(Study::Resources));
        let mut c = parse("[resources]\n", "t.toml", &[]).unwrap();
        assert!(c.resolve(Study::Fit, None, "t.toml").unwrap_err().message.contains("missing [fit]"));
    }

    #[test]
    fn seed_precedence() {
        let mut c = parse("seed = 5\n[fit]\nseed = 1\n", "t.toml", &[]).unwrap();
        c.resolve(Study::Fit, None, "t.toml").unwrap();
        assert_eq!(c.fit.as_ref().unwrap().seed, 5);
        c.resolve(Study::Fit, Some(9), "t.toml").unwrap();
        assert_eq!(c.fit.as_ref().unwrap().seed, 9);
    }
}
