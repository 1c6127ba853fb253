use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::adversary::{AttackScenario, DataSpec};
use crate::chain::ChainParams;
use crate::qudit::DEFAULT_AMPLITUDE_CAP;
use crate::{Error, Result};

/// `qudit_dim` is a single dimension or a sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dims {
    One(usize),
    Sweep(Vec<usize>),
}

impl Dims {
    pub fn values(&self) -> Vec<usize> {
        match self {
            Dims::One(d) => vec![*d],
            Dims::Sweep(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub qudit_dim: Dims,
    pub n_blocks: usize,
    pub m_symbols: usize,
    pub data: DataSpec,
    pub scenarios: Vec<AttackScenario>,
    pub trials: u64,
    pub seed: u64,
    pub output: OutputPaths,
    pub amplitude_cap: usize,
    /// Half-width of the Wilson interval, in standard deviations, that an
    /// attack row's oracle value must fall inside.
    pub tolerance_z: f64,
}

pub const DEFAULT_TRIALS: u64 = 1000;
pub const DEFAULT_TOLERANCE_Z: f64 = 3.0;

const FIELDS: &[&str] = &[
    "qudit_dim",
    "n_blocks",
    "m_symbols",
    "data",
    "scenarios",
    "trials",
    "seed",
    "output",
    "amplitude_cap",
    "tolerance_z",
];

impl ScenarioConfig {
    /// Parameters for every dimension in the sweep. Assumes a validated config.
    pub fn params(&self) -> Result<Vec<ChainParams>> {
        self.qudit_dim
            .values()
            .into_iter()
            .map(|d| ChainParams::with_cap(self.n_blocks, d, self.m_symbols, self.amplitude_cap))
            .collect()
    }

    /// Every invariant violation, each prefixed with its field. The
    /// amplitude cap is not among them: [`Self::params`] enforces it.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let dims = self.qudit_dim.values();
        if dims.is_empty() {
            v.push("qudit_dim: empty sweep".into());
        }
        for &d in &dims {
            if d < 2 {
                v.push(format!("qudit_dim: {d} < 2"));
            }
        }
        let mut sorted = dims.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != dims.len() {
            v.push("qudit_dim: duplicate dimensions in sweep".into());
        }
        if self.n_blocks < 3 {
            v.push(format!("n_blocks: {} < 3", self.n_blocks));
        }
        if self.m_symbols < 1 {
            v.push("m_symbols: must be at least 1".into());
        }
        if self.trials < 1 {
            v.push("trials: must be at least 1".into());
        }
        if !(self.tolerance_z.is_finite() && self.tolerance_z > 0.0) {
            v.push(format!("tolerance_z: {} is not a positive number", self.tolerance_z));
        }
        if let DataSpec::Fixed(symbols) = &self.data {
            if symbols.len() != self.m_symbols {
                v.push(format!("data: {} symbols but m_symbols = {}", symbols.len(), self.m_symbols));
            }
            for &d in dims.iter().filter(|&&d| d >= 2) {
                if let Some(s) = symbols.iter().find(|&&s| s >= d) {
                    v.push(format!("data: symbol {s} out of range for qudit_dim {d}"));
                }
            }
        }
        if !v.is_empty() {
            return v;
        }
        for &d in &dims {
            // the cap is checked separately, as a resource error
            match ChainParams::with_cap(self.n_blocks, d, self.m_symbols, usize::MAX) {
                Ok(p) => {
                    for (i, s) in self.scenarios.iter().enumerate() {
                        for msg in s.violations(&p) {
                            v.push(format!("scenarios[{i}] (qudit_dim {d}): {msg}"));
                        }
                    }
                }
                Err(e) => v.push(format!("qudit_dim {d}: {e}")),
            }
        }
        v
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Config(vec![format!("syntax: {e}")]))?;
        Self::from_value(value)
    }

    /// Builds and validates a config, reporting all bad fields at once.
    pub fn from_value(value: Value) -> Result<Self> {
        let Value::Object(obj) = value else {
            return Err(Error::Config(vec!["config: top level must be an object".into()]));
        };
        let mut errs: Vec<String> = obj
            .keys()
            .filter(|k| !FIELDS.contains(&k.as_str()))
            .map(|k| format!("{k}: unknown field"))
            .collect();
        let qudit_dim = required(&obj, "qudit_dim", &mut errs);
        let n_blocks = required(&obj, "n_blocks", &mut errs);
        let m_symbols = required(&obj, "m_symbols", &mut errs);
        let data = optional(&obj, "data", DataSpec::RANDOM, &mut errs);
        let scenarios = scenario_list(&obj, &mut errs);
        let trials = optional(&obj, "trials", DEFAULT_TRIALS, &mut errs);
        let seed = optional(&obj, "seed", 0, &mut errs);
        let output = optional(&obj, "output", OutputPaths::default(), &mut errs);
        let amplitude_cap = optional(&obj, "amplitude_cap", DEFAULT_AMPLITUDE_CAP, &mut errs);
        let tolerance_z = optional(&obj, "tolerance_z", DEFAULT_TOLERANCE_Z, &mut errs);
        let (Some(qudit_dim), Some(n_blocks), Some(m_symbols), Some(data), Some(scenarios)) =
            (qudit_dim, n_blocks, m_symbols, data, scenarios)
        else {
            return Err(Error::Config(errs));
        };
        let (Some(trials), Some(seed), Some(output), Some(amplitude_cap), Some(tolerance_z)) =
            (trials, seed, output, amplitude_cap, tolerance_z)
        else {
            return Err(Error::Config(errs));
        };
        let cfg = ScenarioConfig {
            qudit_dim,
            n_blocks,
            m_symbols,
            data,
            scenarios,
            trials,
            seed,
            output,
            amplitude_cap,
            tolerance_z,
        };
        errs.extend(cfg.violations());
        if !errs.is_empty() {
            return Err(Error::Config(errs));
        }
        cfg.params()?;
        Ok(cfg)
    }
}

fn field<T: DeserializeOwned>(name: &str, v: &Value, errs: &mut Vec<String>) -> Option<T> {
    match T::deserialize(v) {
        Ok(t) => Some(t),
        Err(e) => {
            errs.push(format!("{name}: {e}"));
            None
        }
    }
}

fn required<T: DeserializeOwned>(obj: &Map<String, Value>, name: &str, errs: &mut Vec<String>) -> Option<T> {
    match obj.get(name) {
        Some(v) => field(name, v, errs),
        None => {
            errs.push(format!("{name}: missing"));
            None
        }
    }
}

fn optional<T: DeserializeOwned>(obj: &Map<String, Value>, name: &str, default: T, errs: &mut Vec<String>) -> Option<T> {
    match obj.get(name) {
        Some(Value::Null) | None => Some(default),
        Some(v) => field(name, v, errs),
    }
}

/// Parses scenarios one by one so each bad entry gets its own message.
fn scenario_list(obj: &Map<String, Value>, errs: &mut Vec<String>) -> Option<Vec<AttackScenario>> {
    let Some(Value::Array(items)) = obj.get("scenarios") else {
        return optional(obj, "scenarios", vec![AttackScenario::Honest], errs);
    };
    let parsed: Vec<Option<AttackScenario>> =
        items.iter().enumerate().map(|(i, v)| field(&format!("scenarios[{i}]"), v, errs)).collect();
    parsed.into_iter().collect()
}

/// Reads and validates a JSON config file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(vec![format!("{}: cannot read: {e}", path.display())]))?;
    ScenarioConfig::from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errs(text: &str) -> Vec<String> {
        match ScenarioConfig::from_json_str(text) {
            Err(Error::Config(v)) => v,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ScenarioConfig::from_json_str(r#"{"qudit_dim": 2, "n_blocks": 3, "m_symbols": 1}"#).unwrap();
        assert_eq!(c.scenarios, vec![AttackScenario::Honest]);
        assert_eq!(c.trials, DEFAULT_TRIALS);
        assert_eq!(c.data, DataSpec::RANDOM);
    }

    #[test]
    fn all_violations_are_reported() {
        let e = errs(r#"{"qudit_dim": 1, "n_blocks": 2, "m_symbols": 1, "trials": 0}"#);
        assert_eq!(e.len(), 3, "{e:?}");
        assert!(e.iter().any(|m| m.starts_with("qudit_dim")));
        assert!(e.iter().any(|m| m.starts_with("n_blocks")));
        assert!(e.iter().any(|m| m.starts_with("trials")));

        let e = errs(r#"{"n_blocks": "three", "m_symbols": 1, "colour": 1}"#);
        assert_eq!(e.len(), 3, "{e:?}");
    }

    #[test]
    fn cap_is_checked_up_front() {
        let r = ScenarioConfig::from_json_str(r#"{"qudit_dim": [2, 1000], "n_blocks": 3, "m_symbols": 1}"#);
        assert!(matches!(r, Err(Error::Resource { .. })), "{r:?}");
        let r = ScenarioConfig::from_json_str(r#"{"qudit_dim": 3, "n_blocks": 3, "m_symbols": 1, "amplitude_cap": 80}"#);
        assert!(matches!(r, Err(Error::Resource { needed: 81, cap: 80 })), "{r:?}");
    }

    #[test]
    fn data_must_fit_every_dimension() {
        let e = errs(r#"{"qudit_dim": [2, 3], "n_blocks": 4, "m_symbols": 1, "data": [2]}"#);
        assert_eq!(e.len(), 1);
        assert!(e[0].contains("qudit_dim 2"), "{e:?}");
    }

    #[test]
    fn scenarios_are_checked_per_dimension() {
        let e = errs(
            r#"{"qudit_dim": [2, 3], "n_blocks": 4, "m_symbols": 1,
                "scenarios": [{"kind": "honest"}, {"kind": "tamper_data", "symbol": 1}]}"#,
        );
        assert_eq!(e.len(), 2, "{e:?}");
        assert!(e.iter().all(|m| m.starts_with("scenarios[1]")), "{e:?}");
    }

    #[test]
    fn each_bad_scenario_is_named() {
        let e = errs(
            r#"{"qudit_dim": 3, "n_blocks": 4, "m_symbols": 1,
                "scenarios": [{"kind": "honest"}, {"kind": "teleport"}, {"kind": "collusion"}]}"#,
        );
        assert_eq!(e.len(), 2, "{e:?}");
        assert!(e[0].starts_with("scenarios[1]") && e[1].starts_with("scenarios[2]"), "{e:?}");
    }

    #[test]
    fn syntax_errors_are_config_errors() {
        assert_eq!(errs("{").len(), 1);
        assert_eq!(errs("[]").len(), 1);
    }
}
