//! Run configuration for the verification suites.

use crate::error::{HeatlabError, Result};
use crate::group::CompactGroup;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SUITES: [&str; 11] = [
    "transform-unitarity",
    "taylor-isometry",
    "hermite",
    "identities",
    "operators",
    "ccr",
    "resolution",
    "stochastic",
    "bounds",
    "phase-density",
    "euclid",
];

/// Largest truncation degree accepted in a config.
pub const MAX_N: usize = 40;
/// Largest `samples * mesh` accepted in a config.
pub const MAX_MC_WORK: u64 = 20_000_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBudget {
    pub samples: usize,
    pub mesh: usize,
}

impl Default for McBudget {
    fn default() -> Self {
        Self {
            samples: 100_000,
            mesh: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// `"torus:2"`, `"su2"`, `"torus:1,su2"` or `{"product": [...]}`.
    pub group: serde_json::Value,
    #[serde(default = "default_ts")]
    pub t_ladder: Vec<f64>,
    /// Fock truncation degree.
    #[serde(rename = "N", default = "default_n")]
    pub n: usize,
    /// Haar quadrature exactness per factor for the convolution form of the transform;
    /// chosen automatically when absent.
    #[serde(default)]
    pub exactness: Option<Vec<usize>>,
    #[serde(default)]
    pub mc: McBudget,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "all_suites")]
    pub suites: Vec<String>,
    /// Band limit per factor for randomly drawn test functions.
    #[serde(default = "default_band")]
    pub band: usize,
    /// Random test functions per `t`.
    #[serde(default = "default_cases")]
    pub cases: usize,
    /// Sampled points for the pointwise bound.
    #[serde(default = "default_bound_samples")]
    pub bound_samples: usize,
    /// Corrupts the structure constants by this amount before running.
    #[serde(default)]
    pub perturb_structure_constants: Option<f64>,
}

fn default_ts() -> Vec<f64> {
    vec![0.1, 0.5, 1.0]
}
fn default_n() -> usize {
    12
}
fn default_seed() -> u64 {
    42
}
fn all_suites() -> Vec<String> {
    SUITES.iter().map(|s| s.to_string()).collect()
}
fn default_band() -> usize {
    2
}
fn default_cases() -> usize {
    5
}
fn default_bound_samples() -> usize {
    10_000
}

impl Config {
    pub fn for_group(group: &str) -> Self {
        serde_json::from_value(serde_json::json!({ "group": group })).expect("defaults are valid")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let c: Config = serde_json::from_str(s).map_err(|e| HeatlabError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// The group, with structure constants corrupted if requested. Invariants are not checked here.
    pub fn build_group(&self) -> Result<CompactGroup> {
        let g = CompactGroup::from_descriptor(&self.group)
            .or_else(|_| match &self.group {
                serde_json::Value::String(s) => CompactGroup::parse(s),
                other => Err(HeatlabError::UnsupportedGroup(other.to_string())),
            })
            .map_err(|e| HeatlabError::Config(format!("group: {e}")))?;
        Ok(match self.perturb_structure_constants {
            Some(eps) => g.with_perturbed_structure(eps),
            None => g,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(HeatlabError::Config(m));
        self.build_group()?;
        if self.t_ladder.is_empty() {
            return err("t_ladder must not be empty".into());
        }
        if let Some(t) = self.t_ladder.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return err(format!("t_ladder entries must be positive, got {t}"));
        }
        if self.n == 0 {
            return err("N must be at least 1".into());
        }
        if self.n > MAX_N {
            return Err(HeatlabError::ResourceCap {
                what: "Fock truncation N",
                needed: self.n,
                limit: MAX_N,
            });
        }
        if self.mc.samples < 2 || self.mc.mesh == 0 {
            return err("mc.samples must be at least 2 and mc.mesh at least 1".into());
        }
        let work = self.mc.samples as u64 * self.mc.mesh as u64;
        if work > MAX_MC_WORK {
            return Err(HeatlabError::ResourceCap {
                what: "Monte Carlo samples * mesh",
                needed: work.min(usize::MAX as u64) as usize,
                limit: MAX_MC_WORK as usize,
            });
        }
        if let Some(s) = self.suites.iter().find(|s| !SUITES.contains(&s.as_str())) {
            return err(format!(
                "unknown suite `{s}`; known suites: {}",
                SUITES.join(", ")
            ));
        }
        if self.cases == 0 {
            return err("cases must be at least 1".into());
        }
        if let Some(e) = &self.exactness {
            let g = self.build_group()?;
            if e.len() != g.factors().len() {
                return err(format!(
                    "exactness needs one entry per factor ({})",
                    g.factors().len()
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = Config::from_json_str(r#"{"group": "torus:1"}"#).unwrap();
        assert_eq!(c.t_ladder, vec![0.1, 0.5, 1.0]);
        assert_eq!(c.suites.len(), SUITES.len());
        assert_eq!(c.mc, McBudget::default());
    }

    #[test]
    fn schema_violations() {
        assert!(Config::from_json_str(r#"{"group": "torus:1", "bogus": 1}"#).is_err());
        assert!(Config::from_json_str(r#"{"group": "so3"}"#).is_err());
        assert!(Config::from_json_str(r#"{"group": "su2", "t_ladder": [-1]}"#).is_err());
        assert!(Config::from_json_str(r#"{"group": "su2", "suites": ["nope"]}"#).is_err());
        assert!(Config::from_json_str(r#"{"group": "su2", "exactness": [4, 4]}"#).is_err());
        assert!(matches!(
            Config::from_json_str(r#"{"group": "su2", "N": 1000}"#),
            Err(HeatlabError::ResourceCap { .. })
        ));
    }

    #[test]
    fn product_descriptors() {
        let c = Config::from_json_str(r#"{"group": {"product": ["torus:1", "su2"]}}"#).unwrap();
        assert_eq!(c.build_group().unwrap().dim(), 4);
        let c = Config::from_json_str(r#"{"group": "torus:1,su2"}"#).unwrap();
        assert_eq!(c.build_group().unwrap().dim(), 4);
    }
}
