//! Experiment definitions, read from JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientSpec, Regime, SlowlyVarying};
use crate::error::{Error, Result};
use crate::noise::NoiseSpec;
use crate::partial_sums::TimeGrid;
use crate::process::{ChaosProcessSpec, SimulationOptions};

/// Block of a component in the mixed limit theorem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    /// Short memory, order 1.
    S1,
    /// Short memory, order at least 2.
    S2,
    /// Long memory.
    L,
}

impl Block {
    /// The block implied by a component's regime and order.
    pub fn of(spec: &ChaosProcessSpec) -> Result<Block> {
        match (spec.regime().regime, spec.order()) {
            (Regime::Srd, 1) => Ok(Block::S1),
            (Regime::Srd, _) => Ok(Block::S2),
            (Regime::Lrd, _) => Ok(Block::L),
            (Regime::Boundary, k) => Err(Error::regime(
                spec.label(),
                format!("d = {} sits on the order-{k} boundary; no limit theorem applies", spec.regime().d),
            )),
        }
    }
}

/// Coefficients as written in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientConfig {
    /// `a_i = i^(d-1) L(i)`; `truncation` defaults to `N`.
    RegVar {
        d: f64,
        #[serde(default)]
        l: SlowlyVarying,
        #[serde(default)]
        truncation: Option<usize>,
    },
    Explicit { values: Vec<f64> },
    BoundedDecay { d: f64, c: f64, values: Vec<f64> },
    /// `a_i = ratio^(i-1)`, `i = 1..=len`.
    Geometric { ratio: f64, len: usize },
}

impl CoefficientConfig {
    pub fn to_spec(&self, n: usize) -> CoefficientSpec {
        match self {
            CoefficientConfig::RegVar { d, l, truncation } => {
                CoefficientSpec::reg_var(*d, *l, truncation.unwrap_or(n))
            }
            CoefficientConfig::Explicit { values } => CoefficientSpec::explicit(values.clone()),
            CoefficientConfig::BoundedDecay { d, c, values } => CoefficientSpec {
                family: crate::coefficients::CoefficientFamily::BoundedDecay { d: *d, c: *c, values: values.clone() },
                truncation: values.len(),
            },
            CoefficientConfig::Geometric { ratio, len } => CoefficientSpec::geometric(*ratio, *len),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub label: String,
    pub order: usize,
    pub coefficients: CoefficientConfig,
    /// Declared block; checked against regime and order.
    #[serde(default)]
    pub block: Option<Block>,
}

fn default_n() -> usize {
    1 << 14
}
fn default_r() -> usize {
    2000
}
fn default_threshold() -> f64 {
    4.0
}

/// Thresholds in standard errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub z: f64,
    /// Add distance correlation to the independence diagnostics (`O(R^2)`).
    pub distance_correlation: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { z: default_threshold(), distance_correlation: false }
    }
}

/// A complete Monte Carlo experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_r")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_noise")]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub grid: TimeGrid,
    #[serde(default)]
    pub simulation: SimulationOptions,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub components: Vec<ComponentConfig>,
}

fn default_noise() -> NoiseSpec {
    NoiseSpec::Gaussian
}

fn scoped(e: Error, scope: &str) -> Error {
    match e {
        Error::InvalidParameter { field, reason } => Error::invalid(format!("{scope}.{field}"), reason),
        other => other,
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::Config(format!("{}:{}:{}: {j}", path.display(), j.line(), j.column())),
            other => other,
        })
    }

    /// Evaluated components with their blocks; checks every field.
    pub fn specs(&self) -> Result<Vec<(ChaosProcessSpec, Block)>> {
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let scope = format!("components[{i}]");
                let spec = ChaosProcessSpec::new(c.label.clone(), c.coefficients.to_spec(self.n), c.order)
                    .map_err(|e| match e {
                        Error::InvalidParameter { field, reason } if field == "order" => {
                            Error::invalid(format!("{scope}.order"), reason)
                        }
                        other => scoped(other, &format!("{scope}.coefficients")),
                    })?;
                let block = Block::of(&spec)?;
                if let Some(declared) = c.block {
                    if declared != block {
                        return Err(Error::invalid(
                            format!("{scope}.block"),
                            format!("declared {declared:?} but regime and order imply {block:?}"),
                        ));
                    }
                }
                Ok((spec, block))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::invalid("components", "at least one component is required"));
        }
        if self.n < 2 {
            return Err(Error::invalid("n", "path length must be at least 2"));
        }
        if self.replications < 1 {
            return Err(Error::invalid("replications", "need at least 1 replication"));
        }
        if !(self.tolerances.z > 0.0) {
            return Err(Error::invalid("tolerances.z", "must be positive"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, c) in self.components.iter().enumerate() {
            if !seen.insert(&c.label) {
                return Err(Error::invalid(format!("components[{i}].label"), "duplicate label"));
            }
        }
        self.specs().map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIXED: &str = r#"{
        "n": 1024, "replications": 10, "seed": 7,
        "components": [
            {"label": "s1", "order": 1, "block": "s1",
             "coefficients": {"family": "explicit", "values": [0.5, 0.5]}},
            {"label": "s2", "order": 2, "block": "s2",
             "coefficients": {"family": "geometric", "ratio": 0.5, "len": 30}},
            {"label": "l", "order": 2, "block": "l",
             "coefficients": {"family": "reg_var", "d": 0.4}}
        ]
    }"#;

    #[test]
    fn parses_and_defaults() {
        let cfg = ExperimentConfig::from_json(MIXED).unwrap();
        assert_eq!(cfg.grid, TimeGrid::default());
        assert_eq!(cfg.noise, NoiseSpec::Gaussian);
        let specs = cfg.specs().unwrap();
        assert_eq!(specs[2].0.coeffs().truncation, 1024);
        assert_eq!(specs.iter().map(|s| s.1).collect::<Vec<_>>(), vec![Block::S1, Block::S2, Block::L]);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = MIXED.replace("\"d\": 0.4", "\"d\": 0.6");
        let e = ExperimentConfig::from_json(&bad).unwrap_err().to_string();
        assert!(e.contains("components[2].coefficients.d"), "{e}");

        let bad = MIXED.replace("\"block\": \"s2\"", "\"block\": \"l\"");
        let e = ExperimentConfig::from_json(&bad).unwrap_err().to_string();
        assert!(e.contains("components[1].block"), "{e}");

        let boundary = MIXED.replace("\"d\": 0.4", "\"d\": 0.25");
        assert!(matches!(ExperimentConfig::from_json(&boundary), Err(Error::Regime { .. })));

        let typo = MIXED.replace("\"seed\"", "\"sead\"");
        assert!(matches!(ExperimentConfig::from_json(&typo), Err(Error::Json(_))));
    }
}
