//! Named built-in models, as selected from JSON or the command line.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Example1, Example2, Example3, QuasiHermitianModel, RandomSmoothFamily};

pub const MODEL_NAMES: [&str; 4] = ["example1", "example2", "example3", "random"];

/// `{"model": "example2", "params": {"alpha": 1.5707963267948966}}`
///
/// Parameters: `example1` takes `B` and `gamma` (both absent selects the
/// smooth position-dependent variant), `example2` takes `alpha` (default
/// π/2), `random` takes `seed` (default 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ModelConfig {
    pub fn new(model: &str) -> Self {
        Self { model: model.to_string(), params: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn build(&self) -> Result<Box<dyn QuasiHermitianModel<f64>>> {
        let allowed: &[&str] = match self.model.as_str() {
            "example1" => &["B", "gamma"],
            "example2" => &["alpha"],
            "example3" => &[],
            "random" => &["seed"],
            other => {
                return Err(Error::ConfigInvalid(format!(
                    "unknown model {other:?}; expected one of {}",
                    MODEL_NAMES.join(", ")
                )))
            }
        };
        if let Some(k) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::ConfigInvalid(format!("model {} takes no parameter {k:?}", self.model)));
        }
        let get = |k: &str| self.params.get(k).copied();
        Ok(match self.model.as_str() {
            "example1" => match (get("B"), get("gamma")) {
                (None, None) => Box::new(Example1::smooth()),
                (b, g) => Box::new(Example1::constant(b.unwrap_or(2.0), g.unwrap_or(1.0))?),
            },
            "example2" => Box::new(Example2::new(get("alpha").unwrap_or(std::f64::consts::FRAC_PI_2))),
            "example3" => Box::new(Example3::new()),
            _ => {
                let seed = get("seed").unwrap_or(0.0);
                if seed < 0.0 || seed.fract() != 0.0 {
                    return Err(Error::ConfigInvalid(format!("seed must be a nonnegative integer, got {seed}")));
                }
                Box::new(RandomSmoothFamily::new(seed as u64))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_every_model() {
        for name in MODEL_NAMES {
            let m = ModelConfig::new(name).build().unwrap();
            assert_eq!(m.name(), name);
        }
        let cfg: ModelConfig = serde_json::from_str(r#"{"model":"example1","params":{"B":2.0,"gamma":1.0}}"#).unwrap();
        assert_eq!(cfg.build().unwrap().dim(), 2);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ModelConfig::new("example4").build().is_err());
        assert!(ModelConfig::new("example3").with("alpha", 1.0).build().is_err());
        assert!(ModelConfig::new("example1").with("B", 1.0).with("gamma", 2.0).build().is_err());
        assert!(ModelConfig::new("random").with("seed", 1.5).build().is_err());
    }
}
