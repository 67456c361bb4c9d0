use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::thesaurus::Facet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Cosine over hierarchy-expanded descriptor vectors.
    #[default]
    Cosine,
    /// Jaccard over the raw descriptor sets.
    Jaccard,
}

/// How descriptor vectors are built and compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightingConfig {
    #[serde(default)]
    pub metric: Metric,
    #[serde(default = "default_decay")]
    pub ancestor_decay: f64,
    #[serde(default)]
    pub max_depth: Option<u32>,
    #[serde(default)]
    pub facet_weights: BTreeMap<Facet, f64>,
}

fn default_decay() -> f64 {
    0.5
}

impl Default for WeightingConfig {
    fn default() -> Self {
        WeightingConfig {
            metric: Metric::Cosine,
            ancestor_decay: default_decay(),
            max_depth: None,
            facet_weights: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("malformed weighting config: {0}")]
    Parse(String),
    #[error("ancestor_decay must lie in [0, 1], got {0}")]
    Decay(f64),
    #[error("facet weight for {facet} must be finite and > 0, got {weight}")]
    FacetWeight { facet: Facet, weight: f64 },
}

impl WeightingConfig {
    pub fn from_json(source: &[u8]) -> Result<Self, ConfigError> {
        let cfg: WeightingConfig =
            serde_json::from_slice(source).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.ancestor_decay) {
            return Err(ConfigError::Decay(self.ancestor_decay));
        }
        for (&facet, &weight) in &self.facet_weights {
            if !(weight.is_finite() && weight > 0.0) {
                return Err(ConfigError::FacetWeight { facet, weight });
            }
        }
        Ok(())
    }

    /// Weight for `facet`; omitted facets weigh 1.0.
    pub fn facet_weight(&self, facet: Facet) -> f64 {
        self.facet_weights.get(&facet).copied().unwrap_or(1.0)
    }

    /// Same config with every facet weight (including defaulted ones)
    /// multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.facet_weights = Facet::ALL
            .into_iter()
            .map(|f| (f, self.facet_weight(f) * factor))
            .collect();
        out
    }

    pub fn max_facet_weight(&self) -> f64 {
        Facet::ALL
            .into_iter()
            .map(|f| self.facet_weight(f))
            .fold(0.0, f64::max)
    }
}
