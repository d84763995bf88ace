use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{default_weights, DiagnosticOptions, Domain};
use crate::spectral::{EmbeddingOptions, ZeroTolerance};

/// Every tunable of the pipeline. Loaded from a TOML file (flat
/// `key = value` lines work) and overridden by command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub k_neighbors: usize,
    pub n_eigenvectors: usize,
    pub zero_tolerance_rel: f64,
    pub classification_threshold: f64,
    /// Nonzero eigenvector (1-based) used for classification.
    pub classify_eigenvector: usize,
    pub domain_weights: BTreeMap<Domain, f64>,
    pub strong_domains: Vec<Domain>,
    pub weak_domains: Vec<Domain>,
    pub diagnostic_percentile: f64,
    pub rank_universe: Option<u32>,
    /// Ground truth by rank when no explicit code list is given.
    pub deprived_rank_cutoff: Option<u32>,
    pub clamp_coincident: bool,
    pub dense_solver_cutoff: usize,
    pub id_column: String,
    pub code_property: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 10,
            n_eigenvectors: 2,
            zero_tolerance_rel: 1e-9,
            classification_threshold: 0.02365,
            classify_eigenvector: 2,
            domain_weights: default_weights(),
            strong_domains: Domain::default_strong(),
            weak_domains: Domain::default_weak(),
            diagnostic_percentile: 0.1,
            rank_universe: None,
            deprived_rank_cutoff: None,
            clamp_coincident: false,
            dense_solver_cutoff: 500,
            id_column: "area_code".into(),
            code_property: "area_code".into(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.k_neighbors < 1 {
            return fail("k_neighbors must be at least 1");
        }
        if self.n_eigenvectors < 1 {
            return fail("n_eigenvectors must be at least 1");
        }
        if self.classify_eigenvector < 1 || self.classify_eigenvector > self.n_eigenvectors {
            return fail("classify_eigenvector must lie in 1..=n_eigenvectors");
        }
        if !(self.zero_tolerance_rel.is_finite() && self.zero_tolerance_rel >= 0.0) {
            return fail("zero_tolerance_rel must be a non-negative number");
        }
        if !self.classification_threshold.is_finite() {
            return fail("classification_threshold must be finite");
        }
        for d in Domain::ALL {
            match self.domain_weights.get(&d) {
                Some(w) if w.is_finite() && *w > 0.0 => {}
                Some(_) => return Err(Error::InvalidWeight(d.name().into())),
                None => return Err(Error::MissingDomain(d.name().into())),
            }
        }
        if !(self.diagnostic_percentile > 0.0 && self.diagnostic_percentile < 0.5) {
            return fail("diagnostic_percentile must lie in (0, 0.5)");
        }
        Ok(())
    }

    pub fn embedding_options(&self) -> EmbeddingOptions {
        EmbeddingOptions {
            n_eigenvectors: self.n_eigenvectors,
            zero_tolerance: ZeroTolerance::Relative(self.zero_tolerance_rel),
            dense_cutoff: self.dense_solver_cutoff,
            ..Default::default()
        }
    }

    pub fn diagnostic_options(&self) -> DiagnosticOptions {
        DiagnosticOptions {
            strong_domains: self.strong_domains.clone(),
            weak_domains: self.weak_domains.clone(),
            percentile: self.diagnostic_percentile,
            rank_universe: self.rank_universe,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = PipelineConfig::default();
        c.validate().unwrap();
        assert_eq!(c.k_neighbors, 10);
        assert_eq!(c.classification_threshold, 0.02365);
    }

    #[test]
    fn flat_key_values_override_defaults() {
        let c = PipelineConfig::from_toml("k_neighbors = 6\nclamp_coincident = true\n").unwrap();
        assert_eq!(c.k_neighbors, 6);
        assert!(c.clamp_coincident);
        assert_eq!(c.n_eigenvectors, 2);
    }

    #[test]
    fn weights_table_and_validation() {
        let text = "[domain_weights]\nIncome = 1\nEmployment = 1\nHealth = 1\nEducation = 1\nBarriers = 1\nCrime = 1\nLivingEnvironment = 1\n";
        let c = PipelineConfig::from_toml(text).unwrap();
        assert_eq!(c.domain_weights[&Domain::Crime], 1.0);
        assert!(PipelineConfig::from_toml("k_neighbors = 0").is_err());
        assert!(PipelineConfig::from_toml("bogus = 1").is_err());
        assert!(PipelineConfig::from_toml("n_eigenvectors = 1").is_err());
    }
}
