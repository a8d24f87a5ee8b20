//! Pipeline configuration: relation presets, kernel and classifier settings.
//!
//! Values are layered: built-in defaults, then a TOML or JSON file, then
//! command-line overrides applied by the caller.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{MaxEntConfig, SmoConfig};
use crate::clusters::{DEFAULT_DISTANCE_THRESHOLD, DEFAULT_MIN_FREQ};
use crate::corpus::{AliasRuleSet, CorpusError, RelationSignature};
use crate::kernel::{KernelError, KernelParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed TOML config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("malformed JSON config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown relation preset '{0}' (expected Succession, Lives_In or Interact)")]
    UnknownPreset(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Signature(#[from] CorpusError),
}

/// Relation type plus its candidate filter and alias rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationConfig {
    pub name: String,
    pub arg_types: Vec<String>,
    /// Candidates with a larger minimal span are dropped.
    pub max_minimal_span: usize,
    pub alias_rules: AliasRuleSet,
}

impl RelationConfig {
    pub fn signature(&self) -> Result<RelationSignature, CorpusError> {
        RelationSignature::new(self.name.clone(), self.arg_types.iter().cloned())
    }
}

/// Built-in relation settings.
pub fn relation_presets() -> Vec<RelationConfig> {
    let preset = |name: &str, types: &[&str], span, rules| RelationConfig {
        name: name.into(),
        arg_types: types.iter().map(|t| t.to_string()).collect(),
        max_minimal_span: span,
        alias_rules: rules,
    };
    vec![
        preset("Succession", &["ORG", "POST", "PER", "PER"], 2, AliasRuleSet::General),
        preset("Lives_In", &["Bacteria", "Habitat"], 4, AliasRuleSet::BiomedicalBacteria),
        preset("Interact", &["Drug", "Gene", "Mutation"], 2, AliasRuleSet::BiomedicalPrefix),
    ]
}

pub fn relation_preset(name: &str) -> Result<RelationConfig, ConfigError> {
    relation_presets()
        .into_iter()
        .find(|p| p.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    #[default]
    Svm,
    Maxent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmConfig {
    pub c: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Weight positives by `#neg / #pos`.
    pub balance_classes: bool,
}

impl Default for SvmConfig {
    fn default() -> Self {
        let smo = SmoConfig::default();
        SvmConfig {
            c: 1.0,
            tolerance: smo.tolerance,
            max_iterations: smo.max_iterations,
            balance_classes: true,
        }
    }
}

impl SvmConfig {
    pub fn smo(&self) -> SmoConfig {
        SmoConfig {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            ..SmoConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaxEntSettings {
    pub l2: f64,
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    pub balance_classes: bool,
}

impl Default for MaxEntSettings {
    fn default() -> Self {
        let m = MaxEntConfig::default();
        MaxEntSettings {
            l2: m.l2,
            gradient_tolerance: m.gradient_tolerance,
            max_iterations: m.max_iterations,
            balance_classes: true,
        }
    }
}

impl MaxEntSettings {
    pub fn optimizer(&self) -> MaxEntConfig {
        MaxEntConfig {
            l2: self.l2,
            gradient_tolerance: self.gradient_tolerance,
            max_iterations: self.max_iterations,
            ..MaxEntConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterConfig {
    /// Word-to-cluster JSON produced by `cluster`; no clusters when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub min_freq: usize,
    pub distance_threshold: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            path: None,
            min_freq: DEFAULT_MIN_FREQ,
            distance_threshold: DEFAULT_DISTANCE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub relation: RelationConfig,
    pub kernel: KernelParams,
    pub classifier: ClassifierKind,
    pub svm: SvmConfig,
    pub maxent: MaxEntSettings,
    pub clusters: ClusterConfig,
    /// One stopword per line; the built-in list when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<PathBuf>,
    /// Seed for synthetic corpora.
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            relation: relation_preset("Lives_In").expect("built-in preset"),
            kernel: KernelParams::default(),
            classifier: ClassifierKind::default(),
            svm: SvmConfig::default(),
            maxent: MaxEntSettings::default(),
            clusters: ClusterConfig::default(),
            stopwords: None,
            seed: 7,
        }
    }
}

impl PipelineConfig {
    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: PipelineConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text)?
        } else {
            toml::from_str(text)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.kernel.validate()?;
        self.relation.signature()?;
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::Invalid(format!("{name} must be positive, got {v}")))
            }
        };
        positive("svm.c", self.svm.c)?;
        positive("svm.tolerance", self.svm.tolerance)?;
        positive("maxent.gradient_tolerance", self.maxent.gradient_tolerance)?;
        if !(self.maxent.l2.is_finite() && self.maxent.l2 >= 0.0) {
            return Err(ConfigError::Invalid(format!("maxent.l2 must be non-negative, got {}", self.maxent.l2)));
        }
        if !(0.0..=2.0).contains(&self.clusters.distance_threshold) {
            return Err(ConfigError::Invalid(format!(
                "clusters.distance_threshold must lie in [0, 2], got {}",
                self.clusters.distance_threshold
            )));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }
}

/// Defaults plus the preset table, as printed by `config`.
pub fn dump_defaults() -> String {
    #[derive(Serialize)]
    struct Dump {
        #[serde(flatten)]
        config: PipelineConfig,
        presets: Vec<RelationConfig>,
    }
    toml::to_string_pretty(&Dump {
        config: PipelineConfig::default(),
        presets: relation_presets(),
    })
    .expect("defaults serialize to TOML")
}
