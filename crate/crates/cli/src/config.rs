//! Pipeline configuration file (TOML) and its validation.
//!
//! One file captures every decision of a run: catalog source or synthesis
//! parameters, encoder settings, split rule, and per-stage training
//! hyperparameters. Command-line `--seed` and `--out` override the file.

use crate::error::CliError;
use chrono::NaiveDate;
use quakecast_core::features::{InputVariable, OutputVariable, SplitRule, UnknownZonePolicy};
use quakecast_core::harness::ModelKind;
use quakecast_core::network::{LayerKind, LayerSpec, NetworkSpec};
use quakecast_core::{SynthRegion, TrainingConfig, UpdateRule};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub catalog: CatalogSection,
    #[serde(default)]
    pub encoder: EncoderSection,
    pub split: SplitSection,
    #[serde(default)]
    pub compare: CompareSection,
    #[serde(default, rename = "final")]
    pub final_stage: FinalSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogSection {
    /// Path to an existing catalog CSV. Exactly one of `source` and `synth`
    /// must be present.
    pub source: Option<PathBuf>,
    pub synth: Option<SynthSection>,
    /// Records at or below this magnitude are dropped.
    #[serde(default = "default_min_magnitude")]
    pub min_magnitude: f64,
    pub date_start: Option<NaiveDate>,
    pub date_end: Option<NaiveDate>,
    /// Abort on the first malformed row instead of skipping it.
    #[serde(default = "default_true")]
    pub strict: bool,
}

fn default_min_magnitude() -> f64 {
    4.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub count: usize,
    #[serde(default = "SynthSection::default_lat")]
    pub lat_range: [f64; 2],
    #[serde(default = "SynthSection::default_lon")]
    pub lon_range: [f64; 2],
    #[serde(default = "SynthSection::default_depth")]
    pub max_depth_km: f64,
    #[serde(default = "SynthSection::default_start")]
    pub date_start: NaiveDate,
    #[serde(default = "SynthSection::default_end")]
    pub date_end: NaiveDate,
    #[serde(default = "SynthSection::default_floor")]
    pub magnitude_floor: f64,
    #[serde(default = "SynthSection::default_cap")]
    pub magnitude_cap: f64,
    #[serde(default = "SynthSection::default_rate")]
    pub magnitude_rate: f64,
    #[serde(default = "SynthSection::default_grid")]
    pub zone_grid: [usize; 2],
}

impl SynthSection {
    fn default_lat() -> [f64; 2] {
        [14.0, 33.0]
    }
    fn default_lon() -> [f64; 2] {
        [-118.0, -86.0]
    }
    fn default_depth() -> f64 {
        250.0
    }
    fn default_start() -> NaiveDate {
        NaiveDate::from_ymd_opt(2006, 3, 2).unwrap()
    }
    fn default_end() -> NaiveDate {
        NaiveDate::from_ymd_opt(2013, 5, 1).unwrap()
    }
    fn default_floor() -> f64 {
        4.0
    }
    fn default_cap() -> f64 {
        8.5
    }
    fn default_rate() -> f64 {
        2.0
    }
    fn default_grid() -> [usize; 2] {
        [3, 3]
    }

    pub fn region(&self) -> SynthRegion {
        SynthRegion {
            lat_range: (self.lat_range[0], self.lat_range[1]),
            lon_range: (self.lon_range[0], self.lon_range[1]),
            max_depth_km: self.max_depth_km,
            date_range: (self.date_start, self.date_end),
            magnitude_floor: self.magnitude_floor,
            magnitude_cap: self.magnitude_cap,
            magnitude_rate: self.magnitude_rate,
            zone_grid: (self.zone_grid[0], self.zone_grid[1]),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderSection {
    #[serde(default = "EncoderSection::default_inputs")]
    pub inputs: Vec<InputVariable>,
    #[serde(default = "EncoderSection::default_outputs")]
    pub outputs: Vec<OutputVariable>,
    /// Empty list: derive the vocabulary from the filtered catalog (sorted
    /// unique zone labels).
    #[serde(default)]
    pub zone_vocabulary: Vec<String>,
    #[serde(default = "SynthSection::default_start")]
    pub epoch_origin: NaiveDate,
    #[serde(default)]
    pub unknown_zone: UnknownZonePolicy,
}

impl EncoderSection {
    fn default_inputs() -> Vec<InputVariable> {
        vec![
            InputVariable::Date,
            InputVariable::Hour,
            InputVariable::Minute,
            InputVariable::Zone,
        ]
    }
    fn default_outputs() -> Vec<OutputVariable> {
        vec![
            OutputVariable::Latitude,
            OutputVariable::Longitude,
            OutputVariable::Magnitude,
        ]
    }
}

impl Default for EncoderSection {
    fn default() -> Self {
        Self {
            inputs: Self::default_inputs(),
            outputs: Self::default_outputs(),
            zone_vocabulary: Vec::new(),
            epoch_origin: SynthSection::default_start(),
            unknown_zone: UnknownZonePolicy::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    pub counts: Option<[usize; 3]>,
    pub proportions: Option<[f64; 3]>,
}

impl SplitSection {
    pub fn rule(&self) -> Result<SplitRule, CliError> {
        match (self.counts, self.proportions) {
            (Some(counts), None) => Ok(SplitRule::Counts(counts)),
            (None, Some(props)) => Ok(SplitRule::Proportions(props)),
            _ => Err(CliError::Config(
                "[split] needs exactly one of `counts` or `proportions`".into(),
            )),
        }
    }
}

/// Training hyperparameters as they appear in the file. The stage seed is
/// derived from the top-level seed, never configured here.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    pub rule: Option<UpdateRule>,
    pub learning_rate: f64,
    pub momentum_coefficient: f64,
    pub quickprop_max_growth: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub target_training_error: f64,
    pub shuffle_each_epoch: bool,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let base = TrainingConfig::default();
        Self {
            rule: None,
            learning_rate: base.learning_rate,
            momentum_coefficient: base.momentum_coefficient,
            quickprop_max_growth: base.quickprop_max_growth,
            max_epochs: base.max_epochs,
            patience: base.patience,
            target_training_error: base.target_training_error,
            shuffle_each_epoch: base.shuffle_each_epoch,
        }
    }
}

impl TrainingSection {
    pub fn to_core(&self, fallback_rule: UpdateRule, seed: u64) -> TrainingConfig {
        TrainingConfig {
            rule: self.rule.unwrap_or(fallback_rule),
            learning_rate: self.learning_rate,
            momentum_coefficient: self.momentum_coefficient,
            quickprop_max_growth: self.quickprop_max_growth,
            max_epochs: self.max_epochs,
            patience: self.patience,
            target_training_error: self.target_training_error,
            seed,
            shuffle_each_epoch: self.shuffle_each_epoch,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    pub models: Vec<ModelKind>,
    pub preliminary_samples: usize,
    /// When set, overrides the per-model rule pairing for every candidate.
    pub rule_override: Option<UpdateRule>,
    pub training: TrainingSection,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            models: vec![ModelKind::Mlp, ModelKind::RadialGeneral, ModelKind::RbfMlp],
            preliminary_samples: 200,
            rule_override: None,
            training: TrainingSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct FinalSection {
    /// Hidden-layer stack as `kind:units` entries (`radial:100`, `tanh:50`).
    /// The linear output layer is appended automatically. Empty: the
    /// full-scale radial-100 stack.
    pub layers: Vec<String>,
    pub training: TrainingSection,
}

impl FinalSection {
    /// Resolves the configured stack to a spec, or `None` for the default.
    pub fn spec_override(
        &self,
        input_width: usize,
        output_width: usize,
    ) -> Result<Option<NetworkSpec>, CliError> {
        if self.layers.is_empty() {
            return Ok(None);
        }
        let mut layers = Vec::with_capacity(self.layers.len() + 1);
        for (i, entry) in self.layers.iter().enumerate() {
            let (kind, units) = entry.split_once(':').ok_or_else(|| {
                CliError::Config(format!("[final] layers[{i}]: expected `kind:units`, got `{entry}`"))
            })?;
            let units: usize = units.parse().map_err(|_| {
                CliError::Config(format!("[final] layers[{i}]: bad unit count in `{entry}`"))
            })?;
            let kind = match kind {
                "radial" => LayerKind::RadialGaussian,
                "tanh" => LayerKind::DenseTanh,
                other => {
                    return Err(CliError::Config(format!(
                        "[final] layers[{i}]: unknown layer kind `{other}` (use radial or tanh)"
                    )))
                }
            };
            layers.push(LayerSpec::new(kind, units));
        }
        layers.push(LayerSpec::new(LayerKind::DenseLinear, output_width));
        Ok(Some(NetworkSpec {
            input_width,
            layers,
            output_width,
        }))
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: PipelineConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match (&self.catalog.source, &self.catalog.synth) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(CliError::Config(
                    "[catalog] needs exactly one of `source` or `synth`".into(),
                ))
            }
            _ => {}
        }
        if self.catalog.date_start.is_some() != self.catalog.date_end.is_some() {
            return Err(CliError::Config(
                "[catalog] date_start and date_end must be given together".into(),
            ));
        }
        self.split.rule()?;
        if self.compare.models.is_empty() {
            return Err(CliError::Config("[compare] models must not be empty".into()));
        }
        Ok(())
    }

    pub fn date_window(&self) -> Option<(NaiveDate, NaiveDate)> {
        self.catalog.date_start.zip(self.catalog.date_end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 42
out_dir = "out"

[catalog.synth]
count = 100

[split]
proportions = [0.6, 0.2, 0.2]
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let config: PipelineConfig = toml::from_str(MINIMAL).unwrap();
        config.validate().unwrap();
        assert_eq!(config.seed, 42);
        assert_eq!(config.catalog.min_magnitude, 4.0);
        assert_eq!(config.compare.preliminary_samples, 200);
        assert_eq!(config.compare.models.len(), 3);
        assert!(config.final_stage.layers.is_empty());
        assert_eq!(config.encoder.inputs.len(), 4);
    }

    #[test]
    fn source_and_synth_are_mutually_exclusive() {
        let text = format!("{MINIMAL}\n[catalog]\nsource = \"x.csv\"\n");
        let both: PipelineConfig = toml::from_str(&text).unwrap();
        assert!(both.validate().is_err());

        let neither: &str = r#"
seed = 1
out_dir = "out"
[catalog]
min_magnitude = 4.0
[split]
counts = [1, 1, 1]
"#;
        let config: PipelineConfig = toml::from_str(neither).unwrap();
        assert!(config.validate().is_err());
    }

    #[test]
    fn split_rule_requires_exactly_one_form() {
        let both = SplitSection {
            counts: Some([1, 1, 1]),
            proportions: Some([0.4, 0.3, 0.3]),
        };
        assert!(both.rule().is_err());
        let counts = SplitSection { counts: Some([1, 1, 1]), proportions: None };
        assert_eq!(counts.rule().unwrap(), SplitRule::Counts([1, 1, 1]));
    }

    #[test]
    fn final_layer_strings_resolve_to_spec() {
        let section = FinalSection {
            layers: vec!["radial:20".into(), "tanh:60".into(), "tanh:20".into()],
            training: TrainingSection::default(),
        };
        let spec = section.spec_override(7, 3).unwrap().unwrap();
        assert_eq!(spec.unit_counts(), vec![20, 60, 20, 3]);
        assert_eq!(spec.layers[0].kind, LayerKind::RadialGaussian);
        assert_eq!(spec.layers[3].kind, LayerKind::DenseLinear);
        spec.validate().unwrap();
    }

    #[test]
    fn bad_layer_strings_are_config_errors() {
        for bad in ["radial", "dense:10", "tanh:x"] {
            let section = FinalSection {
                layers: vec![bad.to_string()],
                training: TrainingSection::default(),
            };
            assert!(section.spec_override(7, 3).is_err(), "{bad} should fail");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\nbogus_key = 1\n");
        assert!(toml::from_str::<PipelineConfig>(&text).is_err());
    }
}
