//! Comparison and final-training harness.
//!
//! [`run_comparison`] trains each candidate model on the same seeded prefix of
//! the training set, evaluates all three splits, and ranks the models by
//! validation MSE (production MSE, then parameter count break ties).
//! [`run_final`] trains the full-scale radial + dense stack and assembles its
//! metrics report. Both feed the plot-data emitters.

use crate::features::{DatasetSplit, EncoderConfig, Sample, ScalerParams};
use crate::metrics::{self, percent_error_per_variable, MetricsError, MetricsReport};
use crate::network::{
    build_network, final_network_spec, preliminary_network_spec, Network, NetworkError,
    NetworkSpec,
};
use crate::seed::derive_seed;
use crate::trainer::{self, StopReason, TrainError, TrainingConfig, TrainingHistory, UpdateRule};
use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub use crate::network::PreliminaryModel as ModelKind;

/// Candidate names reserved for models that are recognized but not built
/// (recurrent variants); they keep multi-model figure layouts stable.
pub const RESERVED_MODEL_NAMES: [&str; 2] = ["time_series_recurrent", "generalized_recurrent"];

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Mlp => "mlp",
            ModelKind::RadialGeneral => "radial_general",
            ModelKind::RbfMlp => "rbf_mlp",
        }
    }

    /// Default update-rule pairing: momentum for the plain perceptron,
    /// Quickprop for the radial models.
    pub fn default_rule(self) -> UpdateRule {
        match self {
            ModelKind::Mlp => UpdateRule::Momentum,
            _ => UpdateRule::Quickprop,
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("insufficient samples: need {needed}, have {available}")]
    InsufficientSamples { needed: usize, available: usize },
    #[error("invalid harness config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Settings for one comparison run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonConfig {
    pub training: TrainingConfig,
    /// Training-subset size for every preliminary model.
    pub preliminary_sample_count: usize,
    /// When set, every model trains under this rule instead of its
    /// per-model default pairing.
    pub rule_override: Option<UpdateRule>,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            training: TrainingConfig::default(),
            preliminary_sample_count: 200,
            rule_override: None,
        }
    }
}

/// Final errors of one model on one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub mse: f64,
    pub percent_error: IndexMap<String, f64>,
    pub percent_error_mean: f64,
}

/// One trained candidate's results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub model: String,
    pub rule: UpdateRule,
    pub parameter_count: usize,
    pub training: SplitSummary,
    pub validation: SplitSummary,
    pub production: SplitSummary,
    pub cycles: usize,
    pub stop_reason: StopReason,
}

/// Outcome of [`run_comparison`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub models: Vec<ModelResult>,
    /// Model names ordered best first.
    pub ranking: Vec<String>,
    pub selected: String,
    pub models_not_implemented: Vec<String>,
    pub seed: u64,
    pub preliminary_sample_count: usize,
    pub training_config: TrainingConfig,
}

fn split_summary(
    net: &Network,
    samples: &[Sample],
    scaler: &ScalerParams,
    names: &[&'static str],
) -> Result<SplitSummary, HarnessError> {
    let stats = trainer::evaluate(net, samples)?;
    let mut predictions_raw = Vec::with_capacity(samples.len());
    let mut targets_raw = Vec::with_capacity(samples.len());
    for sample in samples {
        let pred = net.forward(&sample.inputs)?;
        predictions_raw.push(crate::features::invert_scaler(scaler, &pred));
        targets_raw.push(sample.targets_raw.clone());
    }
    let percents = percent_error_per_variable(&predictions_raw, &targets_raw, scaler)?;
    let percent_error: IndexMap<String, f64> = names
        .iter()
        .map(|n| n.to_string())
        .zip(percents.iter().copied())
        .collect();
    let percent_error_mean = percents.iter().sum::<f64>() / percents.len() as f64;
    Ok(SplitSummary {
        mse: stats.mse,
        percent_error,
        percent_error_mean,
    })
}

/// The training subset used by every preliminary model: the first `count`
/// entries of one seeded shuffle of the training indices. Growing `count` by
/// one therefore adds exactly one sample.
pub fn preliminary_subset_indices(training_len: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..training_len).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "comparison-subset"));
    indices.shuffle(&mut rng);
    indices.truncate(count);
    indices
}

/// Ranking order over model results: ascending validation MSE, ties broken by
/// production MSE, then by parameter count.
pub fn rank_models(results: &[ModelResult]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..results.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&results[a], &results[b]);
        ra.validation
            .mse
            .total_cmp(&rb.validation.mse)
            .then(ra.production.mse.total_cmp(&rb.production.mse))
            .then(ra.parameter_count.cmp(&rb.parameter_count))
    });
    order
}

/// Trains every candidate on the shared preliminary subset and ranks them.
pub fn run_comparison(
    dataset: &DatasetSplit,
    scaler: &ScalerParams,
    encoder: &EncoderConfig,
    models: &[ModelKind],
    config: &ComparisonConfig,
) -> Result<ComparisonReport, HarnessError> {
    if models.is_empty() {
        return Err(HarnessError::InvalidConfig("no models to compare".into()));
    }
    if config.preliminary_sample_count == 0 {
        return Err(HarnessError::InvalidConfig(
            "preliminary_sample_count must be >= 1".into(),
        ));
    }
    if config.preliminary_sample_count > dataset.training.len() {
        return Err(HarnessError::InsufficientSamples {
            needed: config.preliminary_sample_count,
            available: dataset.training.len(),
        });
    }

    let seed = config.training.seed;
    let subset_indices = preliminary_subset_indices(
        dataset.training.len(),
        config.preliminary_sample_count,
        seed,
    );
    let subset: Vec<Sample> = subset_indices
        .iter()
        .map(|&i| dataset.training[i].clone())
        .collect();
    let center_data: Vec<Vec<f64>> = subset.iter().map(|s| s.inputs.clone()).collect();
    let names = encoder.output_names();

    let mut results = Vec::with_capacity(models.len());
    for model in models {
        let spec = preliminary_network_spec(*model, encoder.input_width(), encoder.output_width());
        let net = build_network(
            &spec,
            derive_seed(seed, &format!("init:{}", model.name())),
            Some(&center_data),
        )?;
        let mut training_config = config.training.clone();
        training_config.rule = config.rule_override.unwrap_or_else(|| model.default_rule());
        training_config.seed = derive_seed(seed, &format!("train:{}", model.name()));

        let run_split = DatasetSplit {
            training: subset.clone(),
            validation: dataset.validation.clone(),
            production: dataset.production.clone(),
        };
        let (trained, history) = trainer::train(net, &run_split, &training_config)?;

        results.push(ModelResult {
            model: model.name().to_string(),
            rule: training_config.rule,
            parameter_count: spec.parameter_count(),
            training: split_summary(&trained, &run_split.training, scaler, &names)?,
            validation: split_summary(&trained, &run_split.validation, scaler, &names)?,
            production: split_summary(&trained, &run_split.production, scaler, &names)?,
            cycles: history.cycles,
            stop_reason: history.stop_reason,
        });
    }

    let ranking: Vec<String> = rank_models(&results)
        .into_iter()
        .map(|i| results[i].model.clone())
        .collect();
    let selected = ranking[0].clone();
    Ok(ComparisonReport {
        models: results,
        ranking,
        selected,
        models_not_implemented: RESERVED_MODEL_NAMES.iter().map(|s| s.to_string()).collect(),
        seed,
        preliminary_sample_count: config.preliminary_sample_count,
        training_config: config.training.clone(),
    })
}

/// Settings for the final training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct FinalConfig {
    pub training: TrainingConfig,
    /// Replaces the full-scale topology, for reduced desk-scale runs.
    pub spec_override: Option<NetworkSpec>,
}

/// Trains the final network on the full training split and assembles the
/// metrics report.
pub fn run_final(
    dataset: &DatasetSplit,
    scaler: &ScalerParams,
    encoder: &EncoderConfig,
    config: &FinalConfig,
) -> Result<(Network, MetricsReport, TrainingHistory), HarnessError> {
    let spec = match &config.spec_override {
        Some(spec) => {
            spec.validate()?;
            spec.clone()
        }
        None => final_network_spec(encoder.input_width(), encoder.output_width()),
    };
    if spec.input_width != encoder.input_width() || spec.output_width != encoder.output_width() {
        return Err(HarnessError::InvalidConfig(format!(
            "spec is {}x{} but the encoder produces {}x{}",
            spec.input_width,
            spec.output_width,
            encoder.input_width(),
            encoder.output_width()
        )));
    }
    let center_data: Vec<Vec<f64>> = dataset.training.iter().map(|s| s.inputs.clone()).collect();
    let net = build_network(
        &spec,
        derive_seed(config.training.seed, "init:final"),
        Some(&center_data),
    )?;
    let mut training_config = config.training.clone();
    training_config.seed = derive_seed(config.training.seed, "train:final");
    let (trained, history) = trainer::train(net, dataset, &training_config)?;
    let report = metrics::build_report(&trained, dataset, scaler, &history, encoder)?;
    Ok((trained, report, history))
}

/// Comparison figure targets: one CSV per split.
pub const COMPARISON_FIG_FILES: [(&str, &str); 3] = [
    ("fig2_validation.csv", "validation"),
    ("fig3_training.csv", "training"),
    ("fig4_production.csv", "production"),
];

/// Writes the per-model error CSVs (`model,mse,percent_error_mean`), one row
/// per model in list order. Returns the written paths.
pub fn emit_comparison_figs(
    report: &ComparisonReport,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::with_capacity(COMPARISON_FIG_FILES.len());
    for (file, split) in COMPARISON_FIG_FILES {
        let path = out_dir.join(file);
        let mut out = fs::File::create(&path)?;
        writeln!(out, "model,mse,percent_error_mean")?;
        for model in &report.models {
            let summary = match split {
                "training" => &model.training,
                "validation" => &model.validation,
                _ => &model.production,
            };
            writeln!(out, "{},{},{}", model.model, summary.mse, summary.percent_error_mean)?;
        }
        written.push(path);
    }
    Ok(written)
}

/// Writes the actual-versus-predicted CSV (`index,variable,actual,predicted`)
/// for every sample and output variable, in raw units. Rows iterate samples
/// in order with one row per output variable each.
pub fn emit_prediction_fig(
    net: &Network,
    samples: &[Sample],
    scaler: &ScalerParams,
    encoder: &EncoderConfig,
    path: &Path,
) -> Result<(), HarnessError> {
    let names = encoder.output_names();
    let mut out = fs::File::create(path)?;
    writeln!(out, "index,variable,actual,predicted")?;
    for (index, sample) in samples.iter().enumerate() {
        let pred = net.forward(&sample.inputs)?;
        let pred_raw = crate::features::invert_scaler(scaler, &pred);
        for (v, name) in names.iter().enumerate() {
            writeln!(out, "{index},{name},{},{}", sample.targets_raw[v], pred_raw[v])?;
        }
    }
    Ok(())
}
