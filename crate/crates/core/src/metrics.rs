//! Evaluation metrics and report assembly.
//!
//! Error definitions used throughout the toolkit:
//!
//! - MSE: mean over samples of the mean squared componentwise difference,
//!   computed in normalized space.
//! - NMSE: MSE divided by the MSE of the constant componentwise-mean
//!   predictor; 1.0 means "no better than predicting the mean".
//! - Percent error per variable: 100 times the mean absolute error divided by
//!   the variable's fitted raw-unit range. This is the range-normalized mean
//!   absolute error, equivalently the normalized-space MAE times 100; it is
//!   this toolkit's reading of "average percent error", chosen so variables
//!   on different raw scales stay comparable.
//! - Aggregate percent error: the unweighted mean of the per-variable percent
//!   errors on the production split.

use crate::features::{DatasetSplit, EncoderConfig, Sample, ScalerParams};
use crate::network::{Network, NetworkError};
use crate::trainer::TrainingHistory;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty input")]
    EmptyInput,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("target component {component} has zero variance")]
    ZeroVariance { component: usize },
    #[error("variable `{name}` has no usable range")]
    DegenerateVariable { name: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

fn check_shapes(predictions: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<usize, MetricsError> {
    if predictions.is_empty() || targets.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if predictions.len() != targets.len() {
        return Err(MetricsError::DimensionMismatch(format!(
            "{} predictions vs {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    let width = targets[0].len();
    for (p, t) in predictions.iter().zip(targets) {
        if p.len() != width || t.len() != width {
            return Err(MetricsError::DimensionMismatch(format!(
                "inconsistent vector width (expected {width})"
            )));
        }
    }
    Ok(width)
}

/// Mean over samples of the mean squared componentwise difference.
pub fn mse(predictions: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64, MetricsError> {
    let width = check_shapes(predictions, targets)?;
    let total: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| {
            p.iter()
                .zip(t)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                / width as f64
        })
        .sum();
    Ok(total / predictions.len() as f64)
}

/// MSE normalized by the MSE of the constant mean-of-targets predictor.
pub fn nmse(predictions: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64, MetricsError> {
    let width = check_shapes(predictions, targets)?;
    let n = targets.len() as f64;
    let mut means = vec![0.0; width];
    for t in targets {
        for (m, v) in means.iter_mut().zip(t) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);

    // Per-component variance check before the single-scalar ratio.
    for component in 0..width {
        let var: f64 = targets
            .iter()
            .map(|t| (t[component] - means[component]).powi(2))
            .sum();
        if var == 0.0 {
            return Err(MetricsError::ZeroVariance { component });
        }
    }

    let baseline: Vec<Vec<f64>> = vec![means; targets.len()];
    Ok(mse(predictions, targets)? / mse(&baseline, targets)?)
}

/// Per-variable percent error: `100 * mean |pred - target| / (max - min)` in
/// raw units, using the fitted training-split range.
pub fn percent_error_per_variable(
    predictions_raw: &[Vec<f64>],
    targets_raw: &[Vec<f64>],
    scaler: &ScalerParams,
) -> Result<Vec<f64>, MetricsError> {
    let width = check_shapes(predictions_raw, targets_raw)?;
    if scaler.targets.len() != width {
        return Err(MetricsError::DimensionMismatch(format!(
            "scaler covers {} variables, data has {width}",
            scaler.targets.len()
        )));
    }
    let mut percents = Vec::with_capacity(width);
    for (v, scale) in scaler.targets.iter().enumerate() {
        let range = scale.range().filter(|r| *r > 0.0).ok_or_else(|| {
            MetricsError::DegenerateVariable {
                name: format!("target[{v}]"),
            }
        })?;
        let mae: f64 = predictions_raw
            .iter()
            .zip(targets_raw)
            .map(|(p, t)| (p[v] - t[v]).abs())
            .sum::<f64>()
            / predictions_raw.len() as f64;
        percents.push(100.0 * mae / range);
    }
    Ok(percents)
}

/// Per-split section of a [`MetricsReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    /// Percent error keyed by output variable name, in configured order.
    pub percent_error: IndexMap<String, f64>,
}

impl SplitMetrics {
    pub fn percent_error_mean(&self) -> f64 {
        self.percent_error.values().sum::<f64>() / self.percent_error.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitsSection {
    pub training: SplitMetrics,
    pub validation: SplitMetrics,
    pub production: SplitMetrics,
}

/// Normalized predictions falling outside [0, 1], counted per component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutOfRangeCounts {
    pub training: usize,
    pub validation: usize,
    pub production: usize,
}

/// The full evaluation report of a trained network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub splits: SplitsSection,
    /// Production-split MSE in normalized space.
    pub mse: f64,
    /// Production-split NMSE.
    pub nmse: f64,
    /// Unweighted mean of the production per-variable percent errors.
    pub percent_error_aggregate: f64,
    pub cycles: usize,
    pub wall_seconds: f64,
    pub out_of_range_predictions: OutOfRangeCounts,
}

impl MetricsReport {
    /// Flattens the report to `field,value` CSV rows, one per leaf field.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "field,value")?;
        for (split_name, split) in [
            ("training", &self.splits.training),
            ("validation", &self.splits.validation),
            ("production", &self.splits.production),
        ] {
            for (var, pct) in &split.percent_error {
                writeln!(out, "splits.{split_name}.percent_error.{var},{pct}")?;
            }
        }
        writeln!(out, "mse,{}", self.mse)?;
        writeln!(out, "nmse,{}", self.nmse)?;
        writeln!(out, "percent_error_aggregate,{}", self.percent_error_aggregate)?;
        writeln!(out, "cycles,{}", self.cycles)?;
        writeln!(out, "wall_seconds,{}", self.wall_seconds)?;
        writeln!(out, "out_of_range_predictions.training,{}", self.out_of_range_predictions.training)?;
        writeln!(out, "out_of_range_predictions.validation,{}", self.out_of_range_predictions.validation)?;
        writeln!(out, "out_of_range_predictions.production,{}", self.out_of_range_predictions.production)?;
        Ok(())
    }

    fn validate(&self) -> Result<(), MetricsError> {
        let all_finite = self
            .splits_iter()
            .flat_map(|s| s.percent_error.values())
            .chain([&self.mse, &self.nmse, &self.percent_error_aggregate])
            .all(|v| v.is_finite() && *v >= 0.0);
        if all_finite {
            Ok(())
        } else {
            Err(MetricsError::DimensionMismatch(
                "report contains non-finite or negative error values".into(),
            ))
        }
    }

    fn splits_iter(&self) -> impl Iterator<Item = &SplitMetrics> {
        [&self.splits.training, &self.splits.validation, &self.splits.production].into_iter()
    }
}

/// Forward-evaluated predictions of one split, in both spaces.
pub(crate) struct SplitPredictions {
    pub normalized: Vec<Vec<f64>>,
    pub raw: Vec<Vec<f64>>,
    pub out_of_range: usize,
}

pub(crate) fn predict_split(
    net: &Network,
    samples: &[Sample],
    scaler: &ScalerParams,
) -> Result<SplitPredictions, MetricsError> {
    let mut normalized = Vec::with_capacity(samples.len());
    let mut raw = Vec::with_capacity(samples.len());
    let mut out_of_range = 0usize;
    for sample in samples {
        let pred = net.forward(&sample.inputs)?;
        out_of_range += pred.iter().filter(|v| **v < 0.0 || **v > 1.0).count();
        raw.push(crate::features::invert_scaler(scaler, &pred));
        normalized.push(pred);
    }
    Ok(SplitPredictions { normalized, raw, out_of_range })
}

fn split_metrics(
    net: &Network,
    samples: &[Sample],
    scaler: &ScalerParams,
    names: &[&'static str],
) -> Result<(SplitMetrics, SplitPredictions), MetricsError> {
    let preds = predict_split(net, samples, scaler)?;
    let targets_raw: Vec<Vec<f64>> = samples.iter().map(|s| s.targets_raw.clone()).collect();
    let percents = percent_error_per_variable(&preds.raw, &targets_raw, scaler)?;
    let percent_error = names
        .iter()
        .map(|n| n.to_string())
        .zip(percents)
        .collect();
    Ok((SplitMetrics { percent_error }, preds))
}

/// Evaluates a trained network on all three splits and assembles the report.
pub fn build_report(
    net: &Network,
    split: &DatasetSplit,
    scaler: &ScalerParams,
    history: &TrainingHistory,
    encoder: &EncoderConfig,
) -> Result<MetricsReport, MetricsError> {
    let names = encoder.output_names();
    let (training, train_preds) = split_metrics(net, &split.training, scaler, &names)?;
    let (validation, val_preds) = split_metrics(net, &split.validation, scaler, &names)?;
    let (production, prod_preds) = split_metrics(net, &split.production, scaler, &names)?;

    let prod_targets: Vec<Vec<f64>> = split
        .production
        .iter()
        .map(|s| s.targets_normalized.clone())
        .collect();
    let mse = mse(&prod_preds.normalized, &prod_targets)?;
    let nmse = nmse(&prod_preds.normalized, &prod_targets)?;
    let percent_error_aggregate = production.percent_error_mean();

    let report = MetricsReport {
        splits: SplitsSection { training, validation, production },
        mse,
        nmse,
        percent_error_aggregate,
        cycles: history.cycles,
        wall_seconds: history.wall_seconds,
        out_of_range_predictions: OutOfRangeCounts {
            training: train_preds.out_of_range,
            validation: val_preds.out_of_range,
            production: prod_preds.out_of_range,
        },
    };
    report.validate()?;
    Ok(report)
}
