//! Supervised training: backpropagation with momentum or Quickprop updates,
//! overtraining-based early stopping, and best-epoch weight restoration.
//!
//! Training is full batch: gradients of the half squared error are averaged
//! over every training sample and one update is applied per epoch. After each
//! update the epoch's training and validation MSE are recorded; parameters are
//! snapshotted whenever the validation MSE strictly improves the running best,
//! and the returned network always carries that best snapshot.

use crate::features::{DatasetSplit, Sample};
use crate::network::{sigmoid, softplus, LayerKind, LayerParams, Network, NetworkError};
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Instant;
use thiserror::Error;

/// Weight update rule applied once per epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    Momentum,
    Quickprop,
}

/// Hyperparameters for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub rule: UpdateRule,
    /// Step size eta, > 0. Also the Quickprop bootstrap step.
    pub learning_rate: f64,
    /// Momentum coefficient alpha in [0, 1); ignored under Quickprop.
    pub momentum_coefficient: f64,
    /// Quickprop growth cap mu, > 1; ignored under momentum.
    pub quickprop_max_growth: f64,
    pub max_epochs: usize,
    /// Epochs of non-improving validation error tolerated before stopping.
    pub patience: usize,
    /// Per-output mean absolute normalized error that counts as converged.
    pub target_training_error: f64,
    pub seed: u64,
    pub shuffle_each_epoch: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            rule: UpdateRule::Quickprop,
            learning_rate: 0.05,
            momentum_coefficient: 0.9,
            quickprop_max_growth: 1.75,
            max_epochs: 10_000,
            patience: 25,
            target_training_error: 0.10,
            seed: 0,
            shuffle_each_epoch: false,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.learning_rate <= 0.0 {
            return Err(TrainError::InvalidConfig("learning_rate must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.momentum_coefficient) {
            return Err(TrainError::InvalidConfig(
                "momentum_coefficient must be in [0, 1)".into(),
            ));
        }
        if self.quickprop_max_growth <= 1.0 {
            return Err(TrainError::InvalidConfig("quickprop_max_growth must be > 1".into()));
        }
        if self.patience == 0 {
            return Err(TrainError::InvalidConfig("patience must be >= 1".into()));
        }
        if !(self.target_training_error > 0.0 && self.target_training_error <= 1.0) {
            return Err(TrainError::InvalidConfig(
                "target_training_error must be in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Why a training run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TargetReached,
    Overtraining,
    MaxEpochs,
}

/// One epoch's recorded errors, all in normalized space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
    /// Largest per-output mean absolute error on the training set; the
    /// convergence target is checked against this value.
    pub train_mae_max: f64,
}

/// Per-epoch error trajectory with the best-epoch bookmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose validation MSE is the series minimum; 0 when no
    /// epoch ran.
    pub best_epoch: usize,
    pub stop_reason: StopReason,
    pub cycles: usize,
    pub wall_seconds: f64,
}

impl TrainingHistory {
    /// Writes the `epoch,train_mse,val_mse` CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "epoch,train_mse,val_mse")?;
        for rec in &self.epochs {
            writeln!(out, "{},{},{}", rec.epoch, rec.train_mse, rec.val_mse)?;
        }
        Ok(())
    }

    pub fn summary(&self) -> HistorySummary {
        HistorySummary {
            best_epoch: self.best_epoch,
            cycles: self.cycles,
            stop_reason: self.stop_reason,
            wall_seconds: self.wall_seconds,
        }
    }

    pub fn best_val_mse(&self) -> Option<f64> {
        self.epochs.get(self.best_epoch.checked_sub(1)?).map(|r| r.val_mse)
    }
}

/// Companion JSON summary of a [`TrainingHistory`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistorySummary {
    pub best_epoch: usize,
    pub cycles: usize,
    pub stop_reason: StopReason,
    pub wall_seconds: f64,
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("empty {0} set")]
    EmptySplit(&'static str),
    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize, history: TrainingHistory },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Analytic gradients of the half squared error `0.5 * sum((y - t)^2)` for
/// one sample, flattened in the network's canonical parameter order. Also
/// returns the sample squared error `sum((y - t)^2)`.
pub fn backward(net: &Network, input: &[f64], target: &[f64]) -> Result<(Vec<f64>, f64), TrainError> {
    let trace = net.forward_trace(input)?;
    let output = trace.last().expect("at least one layer");
    if target.len() != output.len() {
        return Err(TrainError::DimensionMismatch(format!(
            "target width {} does not match output width {}",
            target.len(),
            output.len()
        )));
    }

    let sq_error: f64 = output.iter().zip(target).map(|(y, t)| (y - t) * (y - t)).sum();
    // dL/dy for L = 0.5 * sum((y - t)^2)
    let mut upstream: Vec<f64> = output.iter().zip(target).map(|(y, t)| y - t).collect();

    let layer_count = net.layers().len();
    let mut blocks: Vec<Vec<f64>> = vec![Vec::new(); layer_count];
    for i in (0..layer_count).rev() {
        let x: &[f64] = if i == 0 { input } else { &trace[i - 1] };
        let activation = &trace[i];
        match &net.layers()[i] {
            LayerParams::Dense { weights, .. } => {
                let dpre: Vec<f64> = match net.spec().layers[i].kind {
                    LayerKind::DenseTanh => upstream
                        .iter()
                        .zip(activation)
                        .map(|(g, a)| g * (1.0 - a * a))
                        .collect(),
                    _ => upstream.clone(),
                };
                let fan_in = weights.ncols();
                let mut block = Vec::with_capacity(dpre.len() * (fan_in + 1));
                for &d in &dpre {
                    block.extend(x.iter().map(|&xi| d * xi));
                }
                block.extend(dpre.iter());

                let mut downstream = vec![0.0; fan_in];
                for (r, &d) in dpre.iter().enumerate() {
                    for (c, slot) in downstream.iter_mut().enumerate() {
                        *slot += weights[[r, c]] * d;
                    }
                }
                blocks[i] = block;
                upstream = downstream;
            }
            LayerParams::Radial { centers, width_rhos } => {
                let units = centers.nrows();
                let width = centers.ncols();
                let mut center_grads = vec![0.0; units * width];
                let mut rho_grads = vec![0.0; units];
                let mut downstream = vec![0.0; width];
                for j in 0..units {
                    let sigma = softplus(width_rhos[j]);
                    let common = upstream[j] * activation[j];
                    let inv_sq = 1.0 / (sigma * sigma);
                    let mut dist_sq = 0.0;
                    for d in 0..width {
                        let diff = x[d] - centers[[j, d]];
                        dist_sq += diff * diff;
                        let dc = common * diff * inv_sq;
                        center_grads[j * width + d] = dc;
                        downstream[d] -= dc;
                    }
                    let dsigma = common * dist_sq / (sigma * sigma * sigma);
                    rho_grads[j] = dsigma * sigmoid(width_rhos[j]);
                }
                center_grads.extend(rho_grads);
                blocks[i] = center_grads;
                upstream = downstream;
            }
        }
    }

    let mut flat = Vec::with_capacity(net.parameter_count());
    for block in blocks {
        flat.extend(block);
    }
    debug_assert_eq!(flat.len(), net.parameter_count());
    Ok((flat, sq_error))
}

/// Momentum update: `delta(t) = -eta * g(t) + alpha * delta(t-1)`, applied in
/// place. `prev_deltas` is overwritten with the applied step.
pub fn update_momentum(
    params: &mut [f64],
    grads: &[f64],
    prev_deltas: &mut [f64],
    config: &TrainingConfig,
) {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), prev_deltas.len());
    for ((w, &g), delta) in params.iter_mut().zip(grads).zip(prev_deltas.iter_mut()) {
        *delta = -config.learning_rate * g + config.momentum_coefficient * *delta;
        *w += *delta;
    }
}

/// Quickprop update: per scalar, the secant step
/// `delta(t) = [S(t) / (S(t-1) - S(t))] * delta(t-1)` with the multiplier
/// clamped to `[-mu, mu]` so the step never exceeds the growth limit. When the
/// previous step is zero or the slope difference is below 1e-12 the rule falls
/// back to the plain gradient step `-eta * S(t)`.
pub fn update_quickprop(
    params: &mut [f64],
    grads: &[f64],
    prev_grads: &[f64],
    prev_deltas: &mut [f64],
    config: &TrainingConfig,
) {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), prev_grads.len());
    assert_eq!(params.len(), prev_deltas.len());
    let mu = config.quickprop_max_growth;
    for i in 0..params.len() {
        let slope = grads[i];
        let prev_slope = prev_grads[i];
        let prev_delta = prev_deltas[i];
        let denom = prev_slope - slope;
        let delta = if prev_delta != 0.0 && denom.abs() >= 1e-12 {
            (slope / denom).clamp(-mu, mu) * prev_delta
        } else {
            -config.learning_rate * slope
        };
        params[i] += delta;
        prev_deltas[i] = delta;
    }
}

/// Error statistics of a network over a sample list, in normalized space.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalStats {
    /// Mean over samples of the mean squared componentwise difference.
    pub mse: f64,
    /// Per-output mean absolute error.
    pub mae_per_output: Vec<f64>,
}

/// Evaluates the network over samples against their normalized targets.
pub fn evaluate(net: &Network, samples: &[Sample]) -> Result<EvalStats, TrainError> {
    if samples.is_empty() {
        return Err(TrainError::EmptySplit("evaluation"));
    }
    let width = net.spec().output_width;
    let mut sq_sum = 0.0;
    let mut abs_sums = vec![0.0; width];
    for sample in samples {
        if sample.targets_normalized.len() != width {
            return Err(TrainError::DimensionMismatch(format!(
                "sample target width {} does not match output width {}",
                sample.targets_normalized.len(),
                width
            )));
        }
        let output = net.forward(&sample.inputs)?;
        for (d, (y, t)) in output.iter().zip(&sample.targets_normalized).enumerate() {
            let diff = y - t;
            sq_sum += diff * diff / width as f64;
            abs_sums[d] += diff.abs();
        }
    }
    let n = samples.len() as f64;
    Ok(EvalStats {
        mse: sq_sum / n,
        mae_per_output: abs_sums.into_iter().map(|s| s / n).collect(),
    })
}

/// Trains a network on the split's training set, monitoring the validation
/// set for the overtraining stop.
///
/// Deterministic for a given config: seeded shuffles, fixed accumulation
/// order. On divergence (non-finite training or validation loss) the run
/// aborts with the history recorded so far.
pub fn train(
    network: Network,
    split: &DatasetSplit,
    config: &TrainingConfig,
) -> Result<(Network, TrainingHistory), TrainError> {
    config.validate()?;
    if split.training.is_empty() {
        return Err(TrainError::EmptySplit("training"));
    }
    if split.validation.is_empty() {
        return Err(TrainError::EmptySplit("validation"));
    }

    let started = Instant::now();
    let mut net = network;
    let param_count = net.parameter_count();
    let mut params = net.flat_parameters();
    let mut prev_deltas = vec![0.0; param_count];
    let mut prev_grads = vec![0.0; param_count];
    let mut grads = vec![0.0; param_count];

    let mut order: Vec<usize> = (0..split.training.len()).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut history = TrainingHistory {
        epochs: Vec::new(),
        best_epoch: 0,
        stop_reason: StopReason::MaxEpochs,
        cycles: 0,
        wall_seconds: 0.0,
    };
    let mut best_val = f64::INFINITY;
    let mut best_params: Option<Vec<f64>> = None;
    let mut stale_epochs = 0usize;

    let seal = |history: &mut TrainingHistory| {
        history.cycles = history.epochs.len();
        history.wall_seconds = started.elapsed().as_secs_f64();
    };

    for epoch in 1..=config.max_epochs {
        if config.shuffle_each_epoch {
            order.shuffle(&mut shuffle_rng);
        }

        grads.iter_mut().for_each(|g| *g = 0.0);
        for &idx in &order {
            let sample = &split.training[idx];
            match backward(&net, &sample.inputs, &sample.targets_normalized) {
                Ok((sample_grads, _)) => {
                    for (acc, g) in grads.iter_mut().zip(&sample_grads) {
                        *acc += g;
                    }
                }
                Err(TrainError::Network(NetworkError::NonFiniteParameter { .. })) => {
                    seal(&mut history);
                    return Err(TrainError::NonFiniteLoss { epoch, history });
                }
                Err(other) => return Err(other),
            }
        }
        let scale = 1.0 / split.training.len() as f64;
        grads.iter_mut().for_each(|g| *g *= scale);

        match config.rule {
            UpdateRule::Momentum => update_momentum(&mut params, &grads, &mut prev_deltas, config),
            UpdateRule::Quickprop => {
                update_quickprop(&mut params, &grads, &prev_grads, &mut prev_deltas, config);
                prev_grads.copy_from_slice(&grads);
            }
        }
        if params.iter().any(|p| !p.is_finite()) {
            seal(&mut history);
            return Err(TrainError::NonFiniteLoss { epoch, history });
        }
        net.set_flat_parameters(&params)?;

        let evaluated = evaluate(&net, &split.training)
            .and_then(|t| evaluate(&net, &split.validation).map(|v| (t, v)));
        let (train_stats, val_stats) = match evaluated {
            Ok(pair) => pair,
            Err(TrainError::Network(NetworkError::NonFiniteParameter { .. })) => {
                seal(&mut history);
                return Err(TrainError::NonFiniteLoss { epoch, history });
            }
            Err(other) => return Err(other),
        };
        if !train_stats.mse.is_finite() || !val_stats.mse.is_finite() {
            seal(&mut history);
            return Err(TrainError::NonFiniteLoss { epoch, history });
        }
        let train_mae_max = train_stats
            .mae_per_output
            .iter()
            .fold(f64::NEG_INFINITY, |m, &v| m.max(v));

        history.epochs.push(EpochRecord {
            epoch,
            train_mse: train_stats.mse,
            val_mse: val_stats.mse,
            train_mae_max,
        });

        if val_stats.mse < best_val {
            best_val = val_stats.mse;
            best_params = Some(params.clone());
            history.best_epoch = epoch;
            stale_epochs = 0;
        } else {
            stale_epochs += 1;
        }

        if train_mae_max <= config.target_training_error {
            history.stop_reason = StopReason::TargetReached;
            break;
        }
        if stale_epochs >= config.patience {
            history.stop_reason = StopReason::Overtraining;
            break;
        }
        history.stop_reason = StopReason::MaxEpochs;
    }

    if let Some(best) = best_params {
        net.set_flat_parameters(&best)?;
    }
    seal(&mut history);
    Ok((net, history))
}
