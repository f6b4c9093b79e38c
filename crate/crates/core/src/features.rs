//! Feature encoding, min-max scaling, and dataset segmentation.
//!
//! Records become raw input/target vectors ([`encode_records`]), a scaler is
//! fitted on the training portion only ([`fit_scaler`]), and samples are
//! assigned to training/validation/production sets by a seeded shuffle
//! followed by contiguous slicing ([`split_dataset`]).

use crate::catalog::CatalogRecord;
use chrono::{NaiveDate, Timelike};
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputVariable {
    Date,
    Hour,
    Minute,
    Zone,
}

impl InputVariable {
    pub fn name(self) -> &'static str {
        match self {
            InputVariable::Date => "date",
            InputVariable::Hour => "hour",
            InputVariable::Minute => "minute",
            InputVariable::Zone => "zone",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputVariable {
    Latitude,
    Longitude,
    Depth,
    Magnitude,
}

impl OutputVariable {
    pub fn name(self) -> &'static str {
        match self {
            OutputVariable::Latitude => "latitude",
            OutputVariable::Longitude => "longitude",
            OutputVariable::Depth => "depth",
            OutputVariable::Magnitude => "magnitude",
        }
    }

    fn extract(self, record: &CatalogRecord) -> f64 {
        match self {
            OutputVariable::Latitude => record.latitude,
            OutputVariable::Longitude => record.longitude,
            OutputVariable::Depth => record.depth_km,
            OutputVariable::Magnitude => record.magnitude,
        }
    }
}

/// What to do with a record whose zone is missing from the vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UnknownZonePolicy {
    /// Abort encoding with [`FeatureError::UnknownZone`].
    #[default]
    Reject,
    /// Route unknown zones to a dedicated trailing one-hot slot.
    MapToOther,
}

/// Input/target variable selection and zone vocabulary for the encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub input_variables: Vec<InputVariable>,
    pub output_variables: Vec<OutputVariable>,
    /// Ordered zone labels; the one-hot block follows this order.
    pub zone_vocabulary: Vec<String>,
    /// Dates are encoded as whole days since this origin.
    pub epoch_origin: NaiveDate,
    #[serde(default)]
    pub unknown_zone: UnknownZonePolicy,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            input_variables: vec![
                InputVariable::Date,
                InputVariable::Hour,
                InputVariable::Minute,
                InputVariable::Zone,
            ],
            output_variables: vec![
                OutputVariable::Latitude,
                OutputVariable::Longitude,
                OutputVariable::Magnitude,
            ],
            zone_vocabulary: Vec::new(),
            epoch_origin: NaiveDate::from_ymd_opt(2006, 3, 2).unwrap(),
            unknown_zone: UnknownZonePolicy::Reject,
        }
    }
}

/// One encoded input column: a numeric variable or a single one-hot slot.
#[derive(Debug, Clone, PartialEq)]
pub enum InputColumn {
    Numeric(InputVariable),
    OneHot(String),
}

impl InputColumn {
    pub fn name(&self) -> String {
        match self {
            InputColumn::Numeric(v) => v.name().to_string(),
            InputColumn::OneHot(label) => format!("zone[{label}]"),
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.input_variables.is_empty() {
            return Err(FeatureError::InvalidConfig("no input variables".into()));
        }
        if self.output_variables.is_empty() {
            return Err(FeatureError::InvalidConfig("no output variables".into()));
        }
        if has_duplicates(&self.input_variables) {
            return Err(FeatureError::InvalidConfig("duplicate input variable".into()));
        }
        if has_duplicates(&self.output_variables) {
            return Err(FeatureError::InvalidConfig("duplicate output variable".into()));
        }
        if has_duplicates(&self.zone_vocabulary) {
            return Err(FeatureError::InvalidConfig("duplicate zone label".into()));
        }
        Ok(())
    }

    /// Column layout of the encoded input vector, one-hot block expanded.
    pub fn input_columns(&self) -> Vec<InputColumn> {
        let mut cols = Vec::new();
        for var in &self.input_variables {
            match var {
                InputVariable::Zone => {
                    for label in &self.zone_vocabulary {
                        cols.push(InputColumn::OneHot(label.clone()));
                    }
                    if self.unknown_zone == UnknownZonePolicy::MapToOther {
                        cols.push(InputColumn::OneHot("OTHER".into()));
                    }
                }
                other => cols.push(InputColumn::Numeric(*other)),
            }
        }
        cols
    }

    pub fn input_width(&self) -> usize {
        self.input_columns().len()
    }

    pub fn output_width(&self) -> usize {
        self.output_variables.len()
    }

    pub fn output_names(&self) -> Vec<&'static str> {
        self.output_variables.iter().map(|v| v.name()).collect()
    }
}

fn has_duplicates<T: PartialEq>(items: &[T]) -> bool {
    items
        .iter()
        .enumerate()
        .any(|(i, a)| items[..i].contains(a))
}

/// Encoded sample before scaling: inputs and targets in original units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSample {
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
    pub source_index: usize,
}

/// Scaled sample: normalized inputs/targets plus the raw targets they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub inputs: Vec<f64>,
    pub targets_normalized: Vec<f64>,
    pub targets_raw: Vec<f64>,
    pub source_index: usize,
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("record {source_index}: zone `{zone}` not in vocabulary")]
    UnknownZone { zone: String, source_index: usize },
    #[error("empty sample set")]
    EmptySampleSet,
    #[error("variable `{name}` is degenerate: min == max == {value}")]
    DegenerateVariable { name: String, value: f64 },
    #[error("split counts sum to {sum} but {total} samples were provided")]
    CountMismatch { sum: usize, total: usize },
    #[error("split proportions sum to {sum}, expected 1 within 1e-9")]
    ProportionMismatch { sum: f64 },
    #[error("empty input")]
    EmptyInput,
    #[error("encoder config: {0}")]
    InvalidConfig(String),
}

/// Encodes records in order: date as days since the epoch origin, hour and
/// minute as plain scalars, zone as a one-hot block over the vocabulary.
/// Targets are copied in raw units following `output_variables`.
pub fn encode_records(
    records: &[CatalogRecord],
    config: &EncoderConfig,
) -> Result<Vec<RawSample>, FeatureError> {
    config.validate()?;
    let zone_width = config
        .input_variables
        .iter()
        .any(|v| *v == InputVariable::Zone)
        .then(|| match config.unknown_zone {
            UnknownZonePolicy::Reject => config.zone_vocabulary.len(),
            UnknownZonePolicy::MapToOther => config.zone_vocabulary.len() + 1,
        });

    let mut samples = Vec::with_capacity(records.len());
    for (source_index, record) in records.iter().enumerate() {
        let mut inputs = Vec::with_capacity(config.input_width());
        for var in &config.input_variables {
            match var {
                InputVariable::Date => {
                    inputs.push((record.date - config.epoch_origin).num_days() as f64);
                }
                InputVariable::Hour => inputs.push(f64::from(record.time.hour())),
                InputVariable::Minute => inputs.push(f64::from(record.time.minute())),
                InputVariable::Zone => {
                    let width = zone_width.expect("zone width present when zone is an input");
                    let start = inputs.len();
                    inputs.resize(start + width, 0.0);
                    match config.zone_vocabulary.iter().position(|z| *z == record.zone) {
                        Some(pos) => inputs[start + pos] = 1.0,
                        None => match config.unknown_zone {
                            UnknownZonePolicy::MapToOther => inputs[start + width - 1] = 1.0,
                            UnknownZonePolicy::Reject => {
                                return Err(FeatureError::UnknownZone {
                                    zone: record.zone.clone(),
                                    source_index,
                                })
                            }
                        },
                    }
                }
            }
        }
        let targets = config
            .output_variables
            .iter()
            .map(|v| v.extract(record))
            .collect();
        samples.push(RawSample {
            inputs,
            targets,
            source_index,
        });
    }
    Ok(samples)
}

/// Per-column scaling rule. One-hot columns pass through unscaled; numeric
/// columns are min-max mapped onto [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ColumnScale {
    MinMax { min: f64, max: f64 },
    Identity,
}

impl ColumnScale {
    fn apply(self, x: f64) -> f64 {
        match self {
            ColumnScale::MinMax { min, max } => (x - min) / (max - min),
            ColumnScale::Identity => x,
        }
    }

    fn invert(self, v: f64) -> f64 {
        match self {
            ColumnScale::MinMax { min, max } => min + v * (max - min),
            ColumnScale::Identity => v,
        }
    }

    /// Width of the raw-unit range, when one exists.
    pub fn range(self) -> Option<f64> {
        match self {
            ColumnScale::MinMax { min, max } => Some(max - min),
            ColumnScale::Identity => None,
        }
    }
}

/// Fitted min-max parameters for every input column and target variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub inputs: Vec<ColumnScale>,
    pub targets: Vec<ColumnScale>,
}

/// Fits per-variable min/max over the provided samples only. One-hot input
/// columns become identity columns; every scaled variable must have max > min
/// or the fit fails naming the variable.
pub fn fit_scaler(samples: &[RawSample], config: &EncoderConfig) -> Result<ScalerParams, FeatureError> {
    if samples.is_empty() {
        return Err(FeatureError::EmptySampleSet);
    }
    let columns = config.input_columns();
    debug_assert_eq!(columns.len(), samples[0].inputs.len());

    let mut inputs = Vec::with_capacity(columns.len());
    for (idx, column) in columns.iter().enumerate() {
        match column {
            InputColumn::OneHot(_) => inputs.push(ColumnScale::Identity),
            InputColumn::Numeric(_) => {
                inputs.push(fit_column(samples.iter().map(|s| s.inputs[idx]), &column.name())?)
            }
        }
    }
    let mut targets = Vec::with_capacity(config.output_variables.len());
    for (idx, var) in config.output_variables.iter().enumerate() {
        targets.push(fit_column(samples.iter().map(|s| s.targets[idx]), var.name())?);
    }
    Ok(ScalerParams { inputs, targets })
}

fn fit_column(values: impl Iterator<Item = f64>, name: &str) -> Result<ColumnScale, FeatureError> {
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if max > min {
        Ok(ColumnScale::MinMax { min, max })
    } else {
        Err(FeatureError::DegenerateVariable {
            name: name.to_string(),
            value: min,
        })
    }
}

/// Applies `x' = (x - min) / (max - min)` per variable. Out-of-range inputs
/// map outside [0, 1] and are permitted.
pub fn apply_scaler(params: &ScalerParams, sample: &RawSample) -> Sample {
    assert_eq!(params.inputs.len(), sample.inputs.len(), "input column count mismatch");
    assert_eq!(params.targets.len(), sample.targets.len(), "target variable count mismatch");
    Sample {
        inputs: sample
            .inputs
            .iter()
            .zip(&params.inputs)
            .map(|(&x, scale)| scale.apply(x))
            .collect(),
        targets_normalized: sample
            .targets
            .iter()
            .zip(&params.targets)
            .map(|(&x, scale)| scale.apply(x))
            .collect(),
        targets_raw: sample.targets.clone(),
        source_index: sample.source_index,
    }
}

/// Exact algebraic inverse of [`apply_scaler`] for a normalized target vector.
pub fn invert_scaler(params: &ScalerParams, normalized: &[f64]) -> Vec<f64> {
    assert_eq!(params.targets.len(), normalized.len(), "target variable count mismatch");
    normalized
        .iter()
        .zip(&params.targets)
        .map(|(&v, scale)| scale.invert(v))
        .collect()
}

/// How many samples go to each of training/validation/production.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    Counts([usize; 3]),
    Proportions([f64; 3]),
}

/// The three dataset segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub training: Vec<Sample>,
    pub validation: Vec<Sample>,
    pub production: Vec<Sample>,
}

impl DatasetSplit {
    pub fn sizes(&self) -> [usize; 3] {
        [self.training.len(), self.validation.len(), self.production.len()]
    }
}

/// Resolves a split rule to exact counts for `total` samples.
///
/// Proportions are rounded by largest remainder: each segment gets the floor
/// of its exact quota and leftover units go to the largest fractional parts,
/// earlier segments first on ties.
pub fn resolve_split_counts(rule: &SplitRule, total: usize) -> Result<[usize; 3], FeatureError> {
    match rule {
        SplitRule::Counts(counts) => {
            let sum: usize = counts.iter().sum();
            if sum != total {
                return Err(FeatureError::CountMismatch { sum, total });
            }
            Ok(*counts)
        }
        SplitRule::Proportions(props) => {
            let sum: f64 = props.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || props.iter().any(|p| *p < 0.0) {
                return Err(FeatureError::ProportionMismatch { sum });
            }
            let quotas: Vec<f64> = props.iter().map(|p| p * total as f64).collect();
            let mut counts = [0usize; 3];
            for (c, q) in counts.iter_mut().zip(&quotas) {
                *c = q.floor() as usize;
            }
            let assigned: usize = counts.iter().sum();
            let mut order: Vec<usize> = (0..3).collect();
            order.sort_by(|&a, &b| {
                let ra = quotas[a] - quotas[a].floor();
                let rb = quotas[b] - quotas[b].floor();
                rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
            });
            // The leftover is the integer sum of three fractional parts, so at most 2.
            for &idx in order.iter().take(total - assigned) {
                counts[idx] += 1;
            }
            Ok(counts)
        }
    }
}

/// Index assignment for a split: a seeded shuffle of `0..total` sliced into
/// three contiguous runs of the resolved counts.
pub fn split_indices(total: usize, rule: &SplitRule, seed: u64) -> Result<[Vec<usize>; 3], FeatureError> {
    if total == 0 {
        return Err(FeatureError::EmptyInput);
    }
    let counts = resolve_split_counts(rule, total)?;
    let mut training: Vec<usize> = (0..total).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    training.shuffle(&mut rng);
    let production = training.split_off(counts[0] + counts[1]);
    let validation = training.split_off(counts[0]);
    debug_assert_eq!(production.len(), counts[2]);
    Ok([training, validation, production])
}

/// Splits samples into training/validation/production per the rule, seeded.
pub fn split_dataset(samples: &[Sample], rule: &SplitRule, seed: u64) -> Result<DatasetSplit, FeatureError> {
    let [train_idx, val_idx, prod_idx] = split_indices(samples.len(), rule, seed)?;
    let gather = |idx: &[usize]| idx.iter().map(|&i| samples[i].clone()).collect();
    Ok(DatasetSplit {
        training: gather(&train_idx),
        validation: gather(&val_idx),
        production: gather(&prod_idx),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::CatalogRecord;
    use chrono::{NaiveDate, NaiveTime};
    use proptest::prelude::*;

    fn record(date: &str, time: &str, zone: &str) -> CatalogRecord {
        CatalogRecord {
            date: NaiveDate::parse_from_str(date, "%Y-%m-%d").unwrap(),
            time: NaiveTime::parse_from_str(time, "%H:%M:%S").unwrap(),
            latitude: 16.45,
            longitude: -98.72,
            depth_km: 10.0,
            magnitude: 4.3,
            zone: zone.to_string(),
        }
    }

    fn config(zones: &[&str]) -> EncoderConfig {
        EncoderConfig {
            zone_vocabulary: zones.iter().map(|z| z.to_string()).collect(),
            ..EncoderConfig::default()
        }
    }

    #[test]
    fn origin_record_encodes_to_zeros_and_leading_one_hot() {
        let cfg = config(&["GUERRERO", "OAXACA"]);
        let records = [record("2006-03-02", "00:00:00", "GUERRERO")];
        let samples = encode_records(&records, &cfg).unwrap();
        assert_eq!(samples[0].inputs, vec![0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(samples[0].targets, vec![16.45, -98.72, 4.3]);
    }

    #[test]
    fn one_hot_block_sums_to_one() {
        let cfg = config(&["A", "B", "C"]);
        let records = [
            record("2006-03-02", "01:00:00", "A"),
            record("2006-03-03", "02:00:00", "B"),
            record("2006-03-04", "03:00:00", "C"),
        ];
        for sample in encode_records(&records, &cfg).unwrap() {
            let one_hot_sum: f64 = sample.inputs[3..].iter().sum();
            assert_eq!(one_hot_sum, 1.0);
        }
    }

    #[test]
    fn date_and_time_scalars_count_from_origin() {
        let cfg = config(&["GUERRERO"]);
        let records = [record("2006-03-12", "23:59:59", "GUERRERO")];
        let samples = encode_records(&records, &cfg).unwrap();
        assert_eq!(samples[0].inputs[..3], [10.0, 23.0, 59.0]);
    }

    #[test]
    fn unknown_zone_is_rejected_by_default() {
        let cfg = config(&["GUERRERO"]);
        let records = [record("2006-03-02", "00:00:00", "COLIMA")];
        let err = encode_records(&records, &cfg).unwrap_err();
        match err {
            FeatureError::UnknownZone { zone, source_index } => {
                assert_eq!(zone, "COLIMA");
                assert_eq!(source_index, 0);
            }
            other => panic!("expected UnknownZone, got {other:?}"),
        }
    }

    #[test]
    fn unknown_zone_maps_to_other_slot_when_configured() {
        let mut cfg = config(&["GUERRERO"]);
        cfg.unknown_zone = UnknownZonePolicy::MapToOther;
        let records = [record("2006-03-02", "00:00:00", "COLIMA")];
        let samples = encode_records(&records, &cfg).unwrap();
        // Columns: date, hour, minute, zone[GUERRERO], zone[OTHER].
        assert_eq!(samples[0].inputs.len(), cfg.input_width());
        assert_eq!(samples[0].inputs[3..], [0.0, 1.0]);
    }

    fn raw(inputs: &[f64], targets: &[f64], idx: usize) -> RawSample {
        RawSample {
            inputs: inputs.to_vec(),
            targets: targets.to_vec(),
            source_index: idx,
        }
    }

    fn magnitude_only_config() -> EncoderConfig {
        EncoderConfig {
            input_variables: vec![InputVariable::Date],
            output_variables: vec![OutputVariable::Magnitude],
            zone_vocabulary: vec![],
            ..EncoderConfig::default()
        }
    }

    #[test]
    fn fit_scaler_takes_min_and_max_over_samples() {
        let cfg = magnitude_only_config();
        let samples = [
            raw(&[0.0], &[4.1], 0),
            raw(&[1.0], &[5.0], 1),
            raw(&[2.0], &[7.3], 2),
        ];
        let params = fit_scaler(&samples, &cfg).unwrap();
        assert_eq!(params.targets[0], ColumnScale::MinMax { min: 4.1, max: 7.3 });
    }

    #[test]
    fn single_sample_fit_is_degenerate() {
        let cfg = magnitude_only_config();
        let err = fit_scaler(&[raw(&[3.0], &[4.1], 0)], &cfg).unwrap_err();
        assert!(matches!(err, FeatureError::DegenerateVariable { .. }));
    }

    #[test]
    fn degenerate_variable_is_named() {
        let cfg = magnitude_only_config();
        let samples = [raw(&[0.0], &[4.1], 0), raw(&[1.0], &[4.1], 1)];
        match fit_scaler(&samples, &cfg).unwrap_err() {
            FeatureError::DegenerateVariable { name, value } => {
                assert_eq!(name, "magnitude");
                assert_eq!(value, 4.1);
            }
            other => panic!("expected DegenerateVariable, got {other:?}"),
        }
    }

    #[test]
    fn empty_sample_set_is_rejected() {
        let cfg = magnitude_only_config();
        assert!(matches!(fit_scaler(&[], &cfg), Err(FeatureError::EmptySampleSet)));
    }

    #[test]
    fn scaler_maps_endpoints_to_zero_and_one() {
        let scale = ColumnScale::MinMax { min: 4.1, max: 7.3 };
        assert_eq!(scale.apply(4.1), 0.0);
        assert_eq!(scale.apply(7.3), 1.0);
    }

    #[test]
    fn hand_scaled_magnitude_matches() {
        let scale = ColumnScale::MinMax { min: 4.1, max: 7.3 };
        assert!((scale.apply(6.2) - 0.65625).abs() < 1e-12);
    }

    #[test]
    fn one_hot_columns_pass_through_unscaled() {
        let cfg = config(&["A", "B"]);
        let samples = [
            raw(&[0.0, 1.0, 2.0, 1.0, 0.0], &[16.0, -98.0, 4.1], 0),
            raw(&[5.0, 2.0, 3.0, 0.0, 1.0], &[17.0, -97.0, 7.3], 1),
        ];
        let params = fit_scaler(&samples, &cfg).unwrap();
        assert_eq!(params.inputs[3], ColumnScale::Identity);
        assert_eq!(params.inputs[4], ColumnScale::Identity);
        let scaled = apply_scaler(&params, &samples[0]);
        assert_eq!(scaled.inputs[3], 1.0);
        assert_eq!(scaled.inputs[4], 0.0);
    }

    fn sample(idx: usize) -> Sample {
        Sample {
            inputs: vec![idx as f64],
            targets_normalized: vec![0.5],
            targets_raw: vec![5.0],
            source_index: idx,
        }
    }

    #[test]
    fn split_counts_are_honored_exactly() {
        let samples: Vec<Sample> = (0..5798).map(sample).collect();
        let split = split_dataset(&samples, &SplitRule::Counts([3001, 1551, 1246]), 9).unwrap();
        assert_eq!(split.sizes(), [3001, 1551, 1246]);
    }

    #[test]
    fn proportions_round_by_largest_remainder() {
        let counts =
            resolve_split_counts(&SplitRule::Proportions([0.5176, 0.2675, 0.2149]), 5798).unwrap();
        assert_eq!(counts, [3001, 1551, 1246]);
    }

    #[test]
    fn all_to_training_proportion() {
        let samples: Vec<Sample> = (0..17).map(sample).collect();
        let split = split_dataset(&samples, &SplitRule::Proportions([1.0, 0.0, 0.0]), 3).unwrap();
        assert_eq!(split.sizes(), [17, 0, 0]);
    }

    #[test]
    fn count_mismatch_is_rejected() {
        let err = split_indices(10, &SplitRule::Counts([5, 4, 2]), 0).unwrap_err();
        assert!(matches!(err, FeatureError::CountMismatch { sum: 11, total: 10 }));
    }

    #[test]
    fn bad_proportions_are_rejected() {
        let err = split_indices(10, &SplitRule::Proportions([0.5, 0.4, 0.2]), 0).unwrap_err();
        assert!(matches!(err, FeatureError::ProportionMismatch { .. }));
    }

    #[test]
    fn empty_input_is_rejected() {
        let err = split_indices(0, &SplitRule::Counts([0, 0, 0]), 0).unwrap_err();
        assert!(matches!(err, FeatureError::EmptyInput));
    }

    #[test]
    fn same_seed_gives_bitwise_equal_index_lists() {
        let rule = SplitRule::Counts([6, 3, 1]);
        assert_eq!(split_indices(10, &rule, 7).unwrap(), split_indices(10, &rule, 7).unwrap());
        assert_ne!(split_indices(10, &rule, 7).unwrap(), split_indices(10, &rule, 8).unwrap());
    }

    #[test]
    fn encoding_is_order_preserving() {
        let cfg = config(&["GUERRERO", "OAXACA"]);
        let records = [
            record("2006-03-02", "00:00:00", "OAXACA"),
            record("2006-03-05", "01:02:03", "GUERRERO"),
        ];
        let samples = encode_records(&records, &cfg).unwrap();
        assert_eq!(samples[0].source_index, 0);
        assert_eq!(samples[1].source_index, 1);
    }

    proptest! {
        #[test]
        fn scaler_round_trip_is_identity(
            bounds in proptest::collection::vec((-1000.0f64..1000.0, 0.001f64..500.0), 1..5),
            t in 0.0f64..=1.0,
        ) {
            let targets: Vec<ColumnScale> = bounds
                .iter()
                .map(|&(min, width)| ColumnScale::MinMax { min, max: min + width })
                .collect();
            let params = ScalerParams { inputs: vec![], targets: targets.clone() };
            let raw_vec: Vec<f64> = bounds.iter().map(|&(min, width)| min + t * width).collect();
            let normalized: Vec<f64> = raw_vec
                .iter()
                .zip(&targets)
                .map(|(&x, s)| s.apply(x))
                .collect();
            let back = invert_scaler(&params, &normalized);
            for (a, b) in back.iter().zip(&raw_vec) {
                prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
            }
        }

        #[test]
        fn splits_partition_the_input(total in 1usize..300, seed in 0u64..50) {
            let n_train = total / 2;
            let n_val = total / 3;
            let n_prod = total - n_train - n_val;
            let rule = SplitRule::Counts([n_train, n_val, n_prod]);
            let [a, b, c] = split_indices(total, &rule, seed).unwrap();
            let mut seen = vec![false; total];
            for &i in a.iter().chain(&b).chain(&c) {
                prop_assert!(!seen[i], "index {i} assigned twice");
                seen[i] = true;
            }
            prop_assert!(seen.iter().all(|&s| s), "all indices covered");
            prop_assert_eq!([a.len(), b.len(), c.len()], [n_train, n_val, n_prod]);
        }
    }
}
