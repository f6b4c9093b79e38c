//! On-disk pipeline artifacts: names, schemas, and typed load/save helpers.
//!
//! All JSON artifacts serialize with stable field order, so reruns with the
//! same seed produce byte-identical files (wall-clock fields excluded).

use crate::error::CliError;
use quakecast_core::features::{DatasetSplit, EncoderConfig, Sample, ScalerParams, SplitRule};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

pub const CATALOG_CSV: &str = "catalog.csv";
pub const SAMPLES_JSON: &str = "samples.json";
pub const SCALER_JSON: &str = "scaler.json";
pub const SPLIT_MANIFEST_JSON: &str = "split_manifest.json";
pub const COMPARISON_JSON: &str = "comparison.json";
pub const MODEL_JSON: &str = "model.json";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const HISTORY_CSV: &str = "history.csv";
pub const HISTORY_SUMMARY_JSON: &str = "history_summary.json";
pub const FIG5_CSV: &str = "fig5_compare.csv";

/// Encoded-sample store: the resolved encoder plus every sample in catalog
/// order, already normalized.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleStore {
    pub encoder: EncoderConfig,
    pub samples: Vec<Sample>,
}

/// Index assignment of the three dataset segments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub rule: SplitRule,
    pub sizes: SplitSizes,
    pub indices: SplitIndices,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitSizes {
    pub training: usize,
    pub validation: usize,
    pub production: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitIndices {
    pub training: Vec<usize>,
    pub validation: Vec<usize>,
    pub production: Vec<usize>,
}

impl SplitManifest {
    /// Reassembles the dataset split from the stored sample order.
    pub fn materialize(&self, samples: &[Sample]) -> Result<DatasetSplit, CliError> {
        let gather = |indices: &[usize]| -> Result<Vec<Sample>, CliError> {
            indices
                .iter()
                .map(|&i| {
                    samples.get(i).cloned().ok_or_else(|| {
                        CliError::Parse(format!("split manifest index {i} out of bounds"))
                    })
                })
                .collect()
        };
        Ok(DatasetSplit {
            training: gather(&self.indices.training)?,
            validation: gather(&self.indices.validation)?,
            production: gather(&self.indices.production)?,
        })
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Other(format!("serialize {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Loads a required artifact; a missing file is the dedicated exit-3 error.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(CliError::MissingArtifact(path.to_path_buf()))
        }
        Err(e) => return Err(e.into()),
    };
    serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// The three ingest artifacts every later stage needs.
pub struct IngestArtifacts {
    pub store: SampleStore,
    pub scaler: ScalerParams,
    pub manifest: SplitManifest,
}

pub fn load_ingest_artifacts(out_dir: &Path) -> Result<IngestArtifacts, CliError> {
    Ok(IngestArtifacts {
        store: read_json(&out_dir.join(SAMPLES_JSON))?,
        scaler: read_json(&out_dir.join(SCALER_JSON))?,
        manifest: read_json(&out_dir.join(SPLIT_MANIFEST_JSON))?,
    })
}

pub fn ensure_out_dir(out_dir: &Path) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out_dir)?;
    Ok(out_dir.to_path_buf())
}
