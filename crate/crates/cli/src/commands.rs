//! The five pipeline subcommands.

use crate::artifacts::{self, SampleStore, SplitIndices, SplitManifest, SplitSizes};
use crate::config::PipelineConfig;
use crate::error::CliError;
use quakecast_core::catalog::{self, CatalogRecord};
use quakecast_core::features::{self, EncoderConfig};
use quakecast_core::harness::{self, ComparisonConfig, FinalConfig};
use quakecast_core::metrics::MetricsReport;
use quakecast_core::seed::derive_seed;
use quakecast_core::trainer::TrainError;
use quakecast_core::UpdateRule;
use std::fs;
use std::path::Path;

/// Generates the synthetic catalog CSV configured under `[catalog.synth]`.
pub fn cmd_synth(config: &PipelineConfig) -> Result<(), CliError> {
    let synth = config.catalog.synth.as_ref().ok_or_else(|| {
        CliError::Config("synth requires a [catalog.synth] section".into())
    })?;
    let out_dir = artifacts::ensure_out_dir(&config.out_dir)?;
    let records =
        catalog::generate_synthetic_catalog(derive_seed(config.seed, "synth"), synth.count, &synth.region());
    let path = out_dir.join(artifacts::CATALOG_CSV);
    let mut buf = Vec::new();
    catalog::serialize_catalog(&records, &mut buf)
        .map_err(|e| CliError::Other(e.to_string()))?;
    fs::write(&path, buf)?;
    println!("wrote {} records to {}", records.len(), path.display());
    Ok(())
}

fn load_records(config: &PipelineConfig) -> Result<Vec<CatalogRecord>, CliError> {
    if let Some(source) = &config.catalog.source {
        let file = fs::File::open(source).map_err(|e| {
            CliError::Config(format!("cannot open catalog {}: {e}", source.display()))
        })?;
        let parsed = catalog::parse_catalog(file, config.catalog.strict)
            .map_err(|e| CliError::Parse(e.to_string()))?;
        if parsed.skipped > 0 {
            println!("skipped {} invalid rows", parsed.skipped);
        }
        Ok(parsed.records)
    } else {
        let synth = config.catalog.synth.as_ref().expect("validated: synth present");
        Ok(catalog::generate_synthetic_catalog(
            derive_seed(config.seed, "synth"),
            synth.count,
            &synth.region(),
        ))
    }
}

fn resolve_encoder(config: &PipelineConfig, records: &[CatalogRecord]) -> EncoderConfig {
    let mut vocabulary = config.encoder.zone_vocabulary.clone();
    if vocabulary.is_empty() {
        vocabulary = records.iter().map(|r| r.zone.clone()).collect();
        vocabulary.sort();
        vocabulary.dedup();
    }
    EncoderConfig {
        input_variables: config.encoder.inputs.clone(),
        output_variables: config.encoder.outputs.clone(),
        zone_vocabulary: vocabulary,
        epoch_origin: config.encoder.epoch_origin,
        unknown_zone: config.encoder.unknown_zone,
    }
}

/// Parses or synthesizes the catalog, encodes and splits it, fits the scaler
/// on the training portion, and writes the three ingest artifacts.
pub fn cmd_ingest(config: &PipelineConfig) -> Result<(), CliError> {
    let out_dir = artifacts::ensure_out_dir(&config.out_dir)?;
    let records = load_records(config)?;
    let records = catalog::filter_records(&records, config.catalog.min_magnitude, config.date_window())
        .map_err(|e| CliError::Config(e.to_string()))?;
    if records.is_empty() {
        return Err(CliError::Config("empty dataset".into()));
    }

    let encoder = resolve_encoder(config, &records);
    let raw = features::encode_records(&records, &encoder)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let rule = config.split.rule()?;
    let split_seed = derive_seed(config.seed, "split");
    let [train_idx, val_idx, prod_idx] = features::split_indices(raw.len(), &rule, split_seed)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let train_raw: Vec<_> = train_idx.iter().map(|&i| raw[i].clone()).collect();
    let scaler = features::fit_scaler(&train_raw, &encoder)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let samples: Vec<_> = raw.iter().map(|r| features::apply_scaler(&scaler, r)).collect();

    let manifest = SplitManifest {
        seed: split_seed,
        rule,
        sizes: SplitSizes {
            training: train_idx.len(),
            validation: val_idx.len(),
            production: prod_idx.len(),
        },
        indices: SplitIndices {
            training: train_idx,
            validation: val_idx,
            production: prod_idx,
        },
    };

    artifacts::write_json(&out_dir.join(artifacts::SAMPLES_JSON), &SampleStore { encoder, samples })?;
    artifacts::write_json(&out_dir.join(artifacts::SCALER_JSON), &scaler)?;
    artifacts::write_json(&out_dir.join(artifacts::SPLIT_MANIFEST_JSON), &manifest)?;

    println!(
        "ingested {} samples: training {} / validation {} / production {}",
        raw.len(),
        manifest.sizes.training,
        manifest.sizes.validation,
        manifest.sizes.production
    );
    Ok(())
}

fn map_train_error(e: harness::HarnessError) -> CliError {
    match e {
        harness::HarnessError::Train(TrainError::NonFiniteLoss { epoch, .. }) => {
            CliError::Divergence(format!("non-finite loss at epoch {epoch}"))
        }
        other => CliError::Other(other.to_string()),
    }
}

/// Trains and ranks the preliminary models on the 200-sample protocol.
pub fn cmd_compare(config: &PipelineConfig) -> Result<(), CliError> {
    let out_dir = artifacts::ensure_out_dir(&config.out_dir)?;
    let ingest = artifacts::load_ingest_artifacts(&out_dir)?;
    let split = ingest.manifest.materialize(&ingest.store.samples)?;

    let section = &config.compare;
    let comparison_config = ComparisonConfig {
        training: section.training.to_core(UpdateRule::Quickprop, config.seed),
        preliminary_sample_count: section.preliminary_samples,
        rule_override: section.rule_override.or(section.training.rule),
    };
    let report = harness::run_comparison(
        &split,
        &ingest.scaler,
        &ingest.store.encoder,
        &section.models,
        &comparison_config,
    )
    .map_err(map_train_error)?;

    artifacts::write_json(&out_dir.join(artifacts::COMPARISON_JSON), &report)?;
    harness::emit_comparison_figs(&report, &out_dir).map_err(|e| CliError::Other(e.to_string()))?;

    println!("ranking (best first):");
    for (place, name) in report.ranking.iter().enumerate() {
        let entry = report.models.iter().find(|m| &m.model == name).expect("ranked model exists");
        println!(
            "  {}. {}  val_mse {:.6}  prod_mse {:.6}  cycles {}",
            place + 1,
            name,
            entry.validation.mse,
            entry.production.mse,
            entry.cycles
        );
    }
    println!("selected: {}", report.selected);
    Ok(())
}

/// Trains the final network on the full split and writes model, report,
/// history, and prediction-figure artifacts.
pub fn cmd_train_final(config: &PipelineConfig) -> Result<(), CliError> {
    let out_dir = artifacts::ensure_out_dir(&config.out_dir)?;
    let ingest = artifacts::load_ingest_artifacts(&out_dir)?;
    let split = ingest.manifest.materialize(&ingest.store.samples)?;
    let encoder = &ingest.store.encoder;

    let final_config = FinalConfig {
        training: config.final_stage.training.to_core(UpdateRule::Quickprop, config.seed),
        spec_override: config
            .final_stage
            .spec_override(encoder.input_width(), encoder.output_width())?,
    };
    let (net, report, history) =
        harness::run_final(&split, &ingest.scaler, encoder, &final_config).map_err(map_train_error)?;

    artifacts::write_json(&out_dir.join(artifacts::MODEL_JSON), &net.to_model_file())?;
    artifacts::write_json(&out_dir.join(artifacts::REPORT_JSON), &report)?;

    let mut report_csv = Vec::new();
    report.write_csv(&mut report_csv)?;
    fs::write(out_dir.join(artifacts::REPORT_CSV), report_csv)?;

    let mut history_csv = Vec::new();
    history.write_csv(&mut history_csv)?;
    fs::write(out_dir.join(artifacts::HISTORY_CSV), history_csv)?;
    artifacts::write_json(&out_dir.join(artifacts::HISTORY_SUMMARY_JSON), &history.summary())?;

    harness::emit_prediction_fig(
        &net,
        &split.production,
        &ingest.scaler,
        encoder,
        &out_dir.join(artifacts::FIG5_CSV),
    )
    .map_err(|e| CliError::Other(e.to_string()))?;

    println!(
        "trained {} cycles ({:?}); production percent errors:",
        history.cycles, history.stop_reason
    );
    for (name, pct) in &report.splits.production.percent_error {
        println!("  {name}: {pct:.2}%");
    }
    Ok(())
}

fn format_wall(seconds: f64) -> String {
    let total = seconds.round() as u64;
    format!("{}:{:02}:{:02}", total / 3600, (total % 3600) / 60, total % 60)
}

/// Renders a report as the fixed-format summary table.
pub fn render_report(report: &MetricsReport) -> String {
    let mut lines = Vec::new();
    let mut row = |label: &str, value: String| lines.push(format!("{label:<32}{value}"));
    row("cycles", report.cycles.to_string());
    row("wall_time", format_wall(report.wall_seconds));
    for (split_name, split) in [
        ("production", &report.splits.production),
        ("validation", &report.splits.validation),
        ("training", &report.splits.training),
    ] {
        for (variable, pct) in &split.percent_error {
            row(&format!("{split_name}.{variable}"), format!("{pct:.2}%"));
        }
    }
    row("mse", report.mse.to_string());
    row("nmse", report.nmse.to_string());
    row("percent_error", report.percent_error_aggregate.to_string());
    lines.join("\n") + "\n"
}

/// Prints the summary table for a stored report file.
pub fn cmd_report(path: &Path) -> Result<(), CliError> {
    let report: MetricsReport = artifacts::read_json(path)?;
    print!("{}", render_report(&report));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use quakecast_core::metrics::{OutOfRangeCounts, SplitMetrics, SplitsSection};

    fn table_vi_shaped_report() -> MetricsReport {
        let section = |values: [f64; 3]| SplitMetrics {
            percent_error: [
                ("latitude".to_string(), values[0]),
                ("longitude".to_string(), values[1]),
                ("magnitude".to_string(), values[2]),
            ]
            .into_iter()
            .collect(),
        };
        MetricsReport {
            splits: SplitsSection {
                training: section([6.56, 8.32, 0.52]),
                validation: section([2.70, 5.32, 0.53]),
                production: section([2.40, 5.14, 0.59]),
            },
            mse: 0.161018021136,
            nmse: 1.066836403099,
            percent_error_aggregate: 12.519098354399,
            cycles: 4411,
            wall_seconds: 6.0 * 3600.0 + 24.0 * 60.0 + 22.0,
            out_of_range_predictions: OutOfRangeCounts { training: 0, validation: 0, production: 0 },
        }
    }

    #[test]
    fn report_rendering_is_fixed_format() {
        let text = render_report(&table_vi_shaped_report());
        let expected = "\
cycles                          4411
wall_time                       6:24:22
production.latitude             2.40%
production.longitude            5.14%
production.magnitude            0.59%
validation.latitude             2.70%
validation.longitude            5.32%
validation.magnitude            0.53%
training.latitude               6.56%
training.longitude              8.32%
training.magnitude              0.52%
mse                             0.161018021136
nmse                            1.066836403099
percent_error                   12.519098354399
";
        assert_eq!(text, expected);
        assert_eq!(text.lines().count(), 14);
    }

    #[test]
    fn wall_time_formats_as_hms() {
        assert_eq!(format_wall(0.0), "0:00:00");
        assert_eq!(format_wall(61.4), "0:01:01");
        assert_eq!(format_wall(3661.0), "1:01:01");
    }
}
