//! End-to-end tests of the `quakecast` binary: exit codes, artifact shapes,
//! and rerun determinism.

use quakecast_cli::artifacts::{SampleStore, SplitManifest};
use quakecast_core::harness;
use quakecast_core::network::{ModelFile, Network};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quakecast"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

struct Workspace {
    _dir: TempDir,
    config_path: PathBuf,
    out_dir: PathBuf,
}

impl Workspace {
    fn new(config_body: &str) -> Self {
        let dir = TempDir::new().unwrap();
        let out_dir = dir.path().join("run");
        let config_path = dir.path().join("pipeline.toml");
        let text = format!("out_dir = {:?}\n{config_body}", out_dir.to_str().unwrap());
        fs::write(&config_path, text).unwrap();
        Self { _dir: dir, config_path, out_dir }
    }

    fn config(&self) -> &str {
        self.config_path.to_str().unwrap()
    }

    fn artifact(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// Small synthetic pipeline that exercises every stage quickly.
fn small_config(seed: u64) -> String {
    format!(
        r#"
seed = {seed}

[catalog.synth]
count = 420

[split]
proportions = [0.6, 0.2, 0.2]

[compare]
preliminary_samples = 120
[compare.training]
max_epochs = 2

[final]
layers = ["radial:8", "tanh:8"]
[final.training]
max_epochs = 3
"#
    )
}

#[test]
fn missing_config_file_exits_2() {
    let output = run(&["ingest", "--config", "/nonexistent/config.toml"]);
    assert_exit(&output, 2);
}

#[test]
fn invalid_config_exits_2() {
    let ws = Workspace::new("seed = 1\n[split]\ncounts = [1, 1, 1]\n");
    let output = run(&["ingest", "--config", ws.config()]);
    assert_exit(&output, 2);
    assert!(String::from_utf8_lossy(&output.stderr).contains("catalog"));
}

#[test]
fn empty_synth_dataset_exits_2() {
    let ws = Workspace::new(
        "seed = 1\n[catalog.synth]\ncount = 0\n[split]\nproportions = [0.6, 0.2, 0.2]\n",
    );
    let output = run(&["ingest", "--config", ws.config()]);
    assert_exit(&output, 2);
    assert!(String::from_utf8_lossy(&output.stderr).contains("empty dataset"));
}

#[test]
fn ingest_reproduces_published_segmentation() {
    let ws = Workspace::new(
        r#"
seed = 7

[catalog.synth]
count = 5798

[split]
counts = [3001, 1551, 1246]
"#,
    );
    let output = run(&["ingest", "--config", ws.config()]);
    assert_exit(&output, 0);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("training 3001 / validation 1551 / production 1246"), "{stdout}");

    let manifest: SplitManifest =
        serde_json::from_str(&fs::read_to_string(ws.artifact("split_manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest.sizes.training, 3001);
    assert_eq!(manifest.sizes.validation, 1551);
    assert_eq!(manifest.sizes.production, 1246);

    let store: SampleStore =
        serde_json::from_str(&fs::read_to_string(ws.artifact("samples.json")).unwrap()).unwrap();
    assert_eq!(store.samples.len(), 5798);
}

#[test]
fn ingest_rerun_is_byte_identical() {
    let ws = Workspace::new(&small_config(11));
    assert_exit(&run(&["ingest", "--config", ws.config()]), 0);
    let first: Vec<Vec<u8>> = ["samples.json", "scaler.json", "split_manifest.json"]
        .iter()
        .map(|name| fs::read(ws.artifact(name)).unwrap())
        .collect();
    assert_exit(&run(&["ingest", "--config", ws.config()]), 0);
    for (name, before) in ["samples.json", "scaler.json", "split_manifest.json"].iter().zip(&first)
    {
        let after = fs::read(ws.artifact(name)).unwrap();
        assert_eq!(&after, before, "{name} changed between identical runs");
    }
}

#[test]
fn synth_output_parses_and_seeds_ingest() {
    let ws = Workspace::new(&small_config(13));
    assert_exit(&run(&["synth", "--config", ws.config()]), 0);
    let text = fs::read_to_string(ws.artifact("catalog.csv")).unwrap();
    assert!(text.starts_with("date,time,latitude,longitude,depth_km,magnitude,zone\n"));
    assert_eq!(text.lines().count(), 1 + 420);

    // Ingesting the written CSV gives the same artifacts as the in-memory
    // synth path, because both go through the same generator and seed.
    assert_exit(&run(&["ingest", "--config", ws.config()]), 0);
    let from_synth = fs::read(ws.artifact("samples.json")).unwrap();

    let csv_path = ws.artifact("catalog.csv");
    let ws2 = Workspace::new(&format!(
        "seed = 13\n[catalog]\nsource = {:?}\n[split]\nproportions = [0.6, 0.2, 0.2]\n",
        csv_path.to_str().unwrap()
    ));
    assert_exit(&run(&["ingest", "--config", ws2.config()]), 0);
    let from_csv = fs::read(ws2.artifact("samples.json")).unwrap();
    assert_eq!(from_synth, from_csv);
}

#[test]
fn compare_without_ingest_exits_3() {
    let ws = Workspace::new(&small_config(3));
    let output = run(&["compare", "--config", ws.config()]);
    assert_exit(&output, 3);
    assert!(String::from_utf8_lossy(&output.stderr).contains("missing artifact"));
}

#[test]
fn train_final_without_ingest_exits_3() {
    let ws = Workspace::new(&small_config(3));
    assert_exit(&run(&["train-final", "--config", ws.config()]), 3);
}

#[test]
fn compare_writes_figures_and_ranking() {
    let ws = Workspace::new(&small_config(17));
    assert_exit(&run(&["ingest", "--config", ws.config()]), 0);
    let output = run(&["compare", "--config", ws.config()]);
    assert_exit(&output, 0);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("ranking"));
    assert!(stdout.contains("selected:"));

    for fig in ["fig2_validation.csv", "fig3_training.csv", "fig4_production.csv"] {
        let text = fs::read_to_string(ws.artifact(fig)).unwrap();
        assert_eq!(text.lines().count(), 4, "{fig}: header plus three model rows");
        assert!(text.starts_with("model,mse,percent_error_mean\n"));
    }
    let comparison: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ws.artifact("comparison.json")).unwrap()).unwrap();
    assert_eq!(comparison["models"].as_array().unwrap().len(), 3);
    assert_eq!(comparison["preliminary_sample_count"], 120);
    assert_eq!(
        comparison["models_not_implemented"],
        serde_json::json!(["time_series_recurrent", "generalized_recurrent"])
    );

    // Deterministic rerun, byte for byte.
    let before = fs::read(ws.artifact("comparison.json")).unwrap();
    assert_exit(&run(&["compare", "--config", ws.config()]), 0);
    assert_eq!(fs::read(ws.artifact("comparison.json")).unwrap(), before);
}

#[test]
fn train_final_writes_model_report_and_figure() {
    let ws = Workspace::new(&small_config(19));
    assert_exit(&run(&["ingest", "--config", ws.config()]), 0);
    let output = run(&["train-final", "--config", ws.config()]);
    assert_exit(&output, 0);

    for name in [
        "model.json",
        "report.json",
        "report.csv",
        "history.csv",
        "history_summary.json",
        "fig5_compare.csv",
    ] {
        assert!(ws.artifact(name).exists(), "{name} missing");
    }

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ws.artifact("report.json")).unwrap()).unwrap();
    for key in [
        "splits",
        "mse",
        "nmse",
        "percent_error_aggregate",
        "cycles",
        "wall_seconds",
        "out_of_range_predictions",
    ] {
        assert!(report.get(key).is_some(), "report.json missing `{key}`");
    }
    for split in ["training", "validation", "production"] {
        let pe = &report["splits"][split]["percent_error"];
        assert!(pe["latitude"].is_f64() || pe["latitude"].is_u64());
        assert!(pe["longitude"].is_number() && pe["magnitude"].is_number());
    }

    // The stored model round-trips: reloading it and re-emitting the
    // prediction figure reproduces the file byte for byte.
    let model: ModelFile =
        serde_json::from_str(&fs::read_to_string(ws.artifact("model.json")).unwrap()).unwrap();
    let net = Network::from_model_file(&model).unwrap();
    let store: SampleStore =
        serde_json::from_str(&fs::read_to_string(ws.artifact("samples.json")).unwrap()).unwrap();
    let scaler =
        serde_json::from_str(&fs::read_to_string(ws.artifact("scaler.json")).unwrap()).unwrap();
    let manifest: SplitManifest =
        serde_json::from_str(&fs::read_to_string(ws.artifact("split_manifest.json")).unwrap())
            .unwrap();
    let split = manifest.materialize(&store.samples).unwrap();
    let replayed = ws.artifact("fig5_replayed.csv");
    harness::emit_prediction_fig(&net, &split.production, &scaler, &store.encoder, &replayed)
        .unwrap();
    assert_eq!(
        fs::read(ws.artifact("fig5_compare.csv")).unwrap(),
        fs::read(&replayed).unwrap()
    );
}

#[test]
fn report_prints_fixed_table() {
    let ws = Workspace::new(&small_config(23));
    assert_exit(&run(&["ingest", "--config", ws.config()]), 0);
    assert_exit(&run(&["train-final", "--config", ws.config()]), 0);
    let output = run(&["report", "--config", ws.config()]);
    assert_exit(&output, 0);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert_eq!(stdout.lines().count(), 14, "{stdout}");
    assert!(stdout.starts_with("cycles"));
    assert!(stdout.contains("production.latitude"));
    assert!(stdout.contains("nmse"));
}

#[test]
fn report_on_missing_path_exits_3() {
    let output = run(&["report", "/nonexistent/report.json"]);
    assert_exit(&output, 3);
}

#[test]
fn seed_flag_overrides_config() {
    let ws = Workspace::new(&small_config(29));
    assert_exit(&run(&["ingest", "--config", ws.config()]), 0);
    let baseline = fs::read(ws.artifact("split_manifest.json")).unwrap();
    assert_exit(&run(&["ingest", "--config", ws.config(), "--seed", "999"]), 0);
    let overridden = fs::read(ws.artifact("split_manifest.json")).unwrap();
    assert_ne!(baseline, overridden);
}

fn out_flag_workspace() -> (Workspace, PathBuf) {
    let ws = Workspace::new(&small_config(31));
    let alt = ws.out_dir.parent().unwrap().join("alt");
    (ws, alt)
}

#[test]
fn out_flag_overrides_config() {
    let (ws, alt) = out_flag_workspace();
    assert_exit(&run(&["ingest", "--config", ws.config(), "--out", alt.to_str().unwrap()]), 0);
    assert!(alt.join("samples.json").exists());
    assert!(!ws.artifact("samples.json").exists());
}

#[test]
fn divergent_training_exits_4() {
    let ws = Workspace::new(&format!(
        r#"
seed = 37

[catalog.synth]
count = 200

[split]
proportions = [0.6, 0.2, 0.2]

[final]
layers = ["tanh:4"]
[final.training]
rule = "momentum"
learning_rate = 1e300
max_epochs = 60
"#
    ));
    assert_exit(&run(&["ingest", "--config", ws.config()]), 0);
    let output = run(&["train-final", "--config", ws.config()]);
    assert_exit(&output, 4);
    assert!(String::from_utf8_lossy(&output.stderr).contains("diverged"));
}

#[test]
fn catalog_round_trip_through_fs(/* parse(serialize(synth)) by way of files */) {
    let ws = Workspace::new(&small_config(41));
    assert_exit(&run(&["synth", "--config", ws.config()]), 0);
    let path: &Path = &ws.artifact("catalog.csv");
    let parsed =
        quakecast_core::catalog::parse_catalog(fs::File::open(path).unwrap(), true).unwrap();
    assert_eq!(parsed.records.len(), 420);
    assert_eq!(parsed.skipped, 0);
}
