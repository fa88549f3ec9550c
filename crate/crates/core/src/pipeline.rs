//! End-to-end orchestration: comments -> per-user features -> SOM ->
//! codebook clustering -> troll report, plus the on-disk artifact formats
//! (feature CSV, model JSON, report JSON, netpbm component planes).
//!
//! One seed governs a run: the SOM trains with it directly and the codebook
//! clustering derives its own stream from it, so a saved model plus the
//! feature CSV reproduce the pipeline's report byte for byte.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clustering::{
    assign_users, auto_cluster_count, field_significance, ClusterModel, SignificanceReport,
};
use crate::corpus::{group_by_user, parse_comments, InputFormat};
use crate::detect::{build_report, identify_troll_clusters, DetectParams, TrollReport};
use crate::error::{Error, Result};
use crate::features::{
    apply_normalization, build_matrix, extract_features, fit_normalization, read_features_csv,
    write_features_csv, FeatureMatrix, NormalizationParams, SymbolSet, TextOptions,
    FEATURE_COUNT, FEATURE_NAMES,
};
use crate::planes::export_planes;
use crate::som::{derive_seed, train, SomConfig, SomGrid, STREAM_CLUSTER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub format: InputFormat,
    pub min_messages: usize,
    pub fold_homoglyphs: bool,
    pub lenient: bool,
    pub som: SomConfig,
    pub k_min: usize,
    pub k_max: usize,
    pub detect: DetectParams,
    pub out_dir: PathBuf,
}

impl PipelineConfig {
    pub fn new(input: PathBuf, format: InputFormat, out_dir: PathBuf) -> Self {
        PipelineConfig {
            input,
            format,
            min_messages: 1,
            fold_homoglyphs: false,
            lenient: false,
            som: SomConfig::default(),
            k_min: 2,
            k_max: 15,
            detect: DetectParams::default(),
            out_dir,
        }
    }

    pub fn text_options(&self) -> TextOptions {
        TextOptions {
            fold_homoglyphs: self.fold_homoglyphs,
        }
    }
}

/// Flat key-value configuration file. Every key is optional; CLI flags
/// override file values, which override the defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
pub struct FlatConfig {
    pub input: Option<PathBuf>,
    pub format: Option<InputFormat>,
    pub out_dir: Option<PathBuf>,
    pub min_messages: Option<usize>,
    pub fold_homoglyphs: Option<bool>,
    pub lenient: Option<bool>,
    pub grid_width: Option<usize>,
    pub grid_height: Option<usize>,
    pub lr_start: Option<f64>,
    pub lr_end: Option<f64>,
    pub radius_start: Option<f64>,
    pub radius_end: Option<f64>,
    pub max_epochs: Option<usize>,
    pub seed: Option<u64>,
    pub init: Option<crate::som::InitMethod>,
    pub early_stop: Option<bool>,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
    pub z_threshold: Option<f64>,
    pub max_cluster_fraction: Option<f64>,
}

impl FlatConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }

    /// Resolves into a full pipeline configuration; `input` and `out_dir`
    /// must be present by now (from the file or from flags).
    pub fn resolve(self) -> Result<PipelineConfig> {
        let input = self
            .input
            .ok_or_else(|| Error::Schema("missing required `input`".into()))?;
        let out_dir = self
            .out_dir
            .ok_or_else(|| Error::Schema("missing required `out_dir`".into()))?;
        let format = self.format.unwrap_or(InputFormat::Jsonl);
        let mut config = PipelineConfig::new(input, format, out_dir);
        if let Some(v) = self.min_messages {
            config.min_messages = v;
        }
        if let Some(v) = self.fold_homoglyphs {
            config.fold_homoglyphs = v;
        }
        if let Some(v) = self.lenient {
            config.lenient = v;
        }
        if let Some(v) = self.grid_width {
            config.som.grid_width = v;
        }
        if let Some(v) = self.grid_height {
            config.som.grid_height = v;
        }
        if let Some(v) = self.lr_start {
            config.som.lr_start = v;
        }
        if let Some(v) = self.lr_end {
            config.som.lr_end = v;
        }
        if let Some(v) = self.radius_start {
            config.som.radius_start = v;
        }
        if let Some(v) = self.radius_end {
            config.som.radius_end = v;
        }
        if let Some(v) = self.max_epochs {
            config.som.max_epochs = v;
        }
        if let Some(v) = self.seed {
            config.som.seed = v;
        }
        if let Some(v) = self.init {
            config.som.init = v;
        }
        if let Some(v) = self.early_stop {
            config.som.early_stop = v;
        }
        if let Some(v) = self.k_min {
            config.k_min = v;
        }
        if let Some(v) = self.k_max {
            config.k_max = v;
        }
        if let Some(v) = self.z_threshold {
            config.detect.z_threshold = v;
        }
        if let Some(v) = self.max_cluster_fraction {
            config.detect.max_cluster_fraction = v;
        }
        Ok(config)
    }
}

/// Serialized trained model: SOM configuration, normalization parameters,
/// grid dimensions, row-major node weights, quantization-error history, and
/// (after detection) the codebook clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub config: SomConfig,
    pub normalization: NormalizationParams,
    pub grid_width: usize,
    pub grid_height: usize,
    pub dim: usize,
    pub weights: Vec<Vec<f64>>,
    pub qe_history: Vec<f64>,
    pub clusters: Option<ClusterModel>,
}

impl ModelFile {
    pub fn grid(&self) -> SomGrid {
        SomGrid {
            width: self.grid_width,
            height: self.grid_height,
            dim: self.dim,
            weights: self.weights.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn save_report(report: &TrollReport, path: &Path) -> Result<()> {
    write_json(path, report)
}

pub fn load_report(path: &Path) -> Result<TrollReport> {
    let file = File::open(path)?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

/// Ingests comments and produces the raw per-user feature matrix.
pub fn extract_stage(config: &PipelineConfig) -> Result<FeatureMatrix> {
    let file = File::open(&config.input).map_err(|e| Error::in_stage("corpus", e.into()))?;
    let outcome = parse_comments(BufReader::new(file), config.format, config.lenient)
        .map_err(|e| Error::in_stage("corpus", e))?;
    if outcome.skipped > 0 {
        eprintln!("warning: skipped {} malformed record(s)", outcome.skipped);
    }
    if outcome.comments.is_empty() {
        return Err(Error::in_stage(
            "corpus",
            Error::Schema("input contains no comments".into()),
        ));
    }
    let docs = group_by_user(&outcome.comments, config.min_messages);
    if docs.is_empty() {
        return Err(Error::in_stage(
            "corpus",
            Error::Schema(format!(
                "no user has at least {} message(s)",
                config.min_messages
            )),
        ));
    }
    let symbols = SymbolSet::default();
    let opts = config.text_options();
    let vectors: Vec<_> = docs
        .iter()
        .map(|doc| extract_features(doc, &symbols, opts))
        .collect();
    for v in &vectors {
        if v.avg_len == 0.0 {
            eprintln!("warning: user `{}` has only empty messages", v.user_id);
        }
    }
    build_matrix(&vectors).map_err(|e| Error::in_stage("features", e))
}

/// Everything detection produces from a trained model + raw features.
pub struct DetectionOutcome {
    pub report: TrollReport,
    pub clusters: ClusterModel,
}

/// Clustering, significance, troll flagging, and report assembly from saved
/// artifacts. The pipeline itself calls this, so re-running detection on a
/// saved model and feature CSV reproduces the pipeline report exactly.
pub fn detect_from_artifacts(
    model: &ModelFile,
    raw_matrix: &FeatureMatrix,
    k_min: usize,
    k_max: usize,
    detect_params: &DetectParams,
) -> Result<DetectionOutcome> {
    let grid = model.grid();
    let normalized = apply_normalization(raw_matrix, &model.normalization);

    let outcome = auto_cluster_count(
        &grid,
        k_min,
        k_max,
        derive_seed(model.config.seed, STREAM_CLUSTER),
    )
    .map_err(|e| Error::in_stage("clustering", e))?;
    if outcome.degenerate {
        eprintln!("warning: degenerate codebook (all node weights identical)");
    }
    let cluster_model = outcome.model;
    let assignments = assign_users(&grid, &cluster_model, &normalized);

    // Significance needs at least two user-level clusters; a discussion whose
    // users all land in one cluster gets a zeroed table instead of an abort.
    let significance = match field_significance(&normalized, &assignments) {
        Ok(report) => report,
        Err(Error::Numeric(_)) => {
            eprintln!("warning: all users share one cluster; significance set to zero");
            SignificanceReport {
                scores: vec![0.0; FEATURE_COUNT],
            }
        }
        Err(e) => return Err(Error::in_stage("clustering", e)),
    };

    let troll_clusters = identify_troll_clusters(
        &cluster_model,
        raw_matrix,
        &assignments,
        &model.normalization,
        detect_params,
    );
    let report = build_report(
        raw_matrix,
        &model.normalization,
        &cluster_model,
        &assignments,
        &significance,
        &troll_clusters,
        &model.config,
        detect_params,
    )
    .map_err(|e| Error::in_stage("detect", e))?;
    Ok(DetectionOutcome {
        report,
        clusters: cluster_model,
    })
}

/// Runs the full five-step pipeline and writes all artifacts into
/// `config.out_dir`: `features.csv`, `model.json`, `report.json`, and
/// `planes/`. Identical config + input produce byte-identical outputs.
pub fn run_pipeline(config: &PipelineConfig) -> Result<TrollReport> {
    let raw_matrix = extract_stage(config)?;

    let norm = fit_normalization(&raw_matrix).map_err(|e| Error::in_stage("features", e))?;
    let normalized = apply_normalization(&raw_matrix, &norm);

    let trained = train(&config.som, &normalized).map_err(|e| Error::in_stage("som", e))?;

    let mut model = ModelFile {
        config: config.som.clone(),
        normalization: norm,
        grid_width: trained.grid.width,
        grid_height: trained.grid.height,
        dim: trained.grid.dim,
        weights: trained.grid.weights.clone(),
        qe_history: trained.qe_history.clone(),
        clusters: None,
    };

    let detection =
        detect_from_artifacts(&model, &raw_matrix, config.k_min, config.k_max, &config.detect)?;
    model.clusters = Some(detection.clusters.clone());

    std::fs::create_dir_all(&config.out_dir)?;
    let csv_file = File::create(config.out_dir.join("features.csv"))?;
    write_features_csv(&raw_matrix, BufWriter::new(csv_file))
        .map_err(|e| Error::in_stage("features", e))?;
    model.save(&config.out_dir.join("model.json"))?;
    save_report(&detection.report, &config.out_dir.join("report.json"))?;
    export_component_planes(&model, &config.out_dir.join("planes"))?;

    Ok(detection.report)
}

/// Writes the 12 component planes (and the cluster map when the model holds
/// a clustering) for a saved model.
pub fn export_component_planes(model: &ModelFile, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if model.dim != FEATURE_COUNT {
        return Err(Error::Schema(format!(
            "model has dim {}, expected {FEATURE_COUNT}",
            model.dim
        )));
    }
    let grid = model.grid();
    export_planes(&grid, model.clusters.as_ref(), &FEATURE_NAMES, out_dir)
}

/// Loads a feature CSV from disk.
pub fn load_features(path: &Path) -> Result<FeatureMatrix> {
    let file = File::open(path)?;
    read_features_csv(BufReader::new(file))
}

/// Prints the significance table in two columns: feature name, percent with
/// one decimal.
pub fn format_significance_table(report: &TrollReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("{:<8}  {:>6}\n", "feature", "%"));
    for score in &report.significance {
        out.push_str(&format!("{:<8}  {:>6.1}\n", score.feature, score.score));
    }
    out
}

/// Convenience for tests and examples: user-level cluster map from a report.
pub fn report_assignments(report: &TrollReport) -> BTreeMap<String, usize> {
    report
        .users
        .iter()
        .map(|u| (u.user_id.clone(), u.cluster))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::write_comments_jsonl;
    use crate::synth::planted_troll_corpus;

    fn small_config(dir: &Path, seed: u64) -> PipelineConfig {
        let mut config = PipelineConfig::new(
            dir.join("comments.jsonl"),
            InputFormat::Jsonl,
            dir.join("out"),
        );
        config.som.max_epochs = 60;
        config.som.seed = seed;
        config.k_max = 6;
        config
    }

    fn write_fixture(dir: &Path, normal: usize, trolls: usize, seed: u64) {
        let comments = planted_troll_corpus(normal, trolls, seed);
        let file = File::create(dir.join("comments.jsonl")).unwrap();
        write_comments_jsonl(&comments, BufWriter::new(file)).unwrap();
    }

    #[test]
    fn pipeline_writes_all_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path(), 40, 2, 3);
        let config = small_config(dir.path(), 3);
        let report = run_pipeline(&config).unwrap();
        assert_eq!(report.users.len(), 42);
        let out = dir.path().join("out");
        assert!(out.join("features.csv").exists());
        assert!(out.join("model.json").exists());
        assert!(out.join("report.json").exists());
        let planes: Vec<_> = std::fs::read_dir(out.join("planes")).unwrap().collect();
        assert_eq!(planes.len(), 13);
    }

    #[test]
    fn empty_input_is_stage_one_error() {
        let dir = tempfile::tempdir().unwrap();
        File::create(dir.path().join("comments.jsonl")).unwrap();
        let config = small_config(dir.path(), 1);
        let err = run_pipeline(&config).unwrap_err();
        assert!(err.to_string().contains("corpus"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn rerun_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path(), 30, 2, 7);
        let mut config = small_config(dir.path(), 7);

        run_pipeline(&config).unwrap();
        let first = std::fs::read(dir.path().join("out/report.json")).unwrap();

        config.out_dir = dir.path().join("out2");
        run_pipeline(&config).unwrap();
        let second = std::fs::read(dir.path().join("out2/report.json")).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn detect_reproduces_pipeline_report() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path(), 30, 2, 11);
        let config = small_config(dir.path(), 11);
        let report = run_pipeline(&config).unwrap();

        let model = ModelFile::load(&config.out_dir.join("model.json")).unwrap();
        let features = load_features(&config.out_dir.join("features.csv")).unwrap();
        let redone =
            detect_from_artifacts(&model, &features, config.k_min, config.k_max, &config.detect)
                .unwrap();
        assert_eq!(redone.report, report);
    }

    #[test]
    fn flat_config_resolution_and_overrides() {
        let flat: FlatConfig = serde_json::from_str(
            r#"{"input":"in.jsonl","out_dir":"out","seed":9,"grid_width":6,"z_threshold":3.5}"#,
        )
        .unwrap();
        let config = flat.resolve().unwrap();
        assert_eq!(config.som.seed, 9);
        assert_eq!(config.som.grid_width, 6);
        assert_eq!(config.som.grid_height, 10);
        assert_eq!(config.detect.z_threshold, 3.5);

        let missing: FlatConfig = serde_json::from_str(r#"{"seed":1}"#).unwrap();
        assert!(missing.resolve().is_err());
    }

    #[test]
    fn model_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path(), 20, 1, 13);
        let config = small_config(dir.path(), 13);
        run_pipeline(&config).unwrap();
        let path = config.out_dir.join("model.json");
        let model = ModelFile::load(&path).unwrap();
        assert_eq!(model.dim, FEATURE_COUNT);
        assert_eq!(model.weights.len(), 100);
        assert!(model.clusters.is_some());
        let copy = dir.path().join("model2.json");
        model.save(&copy).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&copy).unwrap());
    }
}
