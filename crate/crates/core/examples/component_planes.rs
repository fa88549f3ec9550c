//! Export per-feature component planes and the cluster map as netpbm images.

use trollmap::clustering::auto_cluster_count;
use trollmap::corpus::group_by_user;
use trollmap::features::{
    apply_normalization, build_matrix, extract_features, fit_normalization, SymbolSet,
    TextOptions, DEFAULT_SYMBOLS, FEATURE_NAMES,
};
use trollmap::planes::export_planes;
use trollmap::som::{derive_seed, train, SomConfig, STREAM_CLUSTER};
use trollmap::synth::planted_troll_corpus;

fn main() {
    let comments = planted_troll_corpus(60, 3, 42);
    let docs = group_by_user(&comments, 1);
    let symbols = SymbolSet::new(DEFAULT_SYMBOLS.to_vec()).unwrap();
    let vectors: Vec<_> = docs
        .iter()
        .map(|d| extract_features(d, &symbols, TextOptions::default()))
        .collect();
    let raw = build_matrix(&vectors).unwrap();
    let norm = fit_normalization(&raw).unwrap();
    let data = apply_normalization(&raw, &norm);

    let config = SomConfig::default();
    let trained = train(&config, &data).unwrap();
    let clusters = auto_cluster_count(
        &trained.grid,
        2,
        15,
        derive_seed(config.seed, STREAM_CLUSTER),
    )
    .unwrap()
    .model;

    let out = std::env::temp_dir().join("trollmap_planes");
    let paths = export_planes(&trained.grid, Some(&clusters), &FEATURE_NAMES, &out).unwrap();
    println!("wrote {} images to {}", paths.len(), out.display());
    for p in &paths {
        println!("  {}", p.file_name().unwrap().to_string_lossy());
    }
}
