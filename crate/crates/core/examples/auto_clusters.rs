//! Pick the cluster count automatically by silhouette over the trained
//! codebook, then assign users to clusters through their best-matching unit.

use trollmap::clustering::{assign_users, auto_cluster_count};
use trollmap::corpus::group_by_user;
use trollmap::features::{
    apply_normalization, build_matrix, extract_features, fit_normalization, SymbolSet,
    TextOptions, DEFAULT_SYMBOLS,
};
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
    let outcome = auto_cluster_count(
        &trained.grid,
        2,
        15,
        derive_seed(config.seed, STREAM_CLUSTER),
    )
    .unwrap();
    println!(
        "chose k = {} (mean silhouette {:.4})",
        outcome.model.k, outcome.silhouette
    );

    let assignments = assign_users(&trained.grid, &outcome.model, &data);
    for c in 0..outcome.model.k {
        let members: Vec<&str> = assignments
            .iter()
            .filter(|(_, &cluster)| cluster == c)
            .map(|(id, _)| id.as_str())
            .collect();
        let preview: Vec<&str> = members.iter().take(5).copied().collect();
        println!(
            "cluster {c}: {} users, e.g. {}",
            members.len(),
            preview.join(", ")
        );
    }
}
