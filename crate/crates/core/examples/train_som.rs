//! Train a self-organizing map on synthetic per-user features and watch the
//! quantization error fall.

use trollmap::corpus::group_by_user;
use trollmap::features::{
    apply_normalization, build_matrix, extract_features, fit_normalization, SymbolSet,
    TextOptions, DEFAULT_SYMBOLS,
};
use trollmap::som::{train, SomConfig};
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

    println!(
        "trained a {}x{} map on {} users over {} epochs",
        config.grid_width,
        config.grid_height,
        data.n_rows(),
        trained.qe_history.len()
    );
    for epoch in [0, 9, 99, 499, trained.qe_history.len() - 1] {
        println!("epoch {:>4}: quantization error {:.6}", epoch + 1, trained.qe_history[epoch]);
    }
}
