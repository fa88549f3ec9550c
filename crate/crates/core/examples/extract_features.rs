//! Turn a synthetic comment dump into per-user feature vectors.

use trollmap::corpus::group_by_user;
use trollmap::features::{
    extract_features, SymbolSet, TextOptions, DEFAULT_SYMBOLS, FEATURE_NAMES,
};
use trollmap::synth::planted_troll_corpus;

fn main() {
    let comments = planted_troll_corpus(8, 1, 42);
    let docs = group_by_user(&comments, 1);
    let symbols = SymbolSet::new(DEFAULT_SYMBOLS.to_vec()).unwrap();

    println!("{}", FEATURE_NAMES.join("\t"));
    for doc in &docs {
        let v = extract_features(doc, &symbols, TextOptions::default());
        let freqs: Vec<String> = v.freqs.iter().map(|f| format!("{f:.4}")).collect();
        println!(
            "{}\t{}\t{:.1}\t{}",
            v.user_id,
            v.m_count,
            v.avg_len,
            freqs.join("\t")
        );
    }
}
