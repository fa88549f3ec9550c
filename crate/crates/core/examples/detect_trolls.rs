//! End-to-end pipeline: comment dump in, troll report and images out.

use std::fs::File;
use std::io::BufWriter;

use trollmap::corpus::{write_comments_jsonl, InputFormat};
use trollmap::pipeline::{format_significance_table, run_pipeline, PipelineConfig};
use trollmap::synth::planted_troll_corpus;

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("comments.jsonl");
    let comments = planted_troll_corpus(141, 4, 42);
    write_comments_jsonl(&comments, BufWriter::new(File::create(&input).unwrap())).unwrap();

    let config = PipelineConfig::new(input, InputFormat::Jsonl, dir.path().join("out"));
    let report = run_pipeline(&config).unwrap();

    println!(
        "{} users in {} clusters",
        report.users.len(),
        report.meta.k
    );
    for cluster in &report.clusters {
        println!(
            "cluster {}: {} users, centroid messages {:.1}, mean length {:.1}",
            cluster.id, cluster.size, cluster.centroid[0], cluster.centroid[1]
        );
    }
    println!("\nfeature significance:\n{}", format_significance_table(&report));
    println!("flagged as trolls: {:?}", report.flagged_users());
}
