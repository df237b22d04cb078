//! Regenerates the synthetic JSONL fixtures under `tests/fixtures/`.
//!
//! cargo run -p cwe-senses --example gen_fixtures

use std::path::Path;

use cwe_senses::synth::{blobs, sense_stream, BlobSpec, StreamSpec};
use cwe_senses::{save_dataset, Dataset, EmbeddingRecord};

fn purity8() -> Dataset {
    // Two tight groups; the first holds three A and one B, the second four B.
    let points: [([f32; 2], &str); 8] = [
        ([10.0, 0.0], "A"),
        ([10.2, 0.1], "A"),
        ([9.9, -0.2], "A"),
        ([10.1, 0.2], "B"),
        ([0.0, 10.0], "B"),
        ([0.1, 9.8], "B"),
        ([-0.2, 10.1], "B"),
        ([0.2, 10.2], "B"),
    ];
    let records = points
        .iter()
        .enumerate()
        .map(|(i, (v, label))| EmbeddingRecord {
            occurrence_id: format!("occ-{i}"),
            term: "Planck".into(),
            vector: v.to_vec(),
            corpus_id: "purity8".into(),
            paragraph_id: format!("para-{i}"),
            year: Some(2010 + (i as i32 % 2)),
            label: Some(label.to_string()),
            context_tokens: None,
        })
        .collect();
    Dataset::new(records, "purity8").unwrap()
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    std::fs::create_dir_all(&dir).unwrap();

    let senses = blobs(&BlobSpec {
        labels: [
            ("MISSION", 60),
            ("UNITS", 45),
            ("MPS", 30),
            ("FOKKER", 20),
            ("LAW", 12),
        ]
        .iter()
        .map(|(l, n)| (l.to_string(), *n))
        .collect(),
        dim: 16,
        separation: 8.0,
        sigma: 1.0,
        seed: 2024,
        years: Some(2005..=2012),
        context: true,
    })
    .unwrap();
    save_dataset(&senses, dir.join("senses.jsonl")).unwrap();

    save_dataset(&purity8(), dir.join("purity8.jsonl")).unwrap();

    let stream = sense_stream(&StreamSpec {
        years: 1990..=2000,
        switch_year: 1997,
        per_year: 40,
        share_before: 0.9,
        share_after: 0.25,
        dim: 8,
        separation: 12.0,
        sigma: 1.0,
        seed: 7,
    })
    .unwrap();
    save_dataset(&stream, dir.join("stream.jsonl")).unwrap();
}
