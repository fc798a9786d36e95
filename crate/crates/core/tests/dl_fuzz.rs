mod common;

use std::time::Instant;

use common::fuzz::{run_sequence, SEQUENCES};

#[test]
fn incremental_store_matches_bellman_ford() {
    let start = Instant::now();
    let failures: Vec<String> = (0..SEQUENCES)
        .filter_map(|s| run_sequence(s).err())
        .collect();
    assert!(
        failures.is_empty(),
        "{} failures, first: {}",
        failures.len(),
        failures[0]
    );
    eprintln!("{SEQUENCES} sequences in {:?}", start.elapsed());
}
