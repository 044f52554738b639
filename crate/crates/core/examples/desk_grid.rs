//! Runs the desk-scale grid on a synthetic corpus and prints the best cells.
//!
//! `cargo run --release -p adl-core --example desk_grid -- [seed] [per_class]`

use adl_core::experiment::{report, run_grid, GridConfig};
use adl_core::features::{featurize, FeatureSettings};
use adl_core::synth::{generate_corpus, SynthParams};
use adl_core::FeatureVector;

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed must be an integer"));
    let per_class: usize = args.next().map_or(200, |s| s.parse().expect("per_class must be an integer"));

    let started = std::time::Instant::now();
    let captures = generate_corpus(per_class, &SynthParams::default(), seed).expect("default synth params are valid");
    let rows: Vec<FeatureVector> = captures
        .iter()
        .map(|c| featurize(c, &FeatureSettings::default()).expect("synthetic captures featurize"))
        .collect();
    let grid = run_grid(&GridConfig { master_seed: seed, ..GridConfig::default() }, &rows).expect("grid runs");
    let rep = report(&grid);
    print!("{}", rep.file("grid.csv").unwrap_or_default());
    println!();
    print!("{}", rep.file("best.csv").unwrap_or_default());
    eprintln!("{} cells in {:.1?}", grid.cells.len(), started.elapsed());
}
