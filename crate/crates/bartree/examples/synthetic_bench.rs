//! A small run of the synthetic detection benchmark: random template
//! corpora per depth class, one structural mutation on half the pages,
//! and per-mode detection rates with median check times.

use bartree::bench::{run_bench, BenchConfig};
use bartree::detect::CompareMode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = BenchConfig {
        depth_classes: vec![5, 10, 15],
        pages_per_class: 6,
        mutation_rate: 0.5,
        modes: vec![CompareMode::Simple, CompareMode::Full, CompareMode::FullWithDelta],
        seed: 42,
        collisions: false,
        timing_reps: 3,
    };
    let report = run_bench(&config)?;
    println!("{}", report.to_table());

    // the same harness can build corpora whose mutations preserve the
    // total area; only the per-depth vectors give them away
    let collisions = BenchConfig { collisions: true, mutation_rate: 1.0, ..config };
    let report = run_bench(&collisions)?;
    println!("area-preserving corpus:");
    println!("{}", report.to_table());
    Ok(())
}
