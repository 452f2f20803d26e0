//! Average precision of every family on the two synthetic datasets, trained on
//! inliers only with Normal thresholds, averaged over ten seeds.
//!
//! ```bash
//! cargo run --release -p fubif --example synthetic_benchmark
//! ```

use std::time::Instant;

use fubif::data::{generate_bisect3d, generate_xaxis};
use fubif::metrics::{average_precision, ScoredLabels};
use fubif::{Dataset, FamilyKind, Forest, ForestConfig, Scenario, SplitFamily, ThresholdKind};

const RUNS: u64 = 10;

fn mean_ap(make: fn(u64) -> Dataset, family: &SplitFamily) -> fubif::Result<f64> {
    let mut total = 0.0;
    for run in 0..RUNS {
        let data = make(run);
        let (train, test) = data.scenario_split(Scenario::InliersOnly)?;
        let config = ForestConfig {
            family: family.clone(),
            threshold: ThresholdKind::Normal,
            seed: 1000 + run,
            ..ForestConfig::default()
        };
        let forest = Forest::fit(&train.points, &config)?;
        let scores = forest.score_all(&test.points)?;
        let labels = test.labels.as_deref().expect("synthetic data is labeled");
        total += average_precision(ScoredLabels::new(&scores, labels)?)?;
    }
    Ok(total / RUNS as f64)
}

fn main() -> fubif::Result<()> {
    println!("{:<10} {:>8} {:>8}", "family", "xaxis", "bisect3d");
    let start = Instant::now();
    for kind in FamilyKind::ALL.into_iter().filter(|k| *k != FamilyKind::Sine) {
        let family = SplitFamily::new(kind);
        let x = mean_ap(generate_xaxis, &family)?;
        let b = mean_ap(generate_bisect3d, &family)?;
        println!("{:<10} {:>8.3} {:>8.3}", family.to_string(), x, b);
    }
    println!("elapsed: {:.1?}", start.elapsed());
    Ok(())
}
