//! The quadric family is not translation invariant: with a small linear term
//! the quadratic part dominates and its shape depends on where the origin
//! sits. Shifting the data by (-10, 0) changes a Quad(1) score map far more
//! than a Quad(100) one.
//!
//! ```bash
//! cargo run --release -p fubif --example translation_bias
//! ```

use fubif::data::generate_gaussian;
use fubif::scoremap::mean_translation_bias;
use fubif::{ForestConfig, SplitFamily, ThresholdKind};

fn main() -> fubif::Result<()> {
    let data = generate_gaussian(500, 2, 9);
    for threshold in [ThresholdKind::Uniform, ThresholdKind::Normal] {
        println!("{threshold} threshold");
        for lambda in [1.0, 10.0, 100.0] {
            let config = ForestConfig {
                family: SplitFamily::quadric(lambda),
                threshold,
                ..ForestConfig::default()
            };
            let bias = mean_translation_bias(&data, [-10.0, 0.0], &config, 50, 10)?;
            println!("  quad({lambda:>5}) mean |score change| {bias:.4}");
        }
    }
    Ok(())
}
