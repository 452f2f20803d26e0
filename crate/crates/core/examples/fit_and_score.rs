//! Fit an extended isolation forest on the Xaxis dataset, score it, report the
//! ranking metrics and round-trip the model through a file.
//!
//! ```bash
//! cargo run --release -p fubif --example fit_and_score
//! ```

use fubif::data::generate_xaxis;
use fubif::metrics::{average_precision, precision_at_contamination, roc_auc};
use fubif::{persist, FamilyKind, Forest, ForestConfig, Scenario, ScoredLabels, SplitFamily};

fn main() -> fubif::Result<()> {
    let data = generate_xaxis(7);
    let (train, test) = data.scenario_split(Scenario::InliersOnly)?;

    let config = ForestConfig::with_family(SplitFamily::new(FamilyKind::Hyperplane));
    let forest = Forest::fit(&train.points, &config)?;
    let scores = forest.score_all(&test.points)?;

    let labels = test.labels.as_deref().expect("labeled");
    let sl = ScoredLabels::new(&scores, labels)?;
    let p = data.contamination().unwrap_or(0.1);
    println!("average precision   {:.4}", average_precision(sl)?);
    println!("roc auc             {:.4}", roc_auc(sl)?);
    println!("precision at {p:.3} {:.4}", precision_at_contamination(sl, p)?);

    let path = std::env::temp_dir().join("fubif_example.model");
    persist::save(&forest, &path)?;
    let reloaded = persist::load(&path)?;
    assert_eq!(reloaded.score_all(&test.points)?, scores);
    println!("model saved to {} and reloaded with identical scores", path.display());
    Ok(())
}
