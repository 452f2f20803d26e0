//! Feature importance on Bisect3D, whose anomalies lie along the diagonal of
//! the first three coordinates: local importance of the most anomalous point,
//! global importance from the labels, and the feature-selection score of the
//! resulting ranking.
//!
//! ```bash
//! cargo run --release -p fubif --example explain
//! ```

use fubif::data::generate_bisect3d;
use fubif::metrics::{auc_fs, AucFsOptions};
use fubif::{Explainer, Forest, ForestConfig, Partition, Scenario};

fn main() -> fubif::Result<()> {
    let data = generate_bisect3d(3);
    let labels = data.labels.clone().expect("labeled");
    let (train, _) = data.scenario_split(Scenario::InliersOnly)?;
    let config = ForestConfig::default();
    let forest = Forest::fit(&train.points, &config)?;
    let explainer = Explainer::new(&forest);

    let scores = forest.score_all(&data.points)?;
    let top = (0..scores.len()).max_by(|&a, &b| scores[a].total_cmp(&scores[b])).unwrap();
    let local = explainer.local_importance(data.points.row(top))?;
    println!("most anomalous row {top} (score {:.3})", scores[top]);
    println!("  local importance {:.3?}", local.values());

    let global = explainer.global_importance(&data.points, Partition::Labels(&labels))?;
    println!("global importance (outlier / inlier mean)");
    for (rank, j) in global.gfi.ranking().into_iter().enumerate() {
        println!("  {}. {} {:.3}", rank + 1, data.feature_names[j], global.gfi[j]);
    }

    let options = AucFsOptions {
        forest: config,
        scenario: Scenario::InliersOnly,
        runs: 3,
    };
    let fs = auc_fs(&data, &global.gfi, &options)?;
    println!("AUC_FS {:.3}", fs.value);
    println!("  keep most important  {:.3?}", fs.direct);
    println!("  keep least important {:.3?}", fs.inverse);
    Ok(())
}
