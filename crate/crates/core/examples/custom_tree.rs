//! Working below the forest: sample individual splitting functions, inspect
//! their gradients and per-node feature influence, and grow a single tree.
//!
//! ```bash
//! cargo run --release -p fubif --example custom_tree
//! ```

use fubif::data::generate_gaussian;
use fubif::importance::node_feature_influence;
use fubif::splitting::compute_range;
use fubif::{FamilyKind, ForestConfig, IsolationTree, Node, SplitFamily, SplitFunction, SplitInstance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fubif::Result<()> {
    let data = generate_gaussian(128, 3, 5);
    let range = compute_range(data.points.rows())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = data.points.row(0);

    for kind in FamilyKind::ALL.into_iter().filter(|k| *k != FamilyKind::Sine) {
        let function = SplitFunction::sample_in(&SplitFamily::new(kind), &range, &mut rng);
        let split = SplitInstance {
            threshold: function.evaluate(x)?,
            function,
        };
        let influence = node_feature_influence(&split, x)?;
        println!(
            "{:<8} f(x) {:>9.3}  grad {:>28}  influence {:.3?}",
            kind.name(),
            split.threshold,
            format!("{:.2?}", split.function.gradient(x)?),
            influence.values()
        );
    }

    let config = ForestConfig::with_family(SplitFamily::new(FamilyKind::Ellipse));
    let tree = IsolationTree::build(data.points.clone(), &config, 42)?;
    let internal = tree.nodes.iter().filter(|n| matches!(n, Node::Internal { .. })).count();
    println!(
        "ellipse tree: {} nodes, {internal} splits, depth {}, path length of row 0 = {:.2}",
        tree.nodes.len(),
        tree.depth(),
        tree.path_length(x)
    );
    Ok(())
}
