//! Score maps of every family on a 2-d dataset (a noisy ring plus a blob),
//! written as `x,y,score` CSV files ready for plotting.
//!
//! ```bash
//! cargo run --release -p fubif --example scoremap -- /tmp/maps
//! ```

use std::path::PathBuf;

use fubif::scoremap::{padded_bounds, score_grid, to_csv};
use fubif::{FamilyKind, Forest, ForestConfig, Points, SplitFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> fubif::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("fubif_maps"));
    std::fs::create_dir_all(&out)?;

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut points = Points::with_dim(2);
    for _ in 0..400 {
        let t = rng.random_range(0.0..std::f64::consts::TAU);
        let r = 3.0 + rng.random_range(-0.2..0.2);
        points.push(&[r * t.cos(), r * t.sin()])?;
    }
    for _ in 0..100 {
        points.push(&[rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)])?;
    }

    let bounds = padded_bounds(&points)?;
    for kind in FamilyKind::ALL {
        let forest = Forest::fit(&points, &ForestConfig::with_family(SplitFamily::new(kind)))?;
        let grid = score_grid(&forest, bounds, 100)?;
        let path = out.join(format!("{kind}.csv"));
        std::fs::write(&path, to_csv(&grid))?;
        let center_gap = forest.score(&[1.7, 0.0])?;
        let on_ring = forest.score(&[3.0, 0.0])?;
        println!("{:<8} gap {center_gap:.3} ring {on_ring:.3} -> {}", kind.name(), path.display());
    }
    Ok(())
}
