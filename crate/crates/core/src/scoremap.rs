//! Anomaly scores over a regular grid of a 2-d plane.

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::forest::{Forest, ForestConfig};
use crate::points::Points;
use crate::splitting::compute_range;

/// `[x_min, x_max, y_min, y_max]`.
pub type Bounds = [f64; 4];

/// Bounding box of 2-d points, widened by 10% of its extent on every side.
pub fn padded_bounds(points: &Points) -> Result<Bounds> {
    if points.dim() != 2 {
        return Err(Error::ScoremapDimension(points.dim()));
    }
    let r = compute_range(points.rows())?;
    let pad_x = 0.1 * (r.upper[0] - r.lower[0]);
    let pad_y = 0.1 * (r.upper[1] - r.lower[1]);
    Ok([r.lower[0] - pad_x, r.upper[0] + pad_x, r.lower[1] - pad_y, r.upper[1] + pad_y])
}

/// Grid coordinates, `y` in the outer loop. `m = 1` yields the box center.
pub fn grid_points(bounds: Bounds, m: usize) -> Result<Points> {
    if m == 0 {
        return Err(Error::config("grid size must be at least 1"));
    }
    let [x0, x1, y0, y1] = bounds;
    let axis = |lo: f64, hi: f64, i: usize| {
        if m == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (m - 1) as f64
        }
    };
    let mut data = Vec::with_capacity(2 * m * m);
    for j in 0..m {
        for i in 0..m {
            data.push(axis(x0, x1, i));
            data.push(axis(y0, y1, j));
        }
    }
    Points::new(data, 2)
}

/// Rows of `(x, y, score)` over an `m × m` grid.
pub fn score_grid(forest: &Forest, bounds: Bounds, m: usize) -> Result<Vec<[f64; 3]>> {
    if forest.dim != 2 {
        return Err(Error::ScoremapDimension(forest.dim));
    }
    let grid = grid_points(bounds, m)?;
    let scores = forest.score_all(&grid)?;
    Ok(grid
        .rows()
        .zip(scores)
        .map(|(p, s)| [p[0], p[1], s])
        .collect())
}

pub fn to_csv(rows: &[[f64; 3]]) -> String {
    let mut out = String::from("x,y,score\n");
    for [x, y, s] in rows {
        out.push_str(&format!("{x},{y},{s}\n"));
    }
    out
}

/// Mean absolute difference between two equally sized score grids.
pub fn grid_difference(a: &[[f64; 3]], b: &[[f64; 3]]) -> Result<f64> {
    Error::check_dim(a.len(), b.len())?;
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(a.iter().zip(b).map(|(p, q)| (p[2] - q[2]).abs()).sum::<f64>() / a.len() as f64)
}

/// How much a model's score map changes when the data are shifted by
/// `offset`: fits on the original and on the shifted data, scores each on
/// the correspondingly shifted grid, and returns the mean absolute gap.
/// A translation-invariant family gives a value near the seed-to-seed noise.
pub fn translation_bias(data: &Dataset, offset: [f64; 2], config: &ForestConfig, m: usize) -> Result<f64> {
    let bounds = padded_bounds(&data.points)?;
    let shifted = data.translate(&offset)?;
    let shifted_bounds = [
        bounds[0] + offset[0],
        bounds[1] + offset[0],
        bounds[2] + offset[1],
        bounds[3] + offset[1],
    ];
    let (a, b) = rayon::join(
        || -> Result<_> { score_grid(&Forest::fit(&data.points, config)?, bounds, m) },
        || -> Result<_> { score_grid(&Forest::fit(&shifted.points, config)?, shifted_bounds, m) },
    );
    grid_difference(&a?, &b?)
}

/// Mean of [`translation_bias`] over `runs` seeds derived from `config.seed`.
pub fn mean_translation_bias(
    data: &Dataset,
    offset: [f64; 2],
    config: &ForestConfig,
    m: usize,
    runs: usize,
) -> Result<f64> {
    let total: f64 = (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let cfg = ForestConfig {
                seed: crate::forest::tree_seed(config.seed, r),
                ..config.clone()
            };
            translation_bias(data, offset, &cfg, m)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(total / runs.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_gaussian;

    #[test]
    fn grid_layout() {
        let g = grid_points([0.0, 2.0, 10.0, 11.0], 3).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.row(0), &[0.0, 10.0]);
        assert_eq!(g.row(1), &[1.0, 10.0]);
        assert_eq!(g.row(8), &[2.0, 11.0]);
        assert_eq!(grid_points([0.0, 2.0, 0.0, 4.0], 1).unwrap().row(0), &[1.0, 2.0]);
        assert!(grid_points([0.0; 4], 0).is_err());
    }

    #[test]
    fn padding_is_ten_percent() {
        let p = Points::from_rows(&[[0.0, 0.0], [10.0, 20.0]]).unwrap();
        assert_eq!(padded_bounds(&p).unwrap(), [-1.0, 11.0, -2.0, 22.0]);
        let p3 = Points::from_rows(&[[0.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(padded_bounds(&p3), Err(Error::ScoremapDimension(3))));
    }

    #[test]
    fn scores_on_grid_are_probabilities() {
        let data = generate_gaussian(200, 2, 1);
        let forest = Forest::fit(&data.points, &ForestConfig::default()).unwrap();
        // far outside the data hull as well
        let rows = score_grid(&forest, [-50.0, 50.0, -50.0, 50.0], 5).unwrap();
        assert_eq!(rows.len(), 25);
        assert!(rows.iter().all(|r| r[2] > 0.0 && r[2] < 1.0));
        let csv = to_csv(&rows);
        assert_eq!(csv.lines().count(), 26);
        assert!(csv.starts_with("x,y,score\n"));
    }

    #[test]
    fn difference_of_identical_grids_is_zero() {
        let a = vec![[0.0, 0.0, 0.3], [1.0, 0.0, 0.6]];
        assert_eq!(grid_difference(&a, &a).unwrap(), 0.0);
        let b = vec![[0.0, 0.0, 0.4], [1.0, 0.0, 0.4]];
        assert!((grid_difference(&a, &b).unwrap() - 0.15).abs() < 1e-15);
    }
}
