//! Gradient-based feature importance for function-based isolation forests.
//!
//! At a node with splitting function `f`, the influence of feature `j` at a
//! point `y` is `∂_j f(y)² / ‖∇f(y)‖²`. Along the path of `x` these per-node
//! vectors are averaged over the training points of the child `x` enters,
//! weighted by `|Y_k| / (|Y_{k+1}| + 1)`, averaged over the path and then over
//! the trees. The global importance is the ratio of the mean local importance
//! of outliers to that of inliers.

use std::ops::Index;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forest::{Forest, IsolationTree, Node};
use crate::metrics::top_fraction;
use crate::points::Points;
use crate::splitting::SplitInstance;

/// Denominator guard for features no split ever used.
pub const GFI_EPS: f64 = 1e-12;

/// Squared gradient norms below this fall back to the uniform vector.
const FLAT_GRADIENT: f64 = 1e-18;

/// A per-feature importance vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceVector(pub Vec<f64>);

impl ImportanceVector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Feature indices ordered from most to least important. Ties keep index order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.0.len()).collect();
        idx.sort_by(|&a, &b| self.0[b].total_cmp(&self.0[a]));
        idx
    }

    pub fn argmax(&self) -> usize {
        self.ranking()[0]
    }

    fn add_scaled(&mut self, other: &[f64], scale: f64) {
        for (a, b) in self.0.iter_mut().zip(other) {
            *a += scale * b;
        }
    }

    fn scale(&mut self, factor: f64) {
        self.0.iter_mut().for_each(|v| *v *= factor);
    }
}

impl Index<usize> for ImportanceVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Share of each feature in the squared gradient of the split at `y`.
pub fn node_feature_influence(split: &SplitInstance, y: &[f64]) -> Result<ImportanceVector> {
    let grad = split.function.gradient(y)?;
    Ok(influence_from_gradient(&grad))
}

pub(crate) fn influence_from_gradient(grad: &[f64]) -> ImportanceVector {
    let squares: Vec<f64> = grad.iter().map(|g| g * g).collect();
    let total: f64 = squares.iter().sum();
    if !(total >= FLAT_GRADIENT) || !total.is_finite() {
        let d = grad.len();
        return ImportanceVector(vec![1.0 / d as f64; d]);
    }
    ImportanceVector(squares.into_iter().map(|s| s / total).collect())
}

/// Mean influence of `split` over the points of the next node.
pub fn node_importance<'a, I>(split: &SplitInstance, next_points: I) -> Result<ImportanceVector>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut acc: Option<ImportanceVector> = None;
    let mut count = 0usize;
    for y in next_points {
        let v = node_feature_influence(split, y)?;
        match acc.as_mut() {
            Some(a) => a.add_scaled(&v.0, 1.0),
            None => acc = Some(v),
        }
        count += 1;
    }
    let mut acc = acc.ok_or(Error::ExplanationPointNotRouted)?;
    acc.scale(1.0 / count as f64);
    Ok(acc)
}

/// `|Y_k| / (|Y_{k+1}| + 1)`.
pub fn path_weight(parent_size: usize, child_size: usize) -> f64 {
    parent_size as f64 / (child_size as f64 + 1.0)
}

/// Mean node influences for one tree, computed by re-routing its training sample.
#[derive(Debug, Clone)]
pub struct TreeInfluence {
    /// Indexed by child node id: the parent's influence averaged over the
    /// training points that reached the child. `None` for the root and for
    /// empty children.
    child_mean: Vec<Option<Vec<f64>>>,
}

impl TreeInfluence {
    pub fn new(tree: &IsolationTree) -> Self {
        let n = tree.nodes.len();
        let d = tree.dim();
        let mut sums = vec![vec![0.0; d]; n];
        let mut counts = vec![0usize; n];
        for y in tree.sample.rows() {
            let mut id = 0;
            while let Node::Internal { split, left, right, .. } = &tree.nodes[id] {
                let child = if split.goes_left(y) { *left } else { *right };
                let inf = influence_from_gradient(&split.function.grad(y));
                for (s, v) in sums[child].iter_mut().zip(&inf.0) {
                    *s += v;
                }
                counts[child] += 1;
                id = child;
            }
        }
        let child_mean = sums
            .into_iter()
            .zip(counts)
            .map(|(s, c)| (c > 0).then(|| s.into_iter().map(|v| v / c as f64).collect()))
            .collect();
        Self { child_mean }
    }
}

/// Importance of `x` with respect to one tree. A root leaf gives the zero vector.
pub fn tree_importance(tree: &IsolationTree, influence: &TreeInfluence, x: &[f64]) -> Result<ImportanceVector> {
    Error::check_dim(tree.dim(), x.len())?;
    let mut acc = ImportanceVector::zeros(x.len());
    let mut steps = 0usize;
    let mut id = 0;
    while let Node::Internal {
        split,
        left,
        right,
        size,
    } = &tree.nodes[id]
    {
        let child = if split.goes_left(x) { *left } else { *right };
        let weight = path_weight(*size, tree.nodes[child].size());
        match &influence.child_mean[child] {
            Some(mean) => acc.add_scaled(mean, weight),
            // empty branch: the explained point is the only member
            None => acc.add_scaled(&influence_from_gradient(&split.function.grad(x)).0, weight),
        }
        steps += 1;
        id = child;
    }
    if steps > 0 {
        acc.scale(1.0 / steps as f64);
    }
    Ok(acc)
}

/// How to split a dataset into inliers and outliers for global importance.
#[derive(Debug, Clone, Copy)]
pub enum Partition<'a> {
    /// `true` marks an outlier.
    Labels(&'a [bool]),
    /// The top `p` fraction of anomaly scores (`ceil(p·n)` points) are outliers.
    Contamination(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalImportance {
    pub inlier_mean: ImportanceVector,
    pub outlier_mean: ImportanceVector,
    /// Component-wise `outlier_mean / (inlier_mean + ε)`.
    pub gfi: ImportanceVector,
    pub n_inliers: usize,
    pub n_outliers: usize,
}

/// Cached per-tree influence tables for a fitted forest.
pub struct Explainer<'a> {
    forest: &'a Forest,
    tables: Vec<TreeInfluence>,
}

impl<'a> Explainer<'a> {
    pub fn new(forest: &'a Forest) -> Self {
        let tables = forest.trees.par_iter().map(TreeInfluence::new).collect();
        Self { forest, tables }
    }

    pub fn forest(&self) -> &Forest {
        self.forest
    }

    pub fn tree_importance(&self, tree_index: usize, x: &[f64]) -> Result<ImportanceVector> {
        tree_importance(&self.forest.trees[tree_index], &self.tables[tree_index], x)
    }

    /// Mean of the per-tree importances of `x`.
    pub fn local_importance(&self, x: &[f64]) -> Result<ImportanceVector> {
        Error::check_dim(self.forest.dim, x.len())?;
        let mut acc = ImportanceVector::zeros(x.len());
        for (tree, table) in self.forest.trees.iter().zip(&self.tables) {
            acc.add_scaled(&tree_importance(tree, table, x)?.0, 1.0);
        }
        acc.scale(1.0 / self.forest.trees.len() as f64);
        Ok(acc)
    }

    pub fn local_importance_all(&self, points: &Points) -> Result<Vec<ImportanceVector>> {
        Error::check_dim(self.forest.dim, points.dim())?;
        (0..points.len())
            .into_par_iter()
            .map(|i| self.local_importance(points.row(i)))
            .collect()
    }

    pub fn global_importance(&self, data: &Points, partition: Partition<'_>) -> Result<GlobalImportance> {
        let outlier: Vec<bool> = match partition {
            Partition::Labels(labels) => {
                Error::check_dim(data.len(), labels.len())?;
                labels.to_vec()
            }
            Partition::Contamination(p) => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::config(format!("contamination must lie in (0, 1), got {p}")));
                }
                let scores = self.forest.score_all(data)?;
                let mut flags = vec![false; data.len()];
                for i in top_fraction(&scores, p) {
                    flags[i] = true;
                }
                flags
            }
        };
        let n_outliers = outlier.iter().filter(|&&o| o).count();
        let n_inliers = outlier.len() - n_outliers;
        if n_outliers == 0 || n_inliers == 0 {
            return Err(Error::DegeneratePartition {
                inliers: n_inliers,
                outliers: n_outliers,
            });
        }
        let local = self.local_importance_all(data)?;
        let d = data.dim();
        let mut inlier_mean = ImportanceVector::zeros(d);
        let mut outlier_mean = ImportanceVector::zeros(d);
        for (v, &o) in local.iter().zip(&outlier) {
            if o {
                outlier_mean.add_scaled(&v.0, 1.0);
            } else {
                inlier_mean.add_scaled(&v.0, 1.0);
            }
        }
        inlier_mean.scale(1.0 / n_inliers as f64);
        outlier_mean.scale(1.0 / n_outliers as f64);
        let gfi = gfi_ratio(&outlier_mean, &inlier_mean);
        Ok(GlobalImportance {
            inlier_mean,
            outlier_mean,
            gfi,
            n_inliers,
            n_outliers,
        })
    }
}

/// `outlier[j] / (inlier[j] + ε)`.
pub fn gfi_ratio(outlier: &ImportanceVector, inlier: &ImportanceVector) -> ImportanceVector {
    ImportanceVector(
        outlier
            .0
            .iter()
            .zip(&inlier.0)
            .map(|(o, i)| o / (i + GFI_EPS))
            .collect(),
    )
}

/// Local importance of every point, one forest pass.
pub fn local_importance(forest: &Forest, x: &[f64]) -> Result<ImportanceVector> {
    Explainer::new(forest).local_importance(x)
}

pub fn global_importance(forest: &Forest, data: &Points, partition: Partition<'_>) -> Result<GlobalImportance> {
    Explainer::new(forest).global_importance(data, partition)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splitting::SplitFunction;

    fn split(function: SplitFunction, threshold: f64) -> SplitInstance {
        SplitInstance { function, threshold }
    }

    #[test]
    fn axis_influence_is_one_hot() {
        let s = split(SplitFunction::Axis { feature: 2, dim: 6 }, 0.0);
        let v = node_feature_influence(&s, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(v.0, vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn hyperplane_and_sphere_influence() {
        let h = 1.0 / 2.0_f64.sqrt();
        let s = split(SplitFunction::Hyperplane { normal: vec![h, h] }, 0.0);
        let v = node_feature_influence(&s, &[7.0, -1.0]).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15 && (v[1] - 0.5).abs() < 1e-15);

        let s = split(SplitFunction::Sphere { center: vec![0.0, 0.0] }, 1.0);
        let v = node_feature_influence(&s, &[3.0, 4.0]).unwrap();
        assert!((v[0] - 0.36).abs() < 1e-15 && (v[1] - 0.64).abs() < 1e-15);

        let v = node_importance(&s, [&[3.0, 4.0][..], &[4.0, 3.0][..]]).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15 && (v[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn flat_gradient_falls_back_to_uniform() {
        let s = split(SplitFunction::Sphere { center: vec![1.0, 1.0, 1.0] }, 1.0);
        let v = node_feature_influence(&s, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(v.0, vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn node_importance_needs_points() {
        let s = split(SplitFunction::Axis { feature: 0, dim: 2 }, 0.0);
        let empty: Vec<&[f64]> = Vec::new();
        assert!(matches!(node_importance(&s, empty), Err(Error::ExplanationPointNotRouted)));
        let one = node_importance(&s, [&[5.0, 1.0][..]]).unwrap();
        assert_eq!(one.0, vec![1.0, 0.0]);
    }

    #[test]
    fn path_weights() {
        assert_eq!(path_weight(10, 1), 5.0);
        assert_eq!(path_weight(10, 9), 1.0);
        assert_eq!(path_weight(2, 0), 2.0);
    }

    #[test]
    fn ranking_orders_descending() {
        let v = ImportanceVector(vec![0.1, 0.7, 0.2]);
        assert_eq!(v.ranking(), vec![1, 2, 0]);
        assert_eq!(v.argmax(), 1);
    }

    #[test]
    fn gfi_of_equal_means_is_ones() {
        let a = ImportanceVector(vec![0.2, 0.3, 0.5]);
        let g = gfi_ratio(&a, &a);
        assert!(g.0.iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn gfi_swaps_invert() {
        let o = ImportanceVector(vec![0.6, 0.3, 0.1]);
        let i = ImportanceVector(vec![0.2, 0.3, 0.5]);
        let g = gfi_ratio(&o, &i);
        let h = gfi_ratio(&i, &o);
        for (a, b) in g.0.iter().zip(&h.0) {
            assert!((a * b - 1.0).abs() < 1e-10);
        }
    }
}
