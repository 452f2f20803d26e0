//! Isolation trees built from arbitrary splitting functions, and the forest
//! that averages their path lengths into an anomaly score.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::points::Points;
use crate::splitting::{compute_range, FamilyKind, SplitFamily, SplitFunction, SplitInstance};
use crate::threshold::{ThresholdKind, ThresholdModel, DEFAULT_ETA};

/// Random stream used for every tree.
pub type TreeRng = ChaCha8Rng;

const EULER_GAMMA: f64 = 0.577_215_664_9;

/// Average path length of an unsuccessful search in a binary search tree of
/// `n` points.
pub fn c_factor(n: usize) -> f64 {
    match n {
        0 | 1 => 0.0,
        2 => 1.0,
        _ => {
            let m = n - 1;
            let harmonic = if n <= 10_000 {
                (1..=m).map(|k| 1.0 / k as f64).sum::<f64>()
            } else {
                (m as f64).ln() + EULER_GAMMA
            };
            2.0 * harmonic - 2.0 * m as f64 / n as f64
        }
    }
}

/// Mixes the master seed with a tree index (splitmix64 finalizer).
pub fn tree_seed(master_seed: u64, tree_index: u64) -> u64 {
    let mut z = master_seed ^ tree_index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxDepth {
    /// `ceil(log2 ψ)` for the effective subsample size `ψ`.
    Auto,
    Limit(usize),
}

impl MaxDepth {
    pub fn resolve(self, subsample_size: usize) -> usize {
        match self {
            MaxDepth::Auto => (subsample_size.max(2) as f64).log2().ceil() as usize,
            MaxDepth::Limit(d) => d,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Requested subsample size `ψ`; clamped to the dataset size at fit time.
    pub subsample_size: usize,
    pub max_depth: MaxDepth,
    pub family: SplitFamily,
    pub threshold: ThresholdKind,
    pub eta: f64,
    pub seed: u64,
    /// Draws of a splitting function before a node with constant values
    /// becomes a leaf.
    pub max_resample_attempts: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            subsample_size: 256,
            max_depth: MaxDepth::Auto,
            family: SplitFamily::new(FamilyKind::Hyperplane),
            threshold: ThresholdKind::Normal,
            eta: DEFAULT_ETA,
            seed: 0,
            max_resample_attempts: 8,
        }
    }
}

impl ForestConfig {
    pub fn with_family(family: SplitFamily) -> Self {
        Self {
            family,
            ..Self::default()
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::config("n_trees must be at least 1"));
        }
        if self.subsample_size < 2 {
            return Err(Error::config("subsample size must be at least 2"));
        }
        if self.max_depth == MaxDepth::Limit(0) {
            return Err(Error::config("max_depth must be positive"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::config(format!("eta must be positive, got {}", self.eta)));
        }
        if self.max_resample_attempts == 0 {
            return Err(Error::config("max_resample_attempts must be at least 1"));
        }
        self.family.validate(dim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Internal {
        split: SplitInstance,
        left: usize,
        right: usize,
        size: usize,
    },
    /// `size` is 0 only for an empty branch cut by a Normal threshold.
    Leaf { size: usize },
}

impl Node {
    pub fn size(&self) -> usize {
        match self {
            Node::Internal { size, .. } | Node::Leaf { size } => *size,
        }
    }
}

/// One isolation tree stored as an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct IsolationTree {
    pub nodes: Vec<Node>,
    /// The training subsample the tree was grown on.
    pub sample: Points,
    pub seed: u64,
}

struct Grower<'a> {
    sample: &'a Points,
    config: &'a ForestConfig,
    max_depth: usize,
    rng: &'a mut TreeRng,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn grow(&mut self, members: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { size: members.len() });
        if members.len() <= 1 || depth >= self.max_depth {
            return id;
        }
        let Some((split, left, right)) = self.split(&members) else {
            return id;
        };
        let size = members.len();
        drop(members);
        let left_id = self.grow(left, depth + 1);
        let right_id = self.grow(right, depth + 1);
        self.nodes[id] = Node::Internal {
            split,
            left: left_id,
            right: right_id,
            size,
        };
        id
    }

    fn split(&mut self, members: &[usize]) -> Option<(SplitInstance, Vec<usize>, Vec<usize>)> {
        let range = compute_range(members.iter().map(|&i| self.sample.row(i))).ok()?;
        let mut values = Vec::with_capacity(members.len());
        for _ in 0..self.config.max_resample_attempts {
            let function = SplitFunction::sample_in(&self.config.family, &range, self.rng);
            values.clear();
            values.extend(members.iter().map(|&i| function.value(self.sample.row(i))));
            if values.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let model = ThresholdModel::fit(&values, self.config.threshold, self.config.eta).ok()?;
            if model.is_degenerate() {
                continue;
            }
            let threshold = model.sample(self.rng);
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for (&i, &v) in members.iter().zip(&values) {
                if v - threshold <= 0.0 {
                    left.push(i);
                } else {
                    right.push(i);
                }
            }
            return Some((SplitInstance { function, threshold }, left, right));
        }
        None
    }
}

impl IsolationTree {
    /// Grows a tree on `sample`. The depth limit resolves against the sample size.
    pub fn build(sample: Points, config: &ForestConfig, seed: u64) -> Result<Self> {
        let mut rng = TreeRng::seed_from_u64(seed);
        Self::build_with_rng(sample, config, seed, &mut rng)
    }

    fn build_with_rng(sample: Points, config: &ForestConfig, seed: u64, rng: &mut TreeRng) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptyNodeSet);
        }
        let mut grower = Grower {
            sample: &sample,
            config,
            max_depth: config.max_depth.resolve(sample.len()),
            rng,
            nodes: Vec::new(),
        };
        grower.grow((0..sample.len()).collect(), 0);
        let nodes = grower.nodes;
        Ok(Self { nodes, sample, seed })
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn dim(&self) -> usize {
        self.sample.dim()
    }

    /// Node ids from the root to the leaf reached by `x`.
    pub fn route(&self, x: &[f64]) -> Vec<usize> {
        let mut path = vec![0];
        let mut id = 0;
        while let Node::Internal { split, left, right, .. } = &self.nodes[id] {
            id = if split.goes_left(x) { *left } else { *right };
            path.push(id);
        }
        path
    }

    /// Internal nodes traversed plus `c(leaf size)`.
    pub fn path_length(&self, x: &[f64]) -> f64 {
        let mut id = 0;
        let mut depth = 0usize;
        loop {
            match &self.nodes[id] {
                Node::Internal { split, left, right, .. } => {
                    id = if split.goes_left(x) { *left } else { *right };
                    depth += 1;
                }
                Node::Leaf { size } => return depth as f64 + c_factor(*size),
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Internal { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. }))
    }

    /// Checks `size(parent) = size(left) + size(right)` everywhere and that the
    /// root holds the whole sample. Returns the offending node id on failure.
    pub fn audit(&self) -> std::result::Result<(), usize> {
        if self.root().size() != self.sample.len() {
            return Err(0);
        }
        for (id, node) in self.nodes.iter().enumerate() {
            if let Node::Internal { left, right, size, .. } = node {
                if self.nodes[*left].size() + self.nodes[*right].size() != *size {
                    return Err(id);
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<IsolationTree>,
    pub config: ForestConfig,
    /// `min(ψ, |X|)`, the `n` in `c(n)`.
    pub subsample_size: usize,
    pub dim: usize,
}

impl Forest {
    pub fn fit(data: &Points, config: &ForestConfig) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::DatasetTooSmall(data.len()));
        }
        config.validate(data.dim())?;
        let psi = config.subsample_size.min(data.len());
        let trees = (0..config.n_trees as u64)
            .into_par_iter()
            .map(|t| {
                let seed = tree_seed(config.seed, t);
                let mut rng = TreeRng::seed_from_u64(seed);
                let picked = index::sample(&mut rng, data.len(), psi).into_vec();
                IsolationTree::build_with_rng(data.select_rows(&picked), config, seed, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            trees,
            config: config.clone(),
            subsample_size: psi,
            dim: data.dim(),
        })
    }

    /// Mean path length over the trees.
    pub fn mean_path_length(&self, x: &[f64]) -> Result<f64> {
        Error::check_dim(self.dim, x.len())?;
        Ok(self.mean_path_unchecked(x))
    }

    fn mean_path_unchecked(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.path_length(x)).sum::<f64>() / self.trees.len() as f64
    }

    /// `2^(-E[h(x)] / c(ψ))`; higher means more anomalous.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        Ok(score_from_path(self.mean_path_length(x)?, self.subsample_size))
    }

    pub fn score_all(&self, points: &Points) -> Result<Vec<f64>> {
        Error::check_dim(self.dim, points.dim())?;
        Ok((0..points.len())
            .into_par_iter()
            .map(|i| score_from_path(self.mean_path_unchecked(points.row(i)), self.subsample_size))
            .collect())
    }
}

/// Converts a mean path length into an anomaly score for subsample size `n`.
pub fn score_from_path(mean_path: f64, n: usize) -> f64 {
    let c = c_factor(n);
    if c == 0.0 {
        return 0.5;
    }
    (-mean_path / c).exp2()
}
