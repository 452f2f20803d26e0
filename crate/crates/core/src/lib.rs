//! Isolation forests over arbitrary splitting functions.

// `!(a > b)` is used on purpose so that NaN counts as degenerate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod atomic;
pub mod benchmark;
pub mod cli;
pub mod config;
pub mod scoremap;
pub mod data;
pub mod error;
pub mod forest;
pub mod importance;
pub mod metrics;
pub mod persist;
pub mod points;
pub mod splitting;
pub mod threshold;

pub use data::{Dataset, Scenario};
pub use error::{Error, Result};
pub use forest::{c_factor, Forest, ForestConfig, IsolationTree, MaxDepth, Node};
pub use importance::{Explainer, GlobalImportance, ImportanceVector, Partition};
pub use metrics::ScoredLabels;
pub use points::Points;
pub use splitting::{FamilyKind, HyperRectangle, SplitFamily, SplitFunction, SplitInstance};
pub use threshold::{ThresholdKind, ThresholdModel};
