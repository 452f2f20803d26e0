//! Ranking metrics for anomaly scores and the feature-selection score used to
//! evaluate importance rankings.

use rayon::prelude::*;

use crate::data::{Dataset, Scenario};
use crate::error::{Error, Result};
use crate::forest::{tree_seed, Forest, ForestConfig};
use crate::importance::ImportanceVector;

/// Anomaly scores paired with ground truth (`true` = anomaly).
#[derive(Debug, Clone, Copy)]
pub struct ScoredLabels<'a> {
    pub scores: &'a [f64],
    pub labels: &'a [bool],
}

impl<'a> ScoredLabels<'a> {
    pub fn new(scores: &'a [f64], labels: &'a [bool]) -> Result<Self> {
        Error::check_dim(scores.len(), labels.len())?;
        Ok(Self { scores, labels })
    }

    fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    /// Indices sorted by descending score; equal scores keep input order.
    fn descending(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.scores.len()).collect();
        idx.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]));
        idx
    }
}

/// Step-wise average precision, `Σ (R_k - R_{k-1}) P_k`, one step per group
/// of tied scores.
pub fn average_precision(sl: ScoredLabels<'_>) -> Result<f64> {
    let total_pos = sl.positives();
    if total_pos == 0 {
        return Err(Error::NoPositives);
    }
    let order = sl.descending();
    let mut ap = 0.0;
    let mut tp = 0usize;
    let mut seen = 0usize;
    let mut start = 0;
    while start < order.len() {
        let score = sl.scores[order[start]];
        let mut end = start;
        let mut group_tp = 0;
        while end < order.len() && sl.scores[order[end]] == score {
            group_tp += usize::from(sl.labels[order[end]]);
            end += 1;
        }
        tp += group_tp;
        seen += end - start;
        if group_tp > 0 {
            let recall_step = group_tp as f64 / total_pos as f64;
            ap += recall_step * (tp as f64 / seen as f64);
        }
        start = end;
    }
    Ok(ap)
}

/// `P(score⁺ > score⁻) + ½ P(score⁺ = score⁻)` from exact pair counts.
pub fn roc_auc(sl: ScoredLabels<'_>) -> Result<f64> {
    let pos = sl.positives() as u128;
    let neg = sl.labels.len() as u128 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut idx: Vec<usize> = (0..sl.scores.len()).collect();
    idx.sort_by(|&a, &b| sl.scores[a].total_cmp(&sl.scores[b]));
    // twice the Mann-Whitney U, kept integral
    let mut twice_u: u128 = 0;
    let mut neg_below: u128 = 0;
    let mut start = 0;
    while start < idx.len() {
        let score = sl.scores[idx[start]];
        let mut end = start;
        let (mut p, mut n) = (0u128, 0u128);
        while end < idx.len() && sl.scores[idx[end]] == score {
            if sl.labels[idx[end]] {
                p += 1;
            } else {
                n += 1;
            }
            end += 1;
        }
        twice_u += p * (2 * neg_below + n);
        neg_below += n;
        start = end;
    }
    Ok(twice_u as f64 / (2 * pos * neg) as f64)
}

/// Indices of the `ceil(p·n)` highest scores; ties broken by input order.
pub fn top_fraction(scores: &[f64], p: f64) -> Vec<usize> {
    let n = scores.len();
    // tolerate representation error such as 0.1 * 1100 = 110.00000000000001
    let k = ((p * n as f64) - 1e-9).ceil().clamp(0.0, n as f64) as usize;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    idx.truncate(k);
    idx
}

/// Precision among the top `ceil(p·n)` scores.
pub fn precision_at_contamination(sl: ScoredLabels<'_>, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::config(format!("contamination must lie in (0, 1), got {p}")));
    }
    let top = top_fraction(sl.scores, p);
    if top.is_empty() {
        return Ok(0.0);
    }
    let hits = top.iter().filter(|&&i| sl.labels[i]).count();
    Ok(hits as f64 / top.len() as f64)
}

/// Options for [`auc_fs`].
#[derive(Debug, Clone)]
pub struct AucFsOptions {
    pub forest: ForestConfig,
    pub scenario: Scenario,
    /// Refits averaged per point of each curve.
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AucFsResult {
    /// `direct[k-1]`: average precision keeping the `k` most important features.
    pub direct: Vec<f64>,
    /// `inverse[k-1]`: average precision keeping the `k` least important features.
    pub inverse: Vec<f64>,
    /// Trapezoidal area of `direct - inverse` over `k = 1..d`.
    pub value: f64,
}

/// Trapezoidal area between two curves sampled at unit spacing.
pub fn area_between(direct: &[f64], inverse: &[f64]) -> f64 {
    let diff: Vec<f64> = direct.iter().zip(inverse).map(|(a, b)| a - b).collect();
    diff.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum()
}

/// Feature-selection score of an importance ranking: refit on the `k` most
/// versus `k` least important features for every `k` and integrate the gap in
/// average precision.
pub fn auc_fs(data: &Dataset, importance: &ImportanceVector, options: &AucFsOptions) -> Result<AucFsResult> {
    let d = data.dim();
    if d < 2 {
        return Err(Error::NothingToSelect(d));
    }
    Error::check_dim(d, importance.len())?;
    let labels = data.labels.as_deref().ok_or(Error::LabelsRequired)?;
    if options.runs == 0 {
        return Err(Error::config("runs must be at least 1"));
    }
    let ranking = importance.ranking();
    let (train, _) = data.scenario_split(options.scenario)?;

    let evaluate = |features: &[usize]| -> Result<f64> {
        let train_x = train.points.select_columns(features)?;
        let test_x = data.points.select_columns(features)?;
        let mut total = 0.0;
        for run in 0..options.runs {
            let config = ForestConfig {
                seed: tree_seed(options.forest.seed, run as u64),
                ..options.forest.clone()
            };
            let forest = Forest::fit(&train_x, &config)?;
            let scores = forest.score_all(&test_x)?;
            total += average_precision(ScoredLabels::new(&scores, labels)?)?;
        }
        Ok(total / options.runs as f64)
    };

    let curves: Vec<(f64, f64)> = (1..=d)
        .into_par_iter()
        .map(|k| {
            let top = &ranking[..k];
            let bottom = &ranking[d - k..];
            Ok((evaluate(top)?, evaluate(bottom)?))
        })
        .collect::<Result<_>>()?;
    let (direct, inverse): (Vec<f64>, Vec<f64>) = curves.into_iter().unzip();
    let value = area_between(&direct, &inverse);
    Ok(AucFsResult {
        direct,
        inverse,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sl<'a>(s: &'a [f64], l: &'a [bool]) -> ScoredLabels<'a> {
        ScoredLabels::new(s, l).unwrap()
    }

    #[test]
    fn ap_examples() {
        assert_eq!(average_precision(sl(&[0.9, 0.1], &[true, false])).unwrap(), 1.0);
        assert_eq!(average_precision(sl(&[0.1, 0.9], &[true, false])).unwrap(), 0.5);
        assert_eq!(
            average_precision(sl(&[0.3; 4], &[true, false, true, false])).unwrap(),
            0.5
        );
        assert!(matches!(
            average_precision(sl(&[0.1, 0.2], &[false, false])),
            Err(Error::NoPositives)
        ));
    }

    #[test]
    fn auc_examples() {
        let labels = [true, true, false, false];
        assert_eq!(roc_auc(sl(&[0.9, 0.8, 0.2, 0.1], &labels)).unwrap(), 1.0);
        assert_eq!(roc_auc(sl(&[0.1, 0.2, 0.8, 0.9], &labels)).unwrap(), 0.0);
        assert_eq!(roc_auc(sl(&[0.5; 4], &labels)).unwrap(), 0.5);
        assert!(matches!(roc_auc(sl(&[0.1, 0.2], &[true, true])), Err(Error::SingleClass)));
    }

    #[test]
    fn length_mismatch() {
        assert!(ScoredLabels::new(&[0.1, 0.2], &[true]).is_err());
    }

    #[test]
    fn precision_at_p() {
        let scores = [0.9, 0.8, 0.1, 0.2, 0.3];
        let labels = [true, true, false, false, false];
        assert_eq!(precision_at_contamination(sl(&scores, &labels), 0.4).unwrap(), 1.0);
        let rev = [false, false, true, true, true];
        assert_eq!(precision_at_contamination(sl(&scores, &rev), 0.4).unwrap(), 0.0);
        assert_eq!(top_fraction(&[0.0; 10], 0.25), vec![0, 1, 2]);
        assert_eq!(top_fraction(&vec![0.0; 1100], 0.1).len(), 110);
        assert!(precision_at_contamination(sl(&scores, &labels), 1.0).is_err());
    }

    #[test]
    fn area_examples() {
        assert_eq!(area_between(&[0.5, 0.7, 0.9], &[0.5, 0.7, 0.9]), 0.0);
        let c = 0.0909;
        let d = 6;
        let area = area_between(&vec![1.0; d], &vec![c; d]);
        assert!((area - (1.0 - c) * (d as f64 - 1.0)).abs() < 1e-12);
    }
}
