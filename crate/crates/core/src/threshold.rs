//! Threshold distributions fitted to the values `{f(y) | y ∈ Y}` of a node.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const DEFAULT_ETA: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThresholdKind {
    /// Uniform over `[min f, max f]`; cuts stay inside the data.
    Uniform,
    /// Normal with the sample mean and `η` times the population std; cuts
    /// may fall outside the data and leave an empty branch.
    Normal,
}

impl ThresholdKind {
    pub fn name(self) -> &'static str {
        match self {
            ThresholdKind::Uniform => "uniform",
            ThresholdKind::Normal => "normal",
        }
    }
}

impl fmt::Display for ThresholdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ThresholdKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "unif" => Ok(ThresholdKind::Uniform),
            "normal" | "norm" => Ok(ThresholdKind::Normal),
            other => Err(Error::config(format!("unknown threshold kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdModel {
    Uniform { lo: f64, hi: f64 },
    /// `sigma` already includes the `η` scaling.
    Normal { mean: f64, sigma: f64, eta: f64 },
}

impl ThresholdModel {
    pub fn fit(values: &[f64], kind: ThresholdKind, eta: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::NoSampleValues);
        }
        Ok(match kind {
            ThresholdKind::Uniform => {
                let (lo, hi) = values
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                ThresholdModel::Uniform { lo, hi }
            }
            ThresholdKind::Normal => {
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                ThresholdModel::Normal {
                    mean,
                    sigma: eta * var.sqrt(),
                    eta,
                }
            }
        })
    }

    pub fn kind(&self) -> ThresholdKind {
        match self {
            ThresholdModel::Uniform { .. } => ThresholdKind::Uniform,
            ThresholdModel::Normal { .. } => ThresholdKind::Normal,
        }
    }

    /// A zero-width model cannot separate anything.
    pub fn is_degenerate(&self) -> bool {
        match *self {
            ThresholdModel::Uniform { lo, hi } => !(hi > lo),
            ThresholdModel::Normal { sigma, .. } => !(sigma > 0.0),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ThresholdModel::Uniform { lo, hi } => {
                if !(hi > lo) {
                    return lo;
                }
                // half-open [lo, hi) keeps the maximum on the right
                loop {
                    let t = lo + (hi - lo) * rng.random::<f64>();
                    if t < hi {
                        return t;
                    }
                }
            }
            ThresholdModel::Normal { mean, sigma, .. } => {
                mean + sigma * rng.sample::<f64, _>(StandardNormal)
            }
        }
    }

    /// `P(τ <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        match *self {
            ThresholdModel::Uniform { lo, hi } => {
                if hi > lo {
                    ((t - lo) / (hi - lo)).clamp(0.0, 1.0)
                } else if t < lo {
                    0.0
                } else if t > lo {
                    1.0
                } else {
                    0.5
                }
            }
            ThresholdModel::Normal { mean, sigma, .. } => {
                if sigma > 0.0 {
                    0.5 * libm::erfc(-(t - mean) / (sigma * std::f64::consts::SQRT_2))
                } else if t >= mean {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Density of the threshold distribution; zero for degenerate models.
    pub fn density(&self, t: f64) -> f64 {
        match *self {
            ThresholdModel::Uniform { lo, hi } => {
                if hi > lo && (lo..=hi).contains(&t) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            ThresholdModel::Normal { mean, sigma, .. } => {
                if sigma > 0.0 {
                    let z = (t - mean) / sigma;
                    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
                } else {
                    0.0
                }
            }
        }
    }
}
