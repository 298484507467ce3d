//! Per-frame evaluation of ball-tracker output against ground truth.
//!
//! A prediction within `threshold` pixels (Euclidean, inclusive) of the
//! labelled ball center is a true positive. How a detection that is present
//! but too far away is counted depends on [`Convention`].

use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trajectory::{Point, Trajectory};

pub const DEFAULT_THRESHOLD_PX: f64 = 25.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackerEvalError {
    #[error("all confusion counts are zero")]
    NoCounts,
    #[error("frame {0} appears in only one of the two trajectories")]
    UnmatchedFrame(u64),
    #[error("threshold must be non-negative and finite, got {0}")]
    BadThreshold(f64),
}

/// How a present-but-distant prediction is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// Counted as both a false positive and a false negative.
    #[default]
    Literal,
    /// Counted as a false positive only.
    FpOnly,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Self::Literal => "literal",
            Self::FpOnly => "fp-only",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Convention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(Self::Literal),
            "fp-only" => Ok(Self::FpOnly),
            other => Err(format!("unknown convention `{other}` (expected literal|fp-only)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePair {
    pub frame_index: u64,
    pub gt: Option<Point>,
    pub pred: Option<Point>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

impl Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self::new(self.tp + o.tp, self.tn + o.tn, self.fp + o.fp, self.fn_ + o.fn_)
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl std::iter::Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub accuracy_pct: f64,
    pub f1: f64,
}

impl Metrics {
    /// Display-rounded copy: 4 decimals for ratios, 2 for the accuracy percentage.
    pub fn rounded(&self) -> Metrics {
        let r = |v: f64, d: i32| {
            let s = 10f64.powi(d);
            (v * s).round() / s
        };
        Metrics {
            precision: r(self.precision, 4),
            recall: r(self.recall, 4),
            accuracy: r(self.accuracy, 4),
            accuracy_pct: r(self.accuracy_pct, 2),
            f1: r(self.f1, 4),
        }
    }
}

/// Contribution of a single frame pair to the confusion counts.
pub fn frame_outcome(pair: &FramePair, threshold: f64, convention: Convention) -> ConfusionCounts {
    match (pair.gt, pair.pred) {
        (Some(gt), Some(pred)) => {
            if gt.distance(&pred) <= threshold {
                ConfusionCounts::new(1, 0, 0, 0)
            } else {
                match convention {
                    Convention::Literal => ConfusionCounts::new(0, 0, 1, 1),
                    Convention::FpOnly => ConfusionCounts::new(0, 0, 1, 0),
                }
            }
        }
        (None, Some(_)) => ConfusionCounts::new(0, 0, 1, 0),
        (Some(_), None) => ConfusionCounts::new(0, 0, 0, 1),
        (None, None) => ConfusionCounts::new(0, 1, 0, 0),
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn compute_metrics(c: &ConfusionCounts) -> Result<Metrics, TrackerEvalError> {
    if c.total() == 0 {
        return Err(TrackerEvalError::NoCounts);
    }
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let accuracy = ratio(c.tp + c.tn, c.total());
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Metrics { precision, recall, accuracy, accuracy_pct: 100.0 * accuracy, f1 })
}

/// Pairs two trajectories frame by frame; both must cover the same frame indices.
pub fn pair_frames(gt: &Trajectory, pred: &Trajectory) -> Result<Vec<FramePair>, TrackerEvalError> {
    let (g, p) = (gt.observations(), pred.observations());
    let mut pairs = Vec::with_capacity(g.len());
    let (mut i, mut j) = (0, 0);
    while i < g.len() || j < p.len() {
        match (g.get(i), p.get(j)) {
            (Some(a), Some(b)) if a.frame_index == b.frame_index => {
                pairs.push(FramePair { frame_index: a.frame_index, gt: a.position, pred: b.position });
                i += 1;
                j += 1;
            }
            (Some(a), Some(b)) => return Err(TrackerEvalError::UnmatchedFrame(a.frame_index.min(b.frame_index))),
            (Some(a), None) => return Err(TrackerEvalError::UnmatchedFrame(a.frame_index)),
            (None, Some(b)) => return Err(TrackerEvalError::UnmatchedFrame(b.frame_index)),
            (None, None) => unreachable!(),
        }
    }
    Ok(pairs)
}

/// Machine-readable tracker evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackerReport {
    pub counts: ConfusionCounts,
    pub metrics: Metrics,
    pub metrics_rounded: Metrics,
    pub convention: Convention,
    pub threshold_px: f64,
    pub frames: usize,
}

pub fn evaluate_tracker(
    gt: &Trajectory,
    pred: &Trajectory,
    threshold: f64,
    convention: Convention,
) -> Result<TrackerReport, TrackerEvalError> {
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(TrackerEvalError::BadThreshold(threshold));
    }
    let pairs = pair_frames(gt, pred)?;
    let counts: ConfusionCounts = pairs.iter().map(|p| frame_outcome(p, threshold, convention)).sum();
    let metrics = compute_metrics(&counts)?;
    Ok(TrackerReport {
        counts,
        metrics,
        metrics_rounded: metrics.rounded(),
        convention,
        threshold_px: threshold,
        frames: pairs.len(),
    })
}
