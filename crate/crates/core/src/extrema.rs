//! Windowed local extrema of a time series.
//!
//! A sample at time `t` is a windowed minimum when its value is `<=` every
//! sample in the open window `(t - w/2, t + w/2)` (maximum: `>=`). Samples
//! whose window would reach past either end of the series are never
//! reported. Within a run of identical consecutive values only the earliest
//! sample can be reported, and two same-kind events closer than `w` collapse
//! into the more extreme one (the earlier on ties).

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtremaError {
    #[error("series needs at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("window must be positive and finite, got {0}")]
    BadWindow(f64),
    #[error("series times must be strictly increasing (sample {0})")]
    Unsorted(usize),
    #[error("series value at sample {0} is not finite")]
    NonFinite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

impl ExtremumKind {
    pub fn opposite(self) -> Self {
        match self {
            Self::Minimum => Self::Maximum,
            Self::Maximum => Self::Minimum,
        }
    }

    /// True when `a` is strictly more extreme than `b` for this kind.
    pub fn more_extreme(self, a: f64, b: f64) -> bool {
        match self {
            Self::Minimum => a < b,
            Self::Maximum => a > b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindFilter {
    Minimum,
    Maximum,
    Both,
}

impl KindFilter {
    fn wants(self, kind: ExtremumKind) -> bool {
        matches!(
            (self, kind),
            (Self::Both, _)
                | (Self::Minimum, ExtremumKind::Minimum)
                | (Self::Maximum, ExtremumKind::Maximum)
        )
    }
}

/// A windowed extremum found in a series; `index` points back into the input slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub index: usize,
    pub t: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

/// Finds windowed extrema of `series` (pairs of `(t, value)`) in O(n).
pub fn find_windowed_extrema(
    series: &[(f64, f64)],
    window: f64,
    filter: KindFilter,
) -> Result<Vec<Extremum>, ExtremaError> {
    validate(series, window)?;
    let half = window / 2.0;
    let n = series.len();
    let (t_first, t_last) = (series[0].0, series[n - 1].0);

    let mut mins: VecDeque<usize> = VecDeque::new();
    let mut maxs: VecDeque<usize> = VecDeque::new();
    let mut lo = 0usize;
    let mut hi = 0usize; // exclusive end of the indices pushed so far
    let mut candidates = Vec::new();

    for i in 0..n {
        let (t, v) = series[i];
        while hi < n && (series[hi].0 - t).abs() < half {
            let value = series[hi].1;
            while mins.back().is_some_and(|&b| series[b].1 >= value) {
                mins.pop_back();
            }
            while maxs.back().is_some_and(|&b| series[b].1 <= value) {
                maxs.pop_back();
            }
            mins.push_back(hi);
            maxs.push_back(hi);
            hi += 1;
        }
        while (series[lo].0 - t).abs() >= half {
            lo += 1;
        }
        while mins.front().is_some_and(|&f| f < lo) {
            mins.pop_front();
        }
        while maxs.front().is_some_and(|&f| f < lo) {
            maxs.pop_front();
        }

        let admissible = t - t_first >= half && t_last - t >= half;
        let plateau_tail = i > 0 && series[i - 1].1 == v;
        if !admissible || plateau_tail {
            continue;
        }
        let window_min = series[*mins.front().expect("window holds sample i")].1;
        let window_max = series[*maxs.front().expect("window holds sample i")].1;
        if v <= window_min && filter.wants(ExtremumKind::Minimum) {
            candidates.push(Extremum { index: i, t, value: v, kind: ExtremumKind::Minimum });
        }
        if v >= window_max && filter.wants(ExtremumKind::Maximum) {
            candidates.push(Extremum { index: i, t, value: v, kind: ExtremumKind::Maximum });
        }
    }
    Ok(merge_close(candidates, window))
}

fn validate(series: &[(f64, f64)], window: f64) -> Result<(), ExtremaError> {
    if series.len() < 2 {
        return Err(ExtremaError::TooShort(series.len()));
    }
    if !(window.is_finite() && window > 0.0) {
        return Err(ExtremaError::BadWindow(window));
    }
    for (i, &(t, v)) in series.iter().enumerate() {
        if !t.is_finite() || !v.is_finite() {
            return Err(ExtremaError::NonFinite(i));
        }
        if i > 0 && t <= series[i - 1].0 {
            return Err(ExtremaError::Unsorted(i));
        }
    }
    Ok(())
}

/// Collapses same-kind events closer than `window` (measured from the last
/// kept event of that kind) into the more extreme one.
fn merge_close(candidates: Vec<Extremum>, window: f64) -> Vec<Extremum> {
    let mut kept: Vec<Extremum> = Vec::with_capacity(candidates.len());
    let mut last_of_kind: [Option<usize>; 2] = [None, None];
    for e in candidates {
        let slot = e.kind as usize;
        match last_of_kind[slot] {
            Some(k) if e.t - kept[k].t < window => {
                if e.kind.more_extreme(e.value, kept[k].value) {
                    kept[k].index = usize::MAX; // tombstone
                    kept.push(e);
                    last_of_kind[slot] = Some(kept.len() - 1);
                }
            }
            _ => {
                kept.push(e);
                last_of_kind[slot] = Some(kept.len() - 1);
            }
        }
    }
    kept.retain(|e| e.index != usize::MAX);
    kept
}
