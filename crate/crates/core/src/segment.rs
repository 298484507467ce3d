//! Stroke segmentation and outcome classification.
//!
//! Stroke boundaries are windowed extrema of the horizontal ball position:
//! a left-to-right stroke runs from an x-minimum to the next x-maximum and a
//! right-to-left stroke the other way round. Table contacts ("pitches") are
//! windowed maxima of the vertical pixel position inside a stroke, since `y`
//! grows downward.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extrema::{find_windowed_extrema, ExtremaError, Extremum, ExtremumKind, KindFilter};
use crate::trajectory::{FrameSpec, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SegmentError {
    #[error("invalid segmenter config: {0}")]
    InvalidConfig(String),
    #[error("trajectory contains undetected frames; run drop_missing first")]
    NotPreprocessed,
    #[error(transparent)]
    Extrema(#[from] ExtremaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremumEvent {
    pub t: f64,
    pub frame_index: u64,
    pub value: f64,
    pub kind: ExtremumKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchEvent {
    pub t: f64,
    pub frame_index: u64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrokeDirection {
    #[serde(rename = "LtoR")]
    LeftToRight,
    #[serde(rename = "RtoL")]
    RightToLeft,
}

impl StrokeDirection {
    pub fn flipped(self) -> Self {
        match self {
            Self::LeftToRight => Self::RightToLeft,
            Self::RightToLeft => Self::LeftToRight,
        }
    }

    /// +1 for left-to-right, -1 for right-to-left.
    pub fn sign(self) -> f64 {
        match self {
            Self::LeftToRight => 1.0,
            Self::RightToLeft => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrokeOutcome {
    Valid,
    Serve,
    MissedNet,
    MissedOut,
}

pub const NONSTANDARD_PITCH_PATTERN: &str = "nonstandard pitch pattern";

#[derive(Debug, Clone, PartialEq)]
pub struct StrokeSegment {
    pub start: ExtremumEvent,
    pub end: ExtremumEvent,
    pub direction: StrokeDirection,
    pub pitches: Vec<PitchEvent>,
    pub outcome: Option<StrokeOutcome>,
    /// Set when the pitch pattern fits none of the standard outcomes.
    pub note: Option<String>,
    /// Pitches detected for a nonstandard pattern; they are not counted in `pitches`.
    pub rejected_pitches: Vec<PitchEvent>,
}

impl StrokeSegment {
    pub fn duration(&self) -> f64 {
        self.end.t - self.start.t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmenterConfig {
    /// Length of the x-extremum window, seconds.
    pub boundary_window: f64,
    /// Length of the y-maximum (pitch) window, seconds.
    pub pitch_window: f64,
    /// Pitches closer than this to a stroke boundary are racket-occlusion artefacts.
    pub boundary_margin: f64,
    /// Pixel column of the net.
    pub net_x: f64,
    pub min_x_travel: f64,
    pub min_stroke_duration: f64,
    /// A pitch must rise this many pixels above the lowest y on each side
    /// within `boundary_window`; 0 keeps every windowed maximum.
    pub pitch_min_prominence: f64,
}

impl SegmenterConfig {
    pub fn for_frame(frame: FrameSpec) -> Self {
        Self {
            boundary_window: 0.08333,
            pitch_window: 0.04167,
            boundary_margin: 0.05,
            net_x: frame.width / 2.0,
            min_x_travel: 200.0,
            min_stroke_duration: 0.0833,
            pitch_min_prominence: 8.0,
        }
    }

    pub fn validate(&self, frame: FrameSpec) -> Result<(), SegmentError> {
        let fields = [
            ("boundary_window", self.boundary_window),
            ("pitch_window", self.pitch_window),
            ("boundary_margin", self.boundary_margin),
            ("net_x", self.net_x),
            ("min_x_travel", self.min_x_travel),
            ("min_stroke_duration", self.min_stroke_duration),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(SegmentError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.pitch_min_prominence.is_finite() && self.pitch_min_prominence >= 0.0) {
            return Err(SegmentError::InvalidConfig(format!(
                "pitch_min_prominence must be non-negative, got {}",
                self.pitch_min_prominence
            )));
        }
        if self.net_x >= frame.width {
            return Err(SegmentError::InvalidConfig(format!(
                "net_x {} must be inside the frame width {}",
                self.net_x, frame.width
            )));
        }
        Ok(())
    }
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        Self::for_frame(FrameSpec::default())
    }
}

fn to_event(traj: &Trajectory, e: &Extremum) -> ExtremumEvent {
    ExtremumEvent {
        t: e.t,
        frame_index: traj.observations()[e.index].frame_index,
        value: e.value,
        kind: e.kind,
    }
}

/// Splits a preprocessed trajectory into strokes (outcome unset).
pub fn segment_strokes(traj: &Trajectory, cfg: &SegmenterConfig) -> Result<Vec<StrokeSegment>, SegmentError> {
    cfg.validate(traj.frame())?;
    if !traj.all_detected() {
        return Err(SegmentError::NotPreprocessed);
    }
    let series: Vec<(f64, f64)> = traj.detected().map(|(t, p, _)| (t, p.x)).collect();
    let events = find_windowed_extrema(&series, cfg.boundary_window, KindFilter::Both)?;
    let turns = confirmed_reversals(&events, cfg.min_x_travel, cfg.min_stroke_duration);

    Ok(turns
        .windows(2)
        .map(|pair| {
            let (start, end) = (to_event(traj, &pair[0]), to_event(traj, &pair[1]));
            let direction = match start.kind {
                ExtremumKind::Minimum => StrokeDirection::LeftToRight,
                ExtremumKind::Maximum => StrokeDirection::RightToLeft,
            };
            StrokeSegment {
                start,
                end,
                direction,
                pitches: Vec::new(),
                outcome: None,
                note: None,
                rejected_pitches: Vec::new(),
            }
        })
        .collect())
}

/// Threshold zigzag over raw extrema: a reversal is confirmed only once the
/// series has travelled `min_travel` over at least `min_duration` away from
/// the current turning point; until then a more extreme event of the same
/// kind replaces the turning point and opposite-kind jitter is ignored.
fn confirmed_reversals(events: &[Extremum], min_travel: f64, min_duration: f64) -> Vec<Extremum> {
    let mut confirmed = Vec::new();
    let mut current: Option<Extremum> = None;
    let (mut lowest, mut highest): (Option<Extremum>, Option<Extremum>) = (None, None);

    for &e in events {
        match current {
            None => {
                let slot = match e.kind {
                    ExtremumKind::Minimum => &mut lowest,
                    ExtremumKind::Maximum => &mut highest,
                };
                if slot.is_none_or(|s| e.kind.more_extreme(e.value, s.value)) {
                    *slot = Some(e);
                } else {
                    continue;
                }
                if let (Some(lo), Some(hi)) = (lowest, highest) {
                    let (first, second) = if lo.t < hi.t { (lo, hi) } else { (hi, lo) };
                    if hi.value - lo.value >= min_travel && second.t - first.t >= min_duration {
                        confirmed.push(first);
                        current = Some(second);
                    }
                }
            }
            Some(c) if e.kind == c.kind => {
                if e.kind.more_extreme(e.value, c.value) {
                    current = Some(e);
                }
            }
            Some(c) => {
                if (e.value - c.value).abs() >= min_travel && e.t - c.t >= min_duration {
                    confirmed.push(c);
                    current = Some(e);
                }
            }
        }
    }
    confirmed.extend(current);
    confirmed
}

/// Table contacts inside a stroke: y-maxima of the samples between the two
/// boundaries, excluding any within `boundary_margin` of either boundary or
/// less prominent than `pitch_min_prominence`.
pub fn detect_pitches(traj: &Trajectory, segment: &StrokeSegment, cfg: &SegmenterConfig) -> Vec<PitchEvent> {
    let (t0, t1) = (segment.start.t, segment.end.t);
    let all: Vec<(f64, f64)> = traj.detected().map(|(t, p, _)| (t, p.y)).collect();
    let inside: Vec<(f64, f64, f64, u64)> = traj
        .detected()
        .filter(|&(t, _, _)| t >= t0 && t <= t1)
        .map(|(t, p, f)| (t, p.x, p.y, f))
        .collect();
    let series: Vec<(f64, f64)> = inside.iter().map(|&(t, _, y, _)| (t, y)).collect();
    let Ok(maxima) = find_windowed_extrema(&series, cfg.pitch_window, KindFilter::Maximum) else {
        return Vec::new();
    };
    maxima
        .iter()
        .filter(|m| m.t - t0 > cfg.boundary_margin && t1 - m.t > cfg.boundary_margin)
        .filter(|m| cfg.pitch_min_prominence == 0.0 || prominence(&all, m.t, m.value, cfg.boundary_window) >= cfg.pitch_min_prominence)
        .map(|m| {
            let (t, x, y, frame_index) = inside[m.index];
            PitchEvent { t, frame_index, x, y }
        })
        .collect()
}

/// Height of the peak at `t` above the higher of the two lowest values found
/// within `span` on either side; a side with no samples gives 0.
fn prominence(series: &[(f64, f64)], t: f64, value: f64, span: f64) -> f64 {
    let side_min = |range: &mut dyn Iterator<Item = &(f64, f64)>| range.map(|&(_, v)| v).reduce(f64::min);
    let before = side_min(&mut series.iter().filter(|&&(s, _)| s < t && t - s <= span));
    let after = side_min(&mut series.iter().filter(|&&(s, _)| s > t && s - t <= span));
    match (before, after) {
        (Some(b), Some(a)) => value - b.max(a),
        _ => 0.0,
    }
}

/// Outcome of a stroke plus an optional note for nonstandard pitch patterns.
pub fn classify_outcome_annotated(
    segment: &StrokeSegment,
    pitches: &[PitchEvent],
    cfg: &SegmenterConfig,
) -> (StrokeOutcome, Option<&'static str>) {
    let sign = segment.direction.sign();
    // positive when x lies beyond the net in the direction of travel
    let beyond_net = |x: f64| sign * (x - cfg.net_x) > 0.0;

    let crossed = match segment.direction {
        StrokeDirection::LeftToRight => segment.end.value > cfg.net_x,
        StrokeDirection::RightToLeft => segment.end.value < cfg.net_x,
    };
    if !crossed {
        return (StrokeOutcome::MissedNet, None);
    }
    match pitches {
        [] => (StrokeOutcome::MissedOut, None),
        [p] if beyond_net(p.x) => (StrokeOutcome::Valid, None),
        [a, b] if (a.x - cfg.net_x) * (b.x - cfg.net_x) < 0.0 => (StrokeOutcome::Serve, None),
        _ => (StrokeOutcome::MissedOut, Some(NONSTANDARD_PITCH_PATTERN)),
    }
}

pub fn classify_outcome(segment: &StrokeSegment, pitches: &[PitchEvent], cfg: &SegmenterConfig) -> StrokeOutcome {
    classify_outcome_annotated(segment, pitches, cfg).0
}

/// Full detection pass: segmentation, pitch detection and outcome for every stroke.
pub fn detect_strokes(traj: &Trajectory, cfg: &SegmenterConfig) -> Result<Vec<StrokeSegment>, SegmentError> {
    let mut segments = segment_strokes(traj, cfg)?;
    for seg in &mut segments {
        let pitches = detect_pitches(traj, seg, cfg);
        let (outcome, note) = classify_outcome_annotated(seg, &pitches, cfg);
        seg.outcome = Some(outcome);
        if note.is_some() {
            seg.note = note.map(str::to_string);
            seg.rejected_pitches = pitches;
        } else {
            seg.pitches = pitches;
        }
    }
    Ok(segments)
}
