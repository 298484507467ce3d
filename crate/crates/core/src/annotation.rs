//! Per-trajectory stroke annotation document, shared by the segmenter output
//! and the synthetic generator's ground truth.

use serde::{Deserialize, Serialize};

use crate::homography::{pitch_table_position, Homography, HomographyError};
use crate::recognition::StrokeLabel;
use crate::segment::{StrokeDirection, StrokeOutcome, StrokeSegment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchRecord {
    pub frame: u64,
    pub x: f64,
    pub y: f64,
    /// Table-surface position in meters, when a homography was supplied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeRecord {
    pub start_frame: u64,
    pub end_frame: u64,
    pub direction: StrokeDirection,
    pub outcome: StrokeOutcome,
    pub pitches: Vec<PitchRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<StrokeLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contact_frames: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeAnnotation {
    pub fps: f64,
    pub strokes: Vec<StrokeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl StrokeRecord {
    /// Record for a classified segment. Segments without an outcome are
    /// reported as missed-out, the outcome of a stroke with no pitch.
    pub fn from_segment(seg: &StrokeSegment, homography: Option<&Homography>) -> Result<Self, HomographyError> {
        let pitches = seg
            .pitches
            .iter()
            .map(|p| {
                let table = homography
                    .map(|h| pitch_table_position(p, h).map(|(u, v)| [u, v]))
                    .transpose()?;
                Ok(PitchRecord { frame: p.frame_index, x: p.x, y: p.y, table })
            })
            .collect::<Result<_, HomographyError>>()?;
        Ok(Self {
            start_frame: seg.start.frame_index,
            end_frame: seg.end.frame_index,
            direction: seg.direction,
            outcome: seg.outcome.unwrap_or(StrokeOutcome::MissedOut),
            pitches,
            label: None,
            contact_frames: None,
            note: seg.note.clone(),
        })
    }
}

impl StrokeAnnotation {
    pub fn from_segments(
        fps: f64,
        segments: &[StrokeSegment],
        homography: Option<&Homography>,
    ) -> Result<Self, HomographyError> {
        let strokes = segments
            .iter()
            .map(|s| StrokeRecord::from_segment(s, homography))
            .collect::<Result<_, _>>()?;
        Ok(Self { fps, strokes, config: None })
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("annotation serializes");
        s.push('\n');
        s
    }
}
