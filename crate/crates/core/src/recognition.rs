//! Fixed-shape classifier inputs built from detected strokes.
//!
//! Every sample reads left-to-right (right-to-left strokes are mirrored),
//! holds exactly [`SEQ_LEN`] `(x, y)` rows, and is zero-padded at the head
//! (`pre`) or tail (`post`) when the stroke is shorter.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::segment::{StrokeDirection, StrokeSegment};
use crate::trajectory::{mirror_x, Trajectory};

pub const SEQ_LEN: usize = 200;
pub const FEATURES: usize = 2 * SEQ_LEN;
pub const MIN_STROKE_LEN: usize = 5;
pub const TRAIN_FRACTION: f64 = 0.85;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecognitionError {
    #[error("stroke too short: {0} observations, at least {MIN_STROKE_LEN} required")]
    TooShort(usize),
    #[error("sample `{0}` has no label")]
    Unlabeled(String),
    #[error("label {label} has {count} samples, at least 2 required")]
    TooFewForLabel { label: StrokeLabel, count: usize },
    #[error("duplicate source_id `{0}`")]
    DuplicateSource(String),
    #[error("sample `{id}` has {rows} rows, expected {SEQ_LEN}")]
    BadShape { id: String, rows: usize },
    #[error("dataset line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrokeLabel {
    Topspin,
    Block,
    Push,
    Flick,
    Lob,
    Flat,
}

impl StrokeLabel {
    pub const ALL: [StrokeLabel; 6] = [
        StrokeLabel::Topspin,
        StrokeLabel::Block,
        StrokeLabel::Push,
        StrokeLabel::Flick,
        StrokeLabel::Lob,
        StrokeLabel::Flat,
    ];
    pub const COUNT: usize = 6;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Topspin => "topspin",
            Self::Block => "block",
            Self::Push => "push",
            Self::Flick => "flick",
            Self::Lob => "lob",
            Self::Flat => "flat",
        }
    }
}

impl fmt::Display for StrokeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrokeLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| format!("unknown stroke label `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PadMode {
    Pre,
    Post,
}

impl PadMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Pre => "pre",
            Self::Post => "post",
        }
    }
}

impl FromStr for PadMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pre" => Ok(Self::Pre),
            "post" => Ok(Self::Post),
            other => Err(format!("unknown pad mode `{other}` (expected pre|post)")),
        }
    }
}

/// One classifier input: [`SEQ_LEN`] rows of `(x, y)` pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeSample {
    pub label: Option<StrokeLabel>,
    pub pad_mode: PadMode,
    pub source_id: String,
    #[serde(rename = "seq")]
    pub sequence: Vec<[f64; 2]>,
}

impl StrokeSample {
    /// Builds a sample from raw left-to-right rows, padding or truncating to [`SEQ_LEN`].
    pub fn from_rows(rows: &[[f64; 2]], pad_mode: PadMode, label: Option<StrokeLabel>, source_id: String) -> Self {
        let data = &rows[..rows.len().min(SEQ_LEN)];
        let pad = SEQ_LEN - data.len();
        let mut sequence = Vec::with_capacity(SEQ_LEN);
        if pad_mode == PadMode::Pre {
            sequence.resize(pad, [0.0, 0.0]);
        }
        sequence.extend_from_slice(data);
        sequence.resize(SEQ_LEN, [0.0, 0.0]);
        Self { label, pad_mode, source_id, sequence }
    }

    /// Non-padded rows, assuming no genuine observation sits at `(0, 0)`.
    pub fn data_rows(&self) -> &[[f64; 2]] {
        let zero = |r: &[f64; 2]| r[0] == 0.0 && r[1] == 0.0;
        match self.pad_mode {
            PadMode::Pre => {
                let start = self.sequence.iter().position(|r| !zero(r)).unwrap_or(self.sequence.len());
                &self.sequence[start..]
            }
            PadMode::Post => {
                let end = self.sequence.iter().rposition(|r| !zero(r)).map_or(0, |i| i + 1);
                &self.sequence[..end]
            }
        }
    }

    /// Same data re-padded in another mode.
    pub fn repadded(&self, mode: PadMode) -> StrokeSample {
        if mode == self.pad_mode {
            return self.clone();
        }
        StrokeSample::from_rows(self.data_rows(), mode, self.label, self.source_id.clone())
    }

    fn check_shape(&self) -> Result<(), RecognitionError> {
        if self.sequence.len() != SEQ_LEN {
            return Err(RecognitionError::BadShape { id: self.source_id.clone(), rows: self.sequence.len() });
        }
        Ok(())
    }
}

/// Extracts a stroke from `traj`, mirrors right-to-left strokes and fits it to
/// [`SEQ_LEN`] rows (earliest rows kept when longer).
pub fn prepare_sample(
    traj: &Trajectory,
    segment: &StrokeSegment,
    pad_mode: PadMode,
    frame_width: f64,
) -> Result<StrokeSample, RecognitionError> {
    let mirror = segment.direction == StrokeDirection::RightToLeft;
    let rows: Vec<[f64; 2]> = traj
        .detected()
        .filter(|&(t, _, _)| t >= segment.start.t && t <= segment.end.t)
        .map(|(_, p, _)| [if mirror { mirror_x(p.x, frame_width) } else { p.x }, p.y])
        .collect();
    if rows.len() < MIN_STROKE_LEN {
        return Err(RecognitionError::TooShort(rows.len()));
    }
    let id = format!("f{}-{}", segment.start.frame_index, segment.end.frame_index);
    Ok(StrokeSample::from_rows(&rows, pad_mode, None, id))
}

/// Time-major interleaving `x0, y0, x1, y1, ...` of length [`FEATURES`].
pub fn flatten(sample: &StrokeSample) -> Vec<f64> {
    sample.sequence.iter().flat_map(|r| r.iter().copied()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<StrokeSample>,
    pub validation: Vec<StrokeSample>,
    pub seed: u64,
}

/// Stratified 85/15 split; each label keeps at least one validation sample.
pub fn split_dataset(samples: &[StrokeSample], seed: u64) -> Result<DatasetSplit, RecognitionError> {
    let mut seen = HashSet::new();
    let mut by_label: BTreeMap<StrokeLabel, Vec<&StrokeSample>> = BTreeMap::new();
    for s in samples {
        let label = s.label.ok_or_else(|| RecognitionError::Unlabeled(s.source_id.clone()))?;
        if !seen.insert(s.source_id.as_str()) {
            return Err(RecognitionError::DuplicateSource(s.source_id.clone()));
        }
        by_label.entry(label).or_default().push(s);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut validation) = (Vec::new(), Vec::new());
    for (label, mut group) in by_label {
        if group.len() < 2 {
            return Err(RecognitionError::TooFewForLabel { label, count: group.len() });
        }
        group.shuffle(&mut rng);
        let n_train = ((group.len() as f64 * TRAIN_FRACTION).floor() as usize).min(group.len() - 1);
        let (a, b) = group.split_at(n_train);
        train.extend(a.iter().map(|s| (*s).clone()));
        validation.extend(b.iter().map(|s| (*s).clone()));
    }
    Ok(DatasetSplit { train, validation, seed })
}

pub fn write_dataset<W: Write>(samples: &[StrokeSample], mut out: W) -> Result<(), RecognitionError> {
    for s in samples {
        let line = serde_json::to_string(s).map_err(|e| RecognitionError::Io(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| RecognitionError::Io(e.to_string()))?;
    }
    Ok(())
}

pub fn read_dataset<R: BufRead>(input: R) -> Result<Vec<StrokeSample>, RecognitionError> {
    let mut samples = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| RecognitionError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let s: StrokeSample =
            serde_json::from_str(&line).map_err(|e| RecognitionError::Parse { line: i + 1, reason: e.to_string() })?;
        s.check_shape().map_err(|e| RecognitionError::Parse { line: i + 1, reason: e.to_string() })?;
        samples.push(s);
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extrema::ExtremumKind;
    use crate::segment::ExtremumEvent;
    use crate::trajectory::{FrameSpec, Point};

    fn stroke_traj(n: usize) -> Trajectory {
        Trajectory::from_frames(
            (0..n as u64).map(|i| (i, Some(Point::new(100.0 + i as f64, 300.0 + (i % 3) as f64)))),
            FrameSpec::default(),
        )
        .unwrap()
    }

    fn whole(traj: &Trajectory, direction: StrokeDirection) -> StrokeSegment {
        let obs = traj.observations();
        let (first, last) = (obs[0], obs[obs.len() - 1]);
        let ev = |o: &crate::trajectory::BallObservation, kind| ExtremumEvent {
            t: o.t,
            frame_index: o.frame_index,
            value: o.position.unwrap().x,
            kind,
        };
        StrokeSegment {
            start: ev(&first, ExtremumKind::Minimum),
            end: ev(&last, ExtremumKind::Maximum),
            direction,
            pitches: vec![],
            outcome: None,
            note: None,
            rejected_pitches: vec![],
        }
    }

    fn labeled(n: usize, label: StrokeLabel, tag: &str) -> Vec<StrokeSample> {
        (0..n)
            .map(|i| StrokeSample::from_rows(&[[i as f64 + 1.0, 1.0]; 10], PadMode::Pre, Some(label), format!("{tag}{i}")))
            .collect()
    }

    #[test]
    fn exact_length_stroke_is_unpadded() {
        let t = stroke_traj(200);
        let s = prepare_sample(&t, &whole(&t, StrokeDirection::LeftToRight), PadMode::Pre, 1920.0).unwrap();
        for (row, (_, p, _)) in s.sequence.iter().zip(t.detected()) {
            assert_eq!(*row, [p.x, p.y]);
        }
    }

    #[test]
    fn right_to_left_strokes_are_mirrored() {
        let t = stroke_traj(50);
        let s = prepare_sample(&t, &whole(&t, StrokeDirection::RightToLeft), PadMode::Post, 1920.0).unwrap();
        assert_eq!(s.sequence[0], [1919.0 - 100.0, 300.0]);
        assert_eq!(s.sequence[49], [1919.0 - 149.0, 301.0]);
        assert_eq!(s.sequence[50], [0.0, 0.0]);
    }

    #[test]
    fn pre_padding_puts_zeros_first() {
        let t = stroke_traj(150);
        let s = prepare_sample(&t, &whole(&t, StrokeDirection::LeftToRight), PadMode::Pre, 1920.0).unwrap();
        assert!(s.sequence[..50].iter().all(|r| *r == [0.0, 0.0]));
        assert_eq!(s.sequence[50], [100.0, 300.0]);
        assert_eq!(s.data_rows().len(), 150);
    }

    #[test]
    fn long_strokes_keep_the_first_rows() {
        let t = stroke_traj(230);
        let s = prepare_sample(&t, &whole(&t, StrokeDirection::LeftToRight), PadMode::Pre, 1920.0).unwrap();
        assert_eq!(s.sequence.len(), SEQ_LEN);
        assert_eq!(s.sequence[0], [100.0, 300.0]);
        assert_eq!(s.sequence[199][0], 299.0);
    }

    #[test]
    fn too_short_stroke_is_rejected() {
        let t = stroke_traj(4);
        let err = prepare_sample(&t, &whole(&t, StrokeDirection::LeftToRight), PadMode::Pre, 1920.0).unwrap_err();
        assert_eq!(err, RecognitionError::TooShort(4));
    }

    #[test]
    fn flatten_interleaves_time_major() {
        let mut rows = vec![[0.0, 0.0]; 3];
        rows[0] = [5.0, 7.0];
        let s = StrokeSample::from_rows(&rows, PadMode::Post, None, "a".into());
        let f = flatten(&s);
        assert_eq!(f.len(), FEATURES);
        assert_eq!((f[0], f[1]), (5.0, 7.0));
        let zeros = StrokeSample::from_rows(&[], PadMode::Pre, None, "z".into());
        assert!(flatten(&zeros).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn repadding_moves_the_data_block() {
        let rows: Vec<[f64; 2]> = (1..=30).map(|i| [i as f64, 2.0 * i as f64]).collect();
        let pre = StrokeSample::from_rows(&rows, PadMode::Pre, None, "r".into());
        let post = pre.repadded(PadMode::Post);
        assert_eq!(post, StrokeSample::from_rows(&rows, PadMode::Post, None, "r".into()));
        assert_eq!(post.repadded(PadMode::Pre), pre);
    }

    #[test]
    fn split_is_85_15_per_label_and_deterministic() {
        let mut all = labeled(100, StrokeLabel::Topspin, "t");
        all.extend(labeled(100, StrokeLabel::Lob, "l"));
        let a = split_dataset(&all, 42).unwrap();
        let count = |v: &[StrokeSample], l| v.iter().filter(|s| s.label == Some(l)).count();
        assert_eq!(count(&a.train, StrokeLabel::Topspin), 85);
        assert_eq!(count(&a.validation, StrokeLabel::Lob), 15);
        assert_eq!(a, split_dataset(&all, 42).unwrap());
        assert_ne!(a.train, split_dataset(&all, 43).unwrap().train);
    }

    #[test]
    fn split_minimum_and_errors() {
        let two = labeled(2, StrokeLabel::Push, "p");
        let s = split_dataset(&two, 1).unwrap();
        assert_eq!((s.train.len(), s.validation.len()), (1, 1));

        let one = labeled(1, StrokeLabel::Push, "p");
        assert!(matches!(split_dataset(&one, 1), Err(RecognitionError::TooFewForLabel { .. })));

        let mut unl = labeled(2, StrokeLabel::Push, "p");
        unl[0].label = None;
        assert!(matches!(split_dataset(&unl, 1), Err(RecognitionError::Unlabeled(_))));

        let mut dup = labeled(2, StrokeLabel::Push, "p");
        dup[1].source_id = dup[0].source_id.clone();
        assert!(matches!(split_dataset(&dup, 1), Err(RecognitionError::DuplicateSource(_))));
    }

    #[test]
    fn dataset_jsonl_round_trip() {
        let samples = labeled(3, StrokeLabel::Flick, "f");
        let mut buf = Vec::new();
        write_dataset(&samples, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"label\":\"flick\",\"pad_mode\":\"pre\",\"source_id\":\"f0\",\"seq\":[[0.0,0.0]"));
        assert_eq!(read_dataset(buf.as_slice()).unwrap(), samples);
        assert!(matches!(
            read_dataset("{\"label\":null,\"pad_mode\":\"pre\",\"source_id\":\"x\",\"seq\":[]}\n".as_bytes()),
            Err(RecognitionError::Parse { line: 1, .. })
        ));
    }
}
