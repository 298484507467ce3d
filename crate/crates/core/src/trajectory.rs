//! Ball observations, trajectory CSV I/O and the missing-frame filter.
//!
//! A trajectory is the per-frame output of a ball tracker in pixel space:
//! origin at the top-left corner, `x` growing rightward and `y` growing
//! downward. Frames where the tracker found no ball carry no coordinates.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_FPS: f64 = 120.0;
pub const DEFAULT_FRAME_WIDTH: f64 = 1920.0;
pub const DEFAULT_FRAME_HEIGHT: f64 = 1080.0;

const CSV_HEADER: [&str; 4] = ["frame", "x", "y", "detected"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("empty trajectory file")]
    Empty,
    #[error("line {line}: bad header, expected `frame,x,y,detected`")]
    BadHeader { line: u64 },
    #[error("line {line}: malformed row: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("line {line}: frame index {frame} does not increase (previous {previous})")]
    NonMonotonic { line: u64, frame: u64, previous: u64 },
    #[error("line {line}: coordinate ({x}, {y}) outside the {width}x{height} frame")]
    OutOfBounds {
        line: u64,
        x: f64,
        y: f64,
        width: f64,
        height: f64,
    },
    #[error("observation {index}: frame index {frame} does not increase (previous {previous})")]
    NotIncreasing { index: usize, frame: u64, previous: u64 },
    #[error("observation {index}: coordinate ({x}, {y}) outside the {width}x{height} frame")]
    ObservationOutOfBounds {
        index: usize,
        x: f64,
        y: f64,
        width: f64,
        height: f64,
    },
    #[error("invalid trajectory parameters: {0}")]
    InvalidParameters(String),
    #[error("insufficient data: {0} detected observations, at least 2 required")]
    InsufficientData(usize),
    #[error("io error: {0}")]
    Io(String),
}

/// Pixel position of a detected ball center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }
}

/// One frame of tracker output. `position` is `None` when the ball was not detected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallObservation {
    pub frame_index: u64,
    pub t: f64,
    pub position: Option<Point>,
}

impl BallObservation {
    pub fn detected(&self) -> bool {
        self.position.is_some()
    }
}

/// Frame geometry and timing shared by every observation in a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub fps: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for FrameSpec {
    fn default() -> Self {
        Self {
            fps: DEFAULT_FPS,
            width: DEFAULT_FRAME_WIDTH,
            height: DEFAULT_FRAME_HEIGHT,
        }
    }
}

impl FrameSpec {
    pub fn new(fps: f64, width: f64, height: f64) -> Result<Self, TrajectoryError> {
        let spec = Self { fps, width, height };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), TrajectoryError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.fps) || !ok(self.width) || !ok(self.height) {
            return Err(TrajectoryError::InvalidParameters(format!(
                "fps, width and height must be positive (got {}, {}, {})",
                self.fps, self.width, self.height
            )));
        }
        Ok(())
    }

    /// Timestamp of a frame, in seconds.
    pub fn time_of(&self, frame_index: u64) -> f64 {
        frame_index as f64 / self.fps
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.x < self.width && p.y >= 0.0 && p.y < self.height
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    observations: Vec<BallObservation>,
    frame: FrameSpec,
}

impl Trajectory {
    /// Builds a trajectory from `(frame_index, position)` pairs; timestamps are
    /// derived from the frame rate.
    pub fn from_frames(
        frames: impl IntoIterator<Item = (u64, Option<Point>)>,
        frame: FrameSpec,
    ) -> Result<Self, TrajectoryError> {
        frame.validate()?;
        let observations = frames
            .into_iter()
            .map(|(frame_index, position)| BallObservation {
                frame_index,
                t: frame.time_of(frame_index),
                position,
            })
            .collect();
        Self::new(observations, frame)
    }

    pub fn new(observations: Vec<BallObservation>, frame: FrameSpec) -> Result<Self, TrajectoryError> {
        frame.validate()?;
        let mut previous: Option<u64> = None;
        for (index, obs) in observations.iter().enumerate() {
            if let Some(prev) = previous {
                if obs.frame_index <= prev {
                    return Err(TrajectoryError::NotIncreasing {
                        index,
                        frame: obs.frame_index,
                        previous: prev,
                    });
                }
            }
            previous = Some(obs.frame_index);
            if let Some(p) = obs.position {
                if !frame.contains(p) {
                    return Err(TrajectoryError::ObservationOutOfBounds {
                        index,
                        x: p.x,
                        y: p.y,
                        width: frame.width,
                        height: frame.height,
                    });
                }
            }
        }
        Ok(Self { observations, frame })
    }

    pub fn observations(&self) -> &[BallObservation] {
        &self.observations
    }

    pub fn frame(&self) -> FrameSpec {
        self.frame
    }

    pub fn fps(&self) -> f64 {
        self.frame.fps
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Detected observations as `(t, point, frame_index)` triples.
    pub fn detected(&self) -> impl Iterator<Item = (f64, Point, u64)> + '_ {
        self.observations
            .iter()
            .filter_map(|o| o.position.map(|p| (o.t, p, o.frame_index)))
    }

    pub fn all_detected(&self) -> bool {
        self.observations.iter().all(BallObservation::detected)
    }

    /// Reflects every x coordinate about the vertical center line: `x -> (width - 1) - x`.
    pub fn mirrored(&self) -> Trajectory {
        let w = self.frame.width;
        let observations = self
            .observations
            .iter()
            .map(|o| BallObservation {
                position: o.position.map(|p| Point::new(mirror_x(p.x, w), p.y)),
                ..*o
            })
            .collect();
        Trajectory {
            observations,
            frame: self.frame,
        }
    }

    /// Writes the canonical CSV form (coordinates with 3 decimals).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", CSV_HEADER.join(","))?;
        for o in &self.observations {
            match o.position {
                Some(p) => writeln!(out, "{},{:.3},{:.3},1", o.frame_index, p.x, p.y)?,
                None => writeln!(out, "{},,,0", o.frame_index)?,
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }
}

/// `x -> (width - 1) - x`, the pixel-space reflection used for direction normalization.
pub fn mirror_x(x: f64, width: f64) -> f64 {
    (width - 1.0) - x
}

/// Parses a trajectory CSV (`frame,x,y,detected`). Every diagnostic names the
/// 1-based line number of the offending row.
pub fn load_trajectory<R: Read>(source: R, frame: FrameSpec) -> Result<Trajectory, TrajectoryError> {
    frame.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(TrajectoryError::Empty),
        Some(r) => r.map_err(|e| csv_error(e, 1))?,
    };
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(TrajectoryError::BadHeader { line: 1 });
    }

    let mut observations = Vec::new();
    let mut previous: Option<u64> = None;
    for record in records {
        let record = record.map_err(|e| csv_error(e, 0))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 4 {
            return Err(TrajectoryError::Malformed {
                line,
                reason: format!("expected 4 fields, found {}", record.len()),
            });
        }
        let frame_index: u64 = record[0].parse().map_err(|_| TrajectoryError::Malformed {
            line,
            reason: format!("frame index `{}` is not a non-negative integer", &record[0]),
        })?;
        if let Some(prev) = previous {
            if frame_index <= prev {
                return Err(TrajectoryError::NonMonotonic {
                    line,
                    frame: frame_index,
                    previous: prev,
                });
            }
        }
        previous = Some(frame_index);

        let position = match &record[3] {
            "1" => {
                let coord = |s: &str, name: &str| -> Result<f64, TrajectoryError> {
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| TrajectoryError::Malformed {
                            line,
                            reason: format!("{name} `{s}` is not a number"),
                        })
                };
                let p = Point::new(coord(&record[1], "x")?, coord(&record[2], "y")?);
                if !frame.contains(p) {
                    return Err(TrajectoryError::OutOfBounds {
                        line,
                        x: p.x,
                        y: p.y,
                        width: frame.width,
                        height: frame.height,
                    });
                }
                Some(p)
            }
            "0" => None,
            other => {
                return Err(TrajectoryError::Malformed {
                    line,
                    reason: format!("detected flag `{other}` must be 0 or 1"),
                })
            }
        };
        observations.push(BallObservation {
            frame_index,
            t: frame.time_of(frame_index),
            position,
        });
    }
    if observations.is_empty() {
        return Err(TrajectoryError::Empty);
    }
    Ok(Trajectory { observations, frame })
}

fn csv_error(e: csv::Error, fallback_line: u64) -> TrajectoryError {
    let line = e.position().map(|p| p.line()).unwrap_or(fallback_line);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => TrajectoryError::Io(io.to_string()),
        other => TrajectoryError::Malformed {
            line,
            reason: format!("{other:?}"),
        },
    }
}

/// Keeps only frames where the ball was detected. Timestamps keep their
/// original values, so the result may be non-uniformly spaced in time.
pub fn drop_missing(traj: &Trajectory) -> Result<Trajectory, TrajectoryError> {
    let observations: Vec<_> = traj
        .observations
        .iter()
        .filter(|o| o.detected())
        .copied()
        .collect();
    if observations.len() < 2 {
        return Err(TrajectoryError::InsufficientData(observations.len()));
    }
    Ok(Trajectory {
        observations,
        frame: traj.frame,
    })
}
