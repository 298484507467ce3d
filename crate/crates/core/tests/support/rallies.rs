//! Seeded synthetic rallies covering every outcome.

#![allow(dead_code)]

use strokelab_core::annotation::StrokeAnnotation;
use strokelab_core::segment::{detect_strokes, SegmenterConfig, StrokeSegment};
use strokelab_core::synth::{parse_rally_plan, Generator};
use strokelab_core::trajectory::{drop_missing, Trajectory};

/// Plan shape cycles through missed-net, missed-out, open-ended and serve-only
/// rallies with 0-4 valid returns.
pub fn rally(seed: u64) -> (Trajectory, StrokeAnnotation) {
    let g = Generator::default();
    let n = seed % 5;
    let plan = match seed % 4 {
        0 => format!("serve,valid*{n},missed_net"),
        1 => format!("serve,valid*{n},missed_out"),
        2 => format!("serve,valid*{n}"),
        _ => "serve".to_string(),
    };
    let steps = g.plan(&parse_rally_plan(&plan).unwrap(), seed).unwrap();
    g.rally(&steps, seed).unwrap()
}

pub fn detect(traj: &Trajectory) -> Vec<StrokeSegment> {
    detect_strokes(&drop_missing(traj).unwrap(), &SegmenterConfig::default()).unwrap()
}
