use std::collections::BTreeMap;

use serde_json::json;
use strokelab_core::annotation::StrokeAnnotation;
use strokelab_core::homography::{CorrespondenceFile, Homography};
use strokelab_core::segment::{detect_strokes, SegmenterConfig};
use strokelab_core::trajectory::drop_missing;

use super::{frame_spec, path_str, read_json, read_trajectory};
use crate::config::ConfigFile;
use crate::io::{ensure_distinct, write_json};
use crate::{CliError, SegmentArgs};

pub fn run(a: SegmentArgs, cfg: &ConfigFile) -> Result<String, CliError> {
    let mut inputs = vec![a.input.as_path()];
    inputs.extend(a.homography.as_deref());
    ensure_distinct(&[&a.out], &inputs)?;

    let frame = frame_spec(cfg)?;
    let d = SegmenterConfig::for_frame(frame);
    let seg_cfg = SegmenterConfig {
        boundary_window: cfg.pick(None, "boundary_window", d.boundary_window)?,
        pitch_window: cfg.pick(None, "pitch_window", d.pitch_window)?,
        boundary_margin: cfg.pick(None, "boundary_margin", d.boundary_margin)?,
        net_x: cfg.pick(a.net_x, "net_x", d.net_x)?,
        min_x_travel: cfg.pick(None, "min_x_travel", d.min_x_travel)?,
        min_stroke_duration: cfg.pick(None, "min_stroke_duration", d.min_stroke_duration)?,
        pitch_min_prominence: cfg.pick(None, "pitch_min_prominence", d.pitch_min_prominence)?,
    };
    seg_cfg.validate(frame)?;

    let homography = match &a.homography {
        Some(p) => {
            let file: CorrespondenceFile = read_json(p)?;
            Some(Homography::fit(&file.correspondences)?)
        }
        None => None,
    };

    let traj = drop_missing(&read_trajectory(&a.input, frame)?)?;
    let segments = detect_strokes(&traj, &seg_cfg)?;
    let mut ann = StrokeAnnotation::from_segments(frame.fps, &segments, homography.as_ref())?;
    ann.config = Some(json!({
        "input": path_str(&a.input),
        "fps": frame.fps,
        "width": frame.width,
        "height": frame.height,
        "segmenter": seg_cfg,
        "homography": homography.map(|h| h.matrix()),
    }));
    write_json(&a.out, &ann)?;

    let mut by_outcome: BTreeMap<String, usize> = BTreeMap::new();
    for s in &ann.strokes {
        let name = serde_json::to_value(s.outcome).ok().and_then(|v| v.as_str().map(str::to_string));
        *by_outcome.entry(name.unwrap_or_default()).or_default() += 1;
    }
    let counts: Vec<String> = by_outcome.iter().map(|(k, v)| format!("{k}={v}")).collect();
    Ok(format!("segment: {} strokes ({}) written to {}", ann.strokes.len(), counts.join(", "), a.out.display()))
}
