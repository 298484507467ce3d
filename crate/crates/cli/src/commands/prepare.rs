use std::collections::HashSet;

use strokelab_core::annotation::{StrokeAnnotation, StrokeRecord};
use strokelab_core::extrema::ExtremumKind;
use strokelab_core::recognition::{prepare_sample, write_dataset, PadMode, RecognitionError, StrokeSample};
use strokelab_core::segment::{ExtremumEvent, StrokeSegment};
use strokelab_core::trajectory::{drop_missing, Trajectory};

use super::{frame_spec, read_json, read_trajectory};
use crate::config::ConfigFile;
use crate::io::{ensure_distinct, write_atomic};
use crate::{CliError, PrepareArgs};

pub fn run(a: PrepareArgs, cfg: &ConfigFile) -> Result<String, CliError> {
    if a.input.len() != a.ann.len() {
        return Err(CliError::Usage(format!(
            "got {} --input and {} --ann; they must be given in pairs",
            a.input.len(),
            a.ann.len()
        )));
    }
    let inputs: Vec<&std::path::Path> = a.input.iter().chain(&a.ann).map(|p| p.as_path()).collect();
    ensure_distinct(&[&a.out], &inputs)?;
    let frame = frame_spec(cfg)?;
    let pad = cfg.pick(a.pad, "pad", PadMode::Pre)?;

    let mut samples = Vec::new();
    let mut skipped = 0;
    let mut seen = HashSet::new();
    for (traj_path, ann_path) in a.input.iter().zip(&a.ann) {
        let traj = drop_missing(&read_trajectory(traj_path, frame)?)?;
        let ann: StrokeAnnotation = read_json(ann_path)?;
        let stem = traj_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        for record in &ann.strokes {
            let segment = record_segment(record, &traj);
            let mut sample = match prepare_sample(&traj, &segment, pad, frame.width) {
                Ok(s) => s,
                Err(RecognitionError::TooShort(_)) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            sample.label = record.label;
            sample.source_id = unique_id(&mut seen, format!("{stem}:{}-{}", record.start_frame, record.end_frame));
            samples.push(sample);
        }
    }
    let labelled = samples.iter().filter(|s: &&StrokeSample| s.label.is_some()).count();
    let mut buf = Vec::new();
    write_dataset(&samples, &mut buf)?;
    write_atomic(&a.out, &buf)?;
    Ok(format!(
        "prepare: {} samples ({labelled} labelled, {skipped} too short skipped) written to {}",
        samples.len(),
        a.out.display()
    ))
}

/// Rebuilds the time span of an annotated stroke on `traj`.
fn record_segment(record: &StrokeRecord, traj: &Trajectory) -> StrokeSegment {
    let event = |frame_index: u64, kind| ExtremumEvent { t: traj.frame().time_of(frame_index), frame_index, value: 0.0, kind };
    StrokeSegment {
        start: event(record.start_frame, ExtremumKind::Minimum),
        end: event(record.end_frame, ExtremumKind::Maximum),
        direction: record.direction,
        pitches: Vec::new(),
        outcome: Some(record.outcome),
        note: None,
        rejected_pitches: Vec::new(),
    }
}

fn unique_id(seen: &mut HashSet<String>, base: String) -> String {
    let mut id = base.clone();
    let mut n = 1;
    while !seen.insert(id.clone()) {
        n += 1;
        id = format!("{base}#{n}");
    }
    id
}
