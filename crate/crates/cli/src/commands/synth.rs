use serde_json::json;
use strokelab_core::recognition::{write_dataset, PadMode};
use strokelab_core::synth::{degrade, parse_rally_plan, CameraModel, Generator, PhysicsParams, TemplateSet};

use super::frame_spec;
use crate::config::ConfigFile;
use crate::io::{write_atomic, write_json};
use crate::{CliError, SynthArgs};

pub fn run(a: SynthArgs, cfg: &ConfigFile) -> Result<String, CliError> {
    if a.ann.as_ref() == Some(&a.out) {
        return Err(CliError::Usage("--out and --ann must be different files".into()));
    }
    let frame = frame_spec(cfg)?;
    let seed = cfg.pick(a.seed, "seed", 0u64)?;
    let camera = CameraModel { width: frame.width, height: frame.height, fps: frame.fps, ..CameraModel::default() };
    let generator = Generator::new(PhysicsParams::default(), camera, TemplateSet::builtin())?;

    if let Some(count) = cfg.pick_opt(a.dataset, "dataset")? {
        if a.ann.is_some() {
            return Err(CliError::Usage("--ann cannot be combined with --dataset".into()));
        }
        if count == 0 {
            return Err(CliError::Usage("--dataset must be at least 1".into()));
        }
        let pad = cfg.pick(a.pad, "pad", PadMode::Pre)?;
        let samples = generator.labeled_samples(count, seed, pad)?;
        let mut buf = Vec::new();
        write_dataset(&samples, &mut buf)?;
        write_atomic(&a.out, &buf)?;
        return Ok(format!("synth: wrote {count} {}-padded samples to {} (seed {seed})", pad.name(), a.out.display()));
    }

    let rally = cfg.pick(a.rally, "rally", "serve,valid*5".to_string())?;
    let dropout = cfg.pick(a.dropout, "dropout", 0.0)?;
    let jitter = cfg.pick(a.jitter, "jitter", 0.0)?;
    let steps = generator.plan(&parse_rally_plan(&rally)?, seed)?;
    let (clean, mut ann) = generator.rally(&steps, seed)?;
    let traj = if dropout > 0.0 || jitter > 0.0 { degrade(&clean, dropout, jitter, seed)? } else { clean };

    write_atomic(&a.out, traj.to_csv_string().as_bytes())?;
    if let Some(path) = &a.ann {
        ann.config = Some(json!({
            "rally": rally,
            "seed": seed,
            "dropout": dropout,
            "jitter": jitter,
            "fps": frame.fps,
            "width": frame.width,
            "height": frame.height,
        }));
        write_json(path, &ann)?;
    }
    Ok(format!(
        "synth: {} strokes, {} frames written to {} (seed {seed})",
        ann.strokes.len(),
        traj.len(),
        a.out.display()
    ))
}
