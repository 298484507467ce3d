pub mod models;
pub mod prepare;
pub mod report;
pub mod segment;
pub mod synth;
pub mod tracker;
pub mod train;

use std::path::Path;

use strokelab_core::recognition::{read_dataset, StrokeSample};
use strokelab_core::trajectory::{load_trajectory, FrameSpec, Trajectory};

use crate::config::ConfigFile;
use crate::io::read_text;
use crate::CliError;

pub fn frame_spec(cfg: &ConfigFile) -> Result<FrameSpec, CliError> {
    let fps = cfg.pick(None, "fps", 120.0)?;
    let width = cfg.pick(None, "width", 1920.0)?;
    let height = cfg.pick(None, "height", 1080.0)?;
    Ok(FrameSpec::new(fps, width, height)?)
}

pub fn read_trajectory(path: &Path, frame: FrameSpec) -> Result<Trajectory, CliError> {
    let text = read_text(path)?;
    load_trajectory(text.as_bytes(), frame).map_err(|e| with_path(path, e.into()))
}

pub fn read_samples(path: &Path) -> Result<Vec<StrokeSample>, CliError> {
    let text = read_text(path)?;
    read_dataset(text.as_bytes()).map_err(|e| with_path(path, e.into()))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
}

fn with_path(path: &Path, e: CliError) -> CliError {
    let p = path.display();
    match e {
        CliError::Format(m) => CliError::Format(format!("{p}: {m}")),
        CliError::Domain(m) => CliError::Domain(format!("{p}: {m}")),
        other => other,
    }
}

pub fn path_str(p: &Path) -> String {
    p.display().to_string()
}
