use serde::Serialize;
use serde_json::json;
use strokelab_core::classifiers::{
    default_fcnn, default_tcn, nn_train, Classifier, EpochLog, KnnModel, TrainConfig, DEFAULT_K,
};
use strokelab_core::recognition::{split_dataset, PadMode, StrokeSample};

use super::models::score;
use super::{frame_spec, path_str, read_samples};
use crate::config::ConfigFile;
use crate::io::{ensure_distinct, write_atomic, write_json};
use crate::{Arch, CliError, TrainArgs};

pub const DEFAULT_EPOCHS: usize = 30;
pub const DEFAULT_LR: f64 = 0.05;
pub const DEFAULT_BATCH: usize = 8;

const REFERENCE_NOTE: &str = "Reference result: models trained on pre-padded inputs generalized better than \
                              models trained on post-padded inputs.";

#[derive(Debug, Serialize)]
struct Row {
    model: Arch,
    pad: PadMode,
    train: f64,
    validation: f64,
    test: Option<f64>,
}

pub fn run(a: TrainArgs, cfg: &ConfigFile) -> Result<String, CliError> {
    let mut inputs = vec![a.input.as_path()];
    inputs.extend(a.test.as_deref());
    let mut outputs = vec![a.model.as_path()];
    outputs.extend(a.report.as_deref());
    ensure_distinct(&outputs, &inputs)?;
    if a.report.as_ref() == Some(&a.model) {
        return Err(CliError::Usage("--model and --report must be different files".into()));
    }

    let frame = frame_spec(cfg)?;
    let arch = cfg.pick(a.arch, "arch", Arch::Tcn)?;
    let seed = cfg.pick(a.seed, "seed", 0u64)?;
    let keep = cfg.pick(a.pad, "pad", PadMode::Pre)?;
    let k = cfg.pick(a.k, "k", DEFAULT_K)?;
    let train_cfg = TrainConfig {
        learning_rate: cfg.pick(a.lr, "lr", DEFAULT_LR)?,
        epochs: cfg.pick(a.epochs, "epochs", DEFAULT_EPOCHS)?,
        batch_size: cfg.pick(a.batch, "batch", DEFAULT_BATCH)?,
        seed,
        input_scaling: [1.0 / frame.width, 1.0 / frame.height],
    };
    if arch != Arch::Knn {
        train_cfg.validate()?;
    }

    let data = read_samples(&a.input)?;
    let test = a.test.as_deref().map(read_samples).transpose()?;

    let mut rows = Vec::new();
    let mut logs = serde_json::Map::new();
    let mut kept = None;
    for pad in [PadMode::Pre, PadMode::Post] {
        let all: Vec<StrokeSample> = data.iter().map(|s| s.repadded(pad)).collect();
        let split = split_dataset(&all, seed)?;
        let (model, log) = fit(arch, k, &split.train, &split.validation, &train_cfg)?;
        let accuracy = |set: &[StrokeSample]| score(&model, set).map(|r| r.accuracy);
        let test_acc = match &test {
            Some(t) => Some(accuracy(&t.iter().map(|s| s.repadded(pad)).collect::<Vec<_>>())?),
            None => None,
        };
        rows.push(Row {
            model: arch,
            pad,
            train: accuracy(&split.train)?,
            validation: accuracy(&split.validation)?,
            test: test_acc,
        });
        if let Some(log) = log {
            logs.insert(pad.name().to_string(), serde_json::to_value(log).expect("epoch log serializes"));
        }
        if pad == keep {
            kept = Some(model);
        }
    }

    let model = kept.expect("both pad modes trained");
    write_atomic(&a.model, model.to_json()?.as_bytes())?;
    if let Some(path) = &a.report {
        let report = json!({
            "config": {
                "input": path_str(&a.input),
                "test": a.test.as_deref().map(path_str),
                "arch": arch,
                "seed": seed,
                "k": if arch == Arch::Knn { Some(k) } else { None },
                "training": if arch == Arch::Knn { None } else { Some(train_cfg) },
                "saved_pad": keep,
            },
            "results": rows,
            "epochs": logs,
            "footer": REFERENCE_NOTE,
        });
        write_json(path, &report)?;
    }

    let row = rows.iter().find(|r| r.pad == keep).expect("kept row");
    let test = row.test.map(|t| format!(", test {t:.4}")).unwrap_or_default();
    Ok(format!(
        "train: {} ({}-padded) validation accuracy {:.4}{test}; model written to {}",
        model.kind_name(),
        keep.name(),
        row.validation,
        a.model.display()
    ))
}

fn fit(
    arch: Arch,
    k: usize,
    train: &[StrokeSample],
    validation: &[StrokeSample],
    cfg: &TrainConfig,
) -> Result<(Classifier, Option<Vec<EpochLog>>), CliError> {
    Ok(match arch {
        Arch::Knn => (Classifier::Knn(KnnModel::fit(k, train)?), None),
        Arch::Tcn | Arch::Fcnn => {
            let layers = if arch == Arch::Tcn { default_tcn() } else { default_fcnn() };
            let (m, log) = nn_train(&layers, train, validation, cfg)?;
            (Classifier::Neural(m), Some(log))
        }
    })
}
