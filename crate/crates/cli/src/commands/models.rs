use std::fs::File;

use serde_json::json;
use strokelab_core::classifiers::{report_from_predictions, Classifier, ClassifierError, EvalReport};
use strokelab_core::recognition::{StrokeLabel, StrokeSample};

use super::{path_str, read_samples};
use crate::io::{ensure_distinct, write_json};
use crate::{ClassifyArgs, CliError, EvalModelArgs};

pub fn load_model(path: &std::path::Path) -> Result<Classifier, CliError> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("model `{}`: {e}", path.display())))?;
    Classifier::read(file).map_err(|e| match CliError::from(e) {
        CliError::Format(m) => CliError::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Accuracy and confusion matrix of `model` over labelled `samples`.
pub fn score(model: &Classifier, samples: &[StrokeSample]) -> Result<EvalReport, CliError> {
    let truth: Vec<StrokeLabel> = samples
        .iter()
        .map(|s| s.label.ok_or_else(|| ClassifierError::Unlabeled(s.source_id.clone())))
        .collect::<Result<_, _>>()?;
    let predicted = model.predict_batch(samples)?;
    Ok(report_from_predictions(&truth, &predicted)?)
}

pub fn classify(a: ClassifyArgs) -> Result<String, CliError> {
    ensure_distinct(&[&a.out], &[&a.model, &a.input])?;
    let model = load_model(&a.model)?;
    let samples = read_samples(&a.input)?;
    let predicted = model.predict_batch(&samples)?;
    let rows: Vec<_> = samples
        .iter()
        .zip(&predicted)
        .map(|(s, p)| json!({ "source_id": s.source_id, "label": p }))
        .collect();
    write_json(
        &a.out,
        &json!({
            "config": { "model": path_str(&a.model), "input": path_str(&a.input), "kind": model.kind_name() },
            "predictions": rows,
        }),
    )?;
    Ok(format!("classify: {} samples labelled by {} model, written to {}", rows.len(), model.kind_name(), a.out.display()))
}

pub fn eval_model(a: EvalModelArgs) -> Result<String, CliError> {
    ensure_distinct(&[&a.out], &[&a.model, &a.input])?;
    let model = load_model(&a.model)?;
    let samples = read_samples(&a.input)?;
    let report = score(&model, &samples)?;
    let normalized: Vec<Vec<f64>> = report
        .confusion
        .iter()
        .map(|row| {
            let n: usize = row.iter().sum();
            row.iter().map(|&c| if n == 0 { 0.0 } else { round4(c as f64 / n as f64) }).collect()
        })
        .collect();
    write_json(
        &a.out,
        &json!({
            "config": { "model": path_str(&a.model), "input": path_str(&a.input), "kind": model.kind_name() },
            "accuracy": report.accuracy,
            "total": report.total,
            "labels": StrokeLabel::ALL,
            "confusion": report.confusion,
            "confusion_normalized": normalized,
        }),
    )?;
    Ok(format!(
        "eval-model: {} accuracy {:.4} on {} samples, written to {}",
        model.kind_name(),
        report.accuracy,
        report.total,
        a.out.display()
    ))
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}
