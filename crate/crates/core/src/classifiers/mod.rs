//! Stroke-type classifiers and their evaluation.

pub mod knn;
pub mod nn;
pub mod train;

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::recognition::{StrokeLabel, StrokeSample};

pub use knn::{knn_classify, KnnEntry, KnnModel, DEFAULT_K};
pub use nn::{
    count_params, default_fcnn, default_tcn, loss_and_gradient, mean_loss, nn_forward, softmax, Activation, LayerSpec, ModelDescriptor,
    ModelKind, NnError,
};
pub use train::{nn_train, EpochLog, TrainConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("k = {k} must be between 1 and the store size {store}")]
    InvalidK { k: usize, store: usize },
    #[error("feature vector has length {0}, expected 400")]
    FeatureLength(usize),
    #[error("sample `{0}` has no label")]
    Unlabeled(String),
    #[error("empty dataset")]
    Empty,
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("training diverged (non-finite loss) at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("model file: {0}")]
    ModelFile(String),
}

/// A trained classifier of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Knn(KnnModel),
    Neural(ModelDescriptor),
}

#[derive(Serialize, Deserialize)]
struct KnnFile {
    schema_version: u32,
    kind: String,
    k: usize,
    store: Vec<KnnEntry>,
}

#[derive(Deserialize)]
struct KindProbe {
    schema_version: u32,
    kind: String,
}

impl Classifier {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Knn(_) => "knn",
            Self::Neural(m) => match m.kind {
                ModelKind::Tcn => "tcn",
                ModelKind::Fcnn => "fcnn",
            },
        }
    }

    pub fn predict(&self, sample: &StrokeSample) -> Result<StrokeLabel, ClassifierError> {
        match self {
            Self::Knn(m) => m.predict(sample),
            Self::Neural(m) => Ok(StrokeLabel::ALL[nn::argmax(&nn_forward(m, sample)?)]),
        }
    }

    /// Predictions for many samples, computed in parallel, in input order.
    pub fn predict_batch(&self, samples: &[StrokeSample]) -> Result<Vec<StrokeLabel>, ClassifierError> {
        match self {
            Self::Knn(m) => {
                m.validate()?;
                samples.par_iter().map(|s| m.predict(s)).collect()
            }
            Self::Neural(m) => predict_nn_batch(m, samples),
        }
    }

    pub fn to_json(&self) -> Result<String, ClassifierError> {
        let text = match self {
            Self::Knn(m) => serde_json::to_string(&KnnFile {
                schema_version: nn::SCHEMA_VERSION,
                kind: "knn".into(),
                k: m.k,
                store: m.store.clone(),
            }),
            Self::Neural(m) => serde_json::to_string(m),
        };
        text.map_err(|e| ClassifierError::ModelFile(e.to_string()))
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<(), ClassifierError> {
        let text = self.to_json()?;
        out.write_all(text.as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|e| ClassifierError::ModelFile(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifierError> {
        let err = |e: serde_json::Error| ClassifierError::ModelFile(e.to_string());
        let probe: KindProbe = serde_json::from_str(text).map_err(err)?;
        if probe.schema_version != nn::SCHEMA_VERSION {
            return Err(NnError::Schema(probe.schema_version).into());
        }
        match probe.kind.as_str() {
            "knn" => {
                let f: KnnFile = serde_json::from_str(text).map_err(err)?;
                Ok(Self::Knn(KnnModel::new(f.k, f.store)?))
            }
            "tcn" | "fcnn" => {
                let m: ModelDescriptor = serde_json::from_str(text).map_err(err)?;
                m.validate()?;
                Ok(Self::Neural(m))
            }
            other => Err(ClassifierError::ModelFile(format!("unknown model kind `{other}`"))),
        }
    }

    pub fn read<R: Read>(mut input: R) -> Result<Self, ClassifierError> {
        let mut text = String::new();
        input.read_to_string(&mut text).map_err(|e| ClassifierError::ModelFile(e.to_string()))?;
        Self::from_json(&text)
    }
}

pub(crate) fn predict_nn_batch(model: &ModelDescriptor, samples: &[StrokeSample]) -> Result<Vec<StrokeLabel>, ClassifierError> {
    model.validate()?;
    samples
        .par_iter()
        .map(|s| Ok(StrokeLabel::ALL[nn::argmax(&nn::forward_unchecked(model, s)?)]))
        .collect()
}

/// Accuracy and confusion matrix (rows = true label, columns = predicted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub total: usize,
    pub confusion: [[usize; StrokeLabel::COUNT]; StrokeLabel::COUNT],
}

pub fn evaluate_model<F>(mut predict: F, samples: &[StrokeSample]) -> Result<EvalReport, ClassifierError>
where
    F: FnMut(&StrokeSample) -> StrokeLabel,
{
    let truth: Vec<StrokeLabel> = samples
        .iter()
        .map(|s| s.label.ok_or_else(|| ClassifierError::Unlabeled(s.source_id.clone())))
        .collect::<Result<_, _>>()?;
    let predicted: Vec<StrokeLabel> = samples.iter().map(&mut predict).collect();
    report_from_predictions(&truth, &predicted)
}

pub fn report_from_predictions(truth: &[StrokeLabel], predicted: &[StrokeLabel]) -> Result<EvalReport, ClassifierError> {
    if truth.is_empty() {
        return Err(ClassifierError::Empty);
    }
    let mut confusion = [[0usize; StrokeLabel::COUNT]; StrokeLabel::COUNT];
    for (t, p) in truth.iter().zip(predicted) {
        confusion[t.index()][p.index()] += 1;
    }
    let hits: usize = (0..StrokeLabel::COUNT).map(|i| confusion[i][i]).sum();
    Ok(EvalReport { accuracy: hits as f64 / truth.len() as f64, total: truth.len(), confusion })
}
