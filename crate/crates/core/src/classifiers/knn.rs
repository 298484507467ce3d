use serde::{Deserialize, Serialize};

use super::ClassifierError;
use crate::recognition::{flatten, StrokeLabel, StrokeSample, FEATURES};

pub const DEFAULT_K: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnEntry {
    pub features: Vec<f64>,
    pub label: StrokeLabel,
}

/// Nearest-neighbour classifier over flattened 400-feature samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub store: Vec<KnnEntry>,
}

impl KnnModel {
    pub fn new(k: usize, store: Vec<KnnEntry>) -> Result<Self, ClassifierError> {
        let m = Self { k, store };
        m.validate()?;
        Ok(m)
    }

    /// Stores every labelled sample verbatim.
    pub fn fit(k: usize, samples: &[StrokeSample]) -> Result<Self, ClassifierError> {
        let store = samples
            .iter()
            .map(|s| {
                let label = s.label.ok_or_else(|| ClassifierError::Unlabeled(s.source_id.clone()))?;
                Ok(KnnEntry { features: flatten(s), label })
            })
            .collect::<Result<Vec<_>, ClassifierError>>()?;
        Self::new(k, store)
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        if self.k == 0 || self.k > self.store.len() {
            return Err(ClassifierError::InvalidK { k: self.k, store: self.store.len() });
        }
        if let Some(e) = self.store.iter().find(|e| e.features.len() != FEATURES) {
            return Err(ClassifierError::FeatureLength(e.features.len()));
        }
        Ok(())
    }

    pub fn predict(&self, sample: &StrokeSample) -> Result<StrokeLabel, ClassifierError> {
        knn_classify(self, &flatten(sample)).map(|(label, _)| label)
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Majority vote of the `k` nearest stored samples, with per-label vote counts.
pub fn knn_classify(model: &KnnModel, features: &[f64]) -> Result<(StrokeLabel, [usize; StrokeLabel::COUNT]), ClassifierError> {
    model.validate()?;
    if features.len() != FEATURES {
        return Err(ClassifierError::FeatureLength(features.len()));
    }
    let mut dist: Vec<(f64, usize)> = model
        .store
        .iter()
        .enumerate()
        .map(|(i, e)| (squared_distance(&e.features, features).sqrt(), i))
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut votes = [0usize; StrokeLabel::COUNT];
    let mut summed = [0.0f64; StrokeLabel::COUNT];
    for &(d, i) in &dist[..model.k] {
        let l = model.store[i].label.index();
        votes[l] += 1;
        summed[l] += d;
    }
    let best = (0..StrokeLabel::COUNT)
        .filter(|&l| votes[l] > 0)
        .min_by(|&a, &b| votes[b].cmp(&votes[a]).then(summed[a].total_cmp(&summed[b])).then(a.cmp(&b)))
        .expect("k >= 1");
    Ok((StrokeLabel::ALL[best], votes))
}
