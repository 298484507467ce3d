use rand::distr::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nn::{accumulate_gradient, check_architecture, LayerSpec, ModelDescriptor};
use super::{predict_nn_batch, ClassifierError};
use crate::recognition::{StrokeLabel, StrokeSample};

/// Samples per gradient work unit; partial sums are reduced in chunk order so
/// results do not depend on the thread count.
const GRAD_CHUNK: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub input_scaling: [f64; 2],
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            epochs: 30,
            batch_size: 16,
            seed: 0,
            input_scaling: [1.0 / 1920.0, 1.0 / 1080.0],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |m: &str| Err(ClassifierError::InvalidConfig(m.to_string()));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !self.input_scaling.iter().all(|s| s.is_finite() && *s > 0.0) {
            return bad("input_scaling must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub validation_accuracy: f64,
}

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
pub fn init_weights(architecture: &[LayerSpec], rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    architecture
        .iter()
        .map(|spec| {
            let mut w = vec![0.0; spec.param_count()];
            if spec.weight_count() > 0 {
                let bound = 1.0 / (spec.fan_in() as f64).sqrt();
                let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
                for v in &mut w[..spec.weight_count()] {
                    *v = dist.sample(rng);
                }
            }
            w
        })
        .collect()
}

fn labels(samples: &[StrokeSample]) -> Result<Vec<StrokeLabel>, ClassifierError> {
    samples
        .iter()
        .map(|s| s.label.ok_or_else(|| ClassifierError::Unlabeled(s.source_id.clone())))
        .collect()
}

struct BatchResult {
    loss: f64,
    correct: usize,
    grads: Vec<Vec<f64>>,
}

fn batch_gradient(
    model: &ModelDescriptor,
    samples: &[StrokeSample],
    labels: &[StrokeLabel],
    batch: &[usize],
) -> Result<BatchResult, ClassifierError> {
    let partials: Vec<Result<BatchResult, ClassifierError>> = batch
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| {
            let mut grads: Vec<Vec<f64>> = model.weights.iter().map(|w| vec![0.0; w.len()]).collect();
            let (mut loss, mut correct) = (0.0, 0);
            for &i in chunk {
                let (l, ok) = accumulate_gradient(model, &samples[i], labels[i], &mut grads)?;
                loss += l;
                correct += usize::from(ok);
            }
            Ok(BatchResult { loss, correct, grads })
        })
        .collect();
    let mut it = partials.into_iter();
    let mut acc = it.next().expect("non-empty batch")?;
    for p in it {
        let p = p?;
        acc.loss += p.loss;
        acc.correct += p.correct;
        for (a, b) in acc.grads.iter_mut().zip(&p.grads) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
    Ok(acc)
}

fn accuracy(model: &ModelDescriptor, samples: &[StrokeSample], labels: &[StrokeLabel]) -> Result<f64, ClassifierError> {
    let pred = predict_nn_batch(model, samples)?;
    let hits = pred.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / samples.len() as f64)
}

/// Mini-batch gradient descent on mean cross-entropy. Returns the weights of
/// the epoch with the best validation accuracy (earliest on ties) and the
/// per-epoch log.
pub fn nn_train(
    architecture: &[LayerSpec],
    train: &[StrokeSample],
    validation: &[StrokeSample],
    cfg: &TrainConfig,
) -> Result<(ModelDescriptor, Vec<EpochLog>), ClassifierError> {
    cfg.validate()?;
    if train.is_empty() || validation.is_empty() {
        return Err(ClassifierError::Empty);
    }
    check_architecture(architecture)?;
    let train_labels = labels(train)?;
    let val_labels = labels(validation)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let weights = init_weights(architecture, &mut rng);
    let mut model = ModelDescriptor::new(architecture.to_vec(), weights, cfg.input_scaling, cfg.seed)?;
    for s in train.iter().chain(validation) {
        super::nn::input_tensor(s, cfg.input_scaling)?;
    }

    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    let mut log = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut correct) = (0.0, 0);
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let r = batch_gradient(&model, train, &train_labels, batch)?;
            if !r.loss.is_finite() || r.grads.iter().flatten().any(|g| !g.is_finite()) {
                return Err(ClassifierError::Diverged { epoch, batch: b });
            }
            let step = cfg.learning_rate / batch.len() as f64;
            for (w, g) in model.weights.iter_mut().zip(&r.grads) {
                for (wv, gv) in w.iter_mut().zip(g) {
                    *wv -= step * gv;
                }
            }
            loss_sum += r.loss;
            correct += r.correct;
        }
        let validation_accuracy = accuracy(&model, validation, &val_labels)?;
        log.push(EpochLog {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            train_accuracy: correct as f64 / train.len() as f64,
            validation_accuracy,
        });
        if best.as_ref().is_none_or(|(a, _)| validation_accuracy > *a) {
            best = Some((validation_accuracy, model.weights.clone()));
        }
    }
    model.weights = best.expect("epochs > 0").1;
    Ok((model, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::nn::{default_fcnn, Activation};
    use crate::recognition::PadMode;

    fn toy(n: usize) -> Vec<StrokeSample> {
        (0..n)
            .map(|i| {
                let (label, y) = if i % 2 == 0 { (StrokeLabel::Push, 200.0) } else { (StrokeLabel::Flat, 800.0) };
                let rows: Vec<[f64; 2]> = (0..60).map(|t| [100.0 + t as f64 * 10.0, y + (i % 7) as f64]).collect();
                StrokeSample::from_rows(&rows, PadMode::Pre, Some(label), format!("s{i}"))
            })
            .collect()
    }

    #[test]
    fn same_seed_same_weights() {
        let arch = vec![
            LayerSpec::Flatten,
            LayerSpec::dense(400, 8, Activation::Relu),
            LayerSpec::dense(8, 6, Activation::Softmax),
        ];
        let cfg = TrainConfig { learning_rate: 0.05, epochs: 3, batch_size: 5, ..TrainConfig::default() };
        let data = toy(20);
        let a = nn_train(&arch, &data, &data[..4], &cfg).unwrap();
        let b = nn_train(&arch, &data, &data[..4], &cfg).unwrap();
        assert_eq!(a, b);
        let c = nn_train(&arch, &data, &data[..4], &TrainConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a.0.weights, c.0.weights);
    }

    #[test]
    fn divergence_reports_epoch_and_batch() {
        let cfg = TrainConfig { learning_rate: 1e300, epochs: 5, batch_size: 4, ..TrainConfig::default() };
        let data = toy(12);
        let err = nn_train(&default_fcnn(), &data, &data, &cfg).unwrap_err();
        assert!(matches!(err, ClassifierError::Diverged { .. }), "{err:?}");
    }

    #[test]
    fn config_and_data_errors() {
        let data = toy(4);
        let zero_epochs = TrainConfig { epochs: 0, ..TrainConfig::default() };
        assert!(matches!(nn_train(&default_fcnn(), &data, &data, &zero_epochs), Err(ClassifierError::InvalidConfig(_))));
        assert!(matches!(nn_train(&default_fcnn(), &data, &[], &TrainConfig::default()), Err(ClassifierError::Empty)));
    }
}
