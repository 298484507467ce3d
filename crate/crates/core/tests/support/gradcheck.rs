//! Finite-difference gradient checking for the neural layers.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strokelab_core::classifiers::train::init_weights;
use strokelab_core::classifiers::*;
use strokelab_core::recognition::{PadMode, StrokeLabel, StrokeSample};

pub const EPS: f64 = 1e-4;

fn random_batch(rng: &mut ChaCha8Rng, n: usize) -> Vec<StrokeSample> {
    (0..n)
        .map(|i| {
            let len = rng.random_range(20..200);
            let rows: Vec<[f64; 2]> =
                (0..len).map(|_| [rng.random_range(1.0..1919.0), rng.random_range(1.0..1079.0)]).collect();
            let label = StrokeLabel::ALL[rng.random_range(0..6)];
            StrokeSample::from_rows(&rows, PadMode::Pre, Some(label), format!("g{i}"))
        })
        .collect()
}

pub fn conv_net() -> Vec<LayerSpec> {
    vec![
        LayerSpec::conv(2, 3, 3, 2, 1),
        LayerSpec::conv(3, 4, 3, 1, 2),
        LayerSpec::GlobalAvgPool,
        LayerSpec::dense(4, 5, Activation::Relu),
        LayerSpec::dense(5, 6, Activation::Softmax),
    ]
}

pub fn dense_net() -> Vec<LayerSpec> {
    vec![
        LayerSpec::Flatten,
        LayerSpec::dense(400, 8, Activation::Relu),
        LayerSpec::dense(8, 6, Activation::Softmax),
    ]
}

pub struct Check {
    pub worst: f64,
    pub checked: usize,
    pub kinks: usize,
}

/// Largest relative difference between the analytic gradient and central
/// differences. A parameter whose one-sided slopes disagree has a ReLU kink
/// within `EPS`, where central differences are meaningless; those are counted
/// and left out.
pub fn check_gradients(arch: Vec<LayerSpec>, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = init_weights(&arch, &mut rng);
    // non-zero biases so every code path carries signal
    for (spec, w) in arch.iter().zip(weights.iter_mut()) {
        for b in &mut w[spec.weight_count()..] {
            *b = rng.random_range(-0.3..0.3);
        }
    }
    let model = ModelDescriptor::new(arch, weights, [1.0 / 1920.0, 1.0 / 1080.0], seed).unwrap();
    let batch = random_batch(&mut rng, 3);
    let (base, grads) = loss_and_gradient(&model, &batch).unwrap();

    let mut check = Check { worst: 0.0, checked: 0, kinks: 0 };
    for (layer, layer_grads) in grads.iter().enumerate() {
        for (i, &a) in layer_grads.iter().enumerate() {
            let mut plus = model.clone();
            plus.weights[layer][i] += EPS;
            let mut minus = model.clone();
            minus.weights[layer][i] -= EPS;
            let (lp, lm) = (mean_loss(&plus, &batch).unwrap(), mean_loss(&minus, &batch).unwrap());
            let (up, down) = ((lp - base) / EPS, (base - lm) / EPS);
            if (up - down).abs() > 0.01 * up.abs().max(down.abs()) + 1e-7 {
                check.kinks += 1;
                continue;
            }
            let fd = (lp - lm) / (2.0 * EPS);
            check.worst = check.worst.max((a - fd).abs() / a.abs().max(fd.abs()).max(1e-8));
            check.checked += 1;
        }
    }
    check
}
