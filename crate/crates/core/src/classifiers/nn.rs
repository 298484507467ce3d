//! Feed-forward sequence classifiers: 1-D convolutions, dense layers, and the
//! forward/backward passes used for inference and training.
//!
//! Activations are stored time-major: element `(t, c)` of a `(len, channels)`
//! tensor lives at `t * channels + c`. Dense layers operate on `(1, units)`
//! tensors. Conv1d weights are laid out `[tap][in_channel][out_channel]` and
//! dense weights `[in][out]`; each layer's flat parameter vector is the
//! weights followed by the biases.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::recognition::{StrokeLabel, StrokeSample, SEQ_LEN};

pub const SCHEMA_VERSION: u32 = 1;
pub const NUM_CLASSES: usize = StrokeLabel::COUNT;
pub const INPUT_CHANNELS: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("layer {layer}: {reason}")]
    Shape { layer: usize, reason: String },
    #[error("invalid architecture: {0}")]
    Architecture(String),
    #[error("unsupported schema version {0}")]
    Schema(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Softmax,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv1d {
        in_channels: usize,
        out_channels: usize,
        kernel_size: usize,
        stride: usize,
        dilation: usize,
        activation: Activation,
    },
    Dense {
        in_units: usize,
        out_units: usize,
        activation: Activation,
    },
    /// Mean over the time axis: `(len, c) -> (1, c)`.
    GlobalAvgPool,
    /// `(len, c) -> (1, len * c)`, time-major.
    Flatten,
}

impl LayerSpec {
    pub fn conv(in_channels: usize, out_channels: usize, kernel_size: usize, stride: usize, dilation: usize) -> Self {
        Self::Conv1d { in_channels, out_channels, kernel_size, stride, dilation, activation: Activation::Relu }
    }

    pub fn dense(in_units: usize, out_units: usize, activation: Activation) -> Self {
        Self::Dense { in_units, out_units, activation }
    }

    pub fn weight_count(&self) -> usize {
        match *self {
            Self::Conv1d { in_channels, out_channels, kernel_size, .. } => kernel_size * in_channels * out_channels,
            Self::Dense { in_units, out_units, .. } => in_units * out_units,
            Self::GlobalAvgPool | Self::Flatten => 0,
        }
    }

    pub fn bias_count(&self) -> usize {
        match *self {
            Self::Conv1d { out_channels, .. } => out_channels,
            Self::Dense { out_units, .. } => out_units,
            Self::GlobalAvgPool | Self::Flatten => 0,
        }
    }

    pub fn param_count(&self) -> usize {
        self.weight_count() + self.bias_count()
    }

    pub fn fan_in(&self) -> usize {
        match *self {
            Self::Conv1d { in_channels, kernel_size, .. } => in_channels * kernel_size,
            Self::Dense { in_units, .. } => in_units,
            Self::GlobalAvgPool | Self::Flatten => 0,
        }
    }

    pub fn activation(&self) -> Activation {
        match *self {
            Self::Conv1d { activation, .. } | Self::Dense { activation, .. } => activation,
            Self::GlobalAvgPool | Self::Flatten => Activation::None,
        }
    }

    /// Output `(len, channels)` for an input shape, or why the input does not fit.
    pub fn output_shape(&self, (len, ch): (usize, usize)) -> Result<(usize, usize), String> {
        match *self {
            Self::Conv1d { in_channels, out_channels, kernel_size, stride, dilation, .. } => {
                if [in_channels, out_channels, kernel_size, stride, dilation].contains(&0) {
                    return Err("conv1d dimensions must be positive".into());
                }
                if ch != in_channels {
                    return Err(format!("conv1d expects {in_channels} input channels, got {ch}"));
                }
                let span = dilation * (kernel_size - 1) + 1;
                if len < span {
                    return Err(format!("input length {len} shorter than the dilated kernel span {span}"));
                }
                Ok(((len - span) / stride + 1, out_channels))
            }
            Self::Dense { in_units, out_units, .. } => {
                if in_units == 0 || out_units == 0 {
                    return Err("dense dimensions must be positive".into());
                }
                if len != 1 || ch != in_units {
                    return Err(format!("dense expects a flat input of {in_units} units, got ({len}, {ch})"));
                }
                Ok((1, out_units))
            }
            Self::GlobalAvgPool => Ok((1, ch)),
            Self::Flatten => Ok((1, len * ch)),
        }
    }
}

/// Default temporal convolutional network: four ReLU conv blocks taking the
/// 200 steps down to 22, flattened into a ReLU + softmax dense head
/// (122,742 parameters).
pub fn default_tcn() -> Vec<LayerSpec> {
    vec![
        LayerSpec::conv(2, 16, 5, 1, 1),
        LayerSpec::conv(16, 32, 5, 2, 1),
        LayerSpec::conv(32, 32, 3, 2, 2),
        LayerSpec::conv(32, 32, 3, 2, 1),
        LayerSpec::Flatten,
        LayerSpec::dense(22 * 32, 160, Activation::Relu),
        LayerSpec::dense(160, NUM_CLASSES, Activation::Softmax),
    ]
}

/// Default fully connected network on the flattened 400 features (136,326 parameters).
pub fn default_fcnn() -> Vec<LayerSpec> {
    vec![
        LayerSpec::Flatten,
        LayerSpec::dense(2 * SEQ_LEN, 256, Activation::Relu),
        LayerSpec::dense(256, 128, Activation::Relu),
        LayerSpec::dense(128, NUM_CLASSES, Activation::Softmax),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Tcn,
    Fcnn,
}

impl ModelKind {
    pub fn of(architecture: &[LayerSpec]) -> Self {
        match architecture.first() {
            Some(LayerSpec::Conv1d { .. }) => Self::Tcn,
            _ => Self::Fcnn,
        }
    }
}

/// Architecture plus weights of a neural classifier, in its on-disk form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub schema_version: u32,
    pub kind: ModelKind,
    pub input_scaling: [f64; 2],
    pub architecture: Vec<LayerSpec>,
    pub weights: Vec<Vec<f64>>,
    pub seed: u64,
}

/// Sum of weight and bias element counts over all layers.
pub fn count_params(architecture: &[LayerSpec]) -> usize {
    architecture.iter().map(LayerSpec::param_count).sum()
}

/// Checks the layer chain against the `(SEQ_LEN, 2)` input and returns every
/// layer's output shape.
pub fn check_architecture(architecture: &[LayerSpec]) -> Result<Vec<(usize, usize)>, NnError> {
    if architecture.is_empty() {
        return Err(NnError::Architecture("no layers".into()));
    }
    let softmax: Vec<usize> = architecture
        .iter()
        .enumerate()
        .filter(|(_, l)| l.activation() == Activation::Softmax)
        .map(|(i, _)| i)
        .collect();
    if softmax != [architecture.len() - 1] {
        return Err(NnError::Architecture("exactly one softmax layer is required, and it must be last".into()));
    }
    if let LayerSpec::Conv1d { activation: Activation::Softmax, .. } = architecture[architecture.len() - 1] {
        return Err(NnError::Architecture("softmax must be applied by a dense layer".into()));
    }
    let mut shape = (SEQ_LEN, INPUT_CHANNELS);
    let mut shapes = Vec::with_capacity(architecture.len());
    for (layer, spec) in architecture.iter().enumerate() {
        shape = spec.output_shape(shape).map_err(|reason| NnError::Shape { layer, reason })?;
        shapes.push(shape);
    }
    if shape != (1, NUM_CLASSES) {
        return Err(NnError::Shape {
            layer: architecture.len() - 1,
            reason: format!("final output must be {NUM_CLASSES} class scores, got {shape:?}"),
        });
    }
    Ok(shapes)
}

impl ModelDescriptor {
    pub fn new(architecture: Vec<LayerSpec>, weights: Vec<Vec<f64>>, input_scaling: [f64; 2], seed: u64) -> Result<Self, NnError> {
        let d = Self {
            schema_version: SCHEMA_VERSION,
            kind: ModelKind::of(&architecture),
            input_scaling,
            architecture,
            weights,
            seed,
        };
        d.validate()?;
        Ok(d)
    }

    /// All-zero parameters for the given architecture.
    pub fn zeros(architecture: Vec<LayerSpec>, input_scaling: [f64; 2]) -> Result<Self, NnError> {
        let weights = architecture.iter().map(|l| vec![0.0; l.param_count()]).collect();
        Self::new(architecture, weights, input_scaling, 0)
    }

    pub fn validate(&self) -> Result<(), NnError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(NnError::Schema(self.schema_version));
        }
        check_architecture(&self.architecture)?;
        if self.weights.len() != self.architecture.len() {
            return Err(NnError::Architecture(format!(
                "{} weight tensors for {} layers",
                self.weights.len(),
                self.architecture.len()
            )));
        }
        for (layer, (spec, w)) in self.architecture.iter().zip(&self.weights).enumerate() {
            if w.len() != spec.param_count() {
                return Err(NnError::Shape {
                    layer,
                    reason: format!("expected {} parameters, found {}", spec.param_count(), w.len()),
                });
            }
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        count_params(&self.architecture)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Tensor {
    pub len: usize,
    pub ch: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    fn zeros(len: usize, ch: usize) -> Self {
        Self { len, ch, data: vec![0.0; len * ch] }
    }
}

pub(crate) fn input_tensor(sample: &StrokeSample, scaling: [f64; 2]) -> Result<Tensor, NnError> {
    if sample.sequence.len() != SEQ_LEN {
        return Err(NnError::Shape {
            layer: 0,
            reason: format!("input has {} time steps, expected {SEQ_LEN}", sample.sequence.len()),
        });
    }
    let data = sample
        .sequence
        .iter()
        .flat_map(|r| [r[0] * scaling[0], r[1] * scaling[1]])
        .collect();
    Ok(Tensor { len: SEQ_LEN, ch: INPUT_CHANNELS, data })
}

/// Pre-softmax layer output (`z`) for one layer.
fn layer_forward(spec: &LayerSpec, params: &[f64], x: &Tensor) -> Tensor {
    match *spec {
        LayerSpec::Conv1d { in_channels: ci, out_channels: co, kernel_size: k, stride, dilation, .. } => {
            let (w, b) = params.split_at(k * ci * co);
            let out_len = (x.len - dilation * (k - 1) - 1) / stride + 1;
            let mut z = Tensor::zeros(out_len, co);
            for t in 0..out_len {
                let out = &mut z.data[t * co..(t + 1) * co];
                out.copy_from_slice(b);
                for j in 0..k {
                    let src = (t * stride + j * dilation) * ci;
                    for (c, &xv) in x.data[src..src + ci].iter().enumerate() {
                        if xv == 0.0 {
                            continue;
                        }
                        let wrow = &w[(j * ci + c) * co..(j * ci + c + 1) * co];
                        for (o, &wv) in out.iter_mut().zip(wrow) {
                            *o += xv * wv;
                        }
                    }
                }
            }
            z
        }
        LayerSpec::Dense { in_units, out_units, .. } => {
            let (w, b) = params.split_at(in_units * out_units);
            let mut z = Tensor { len: 1, ch: out_units, data: b.to_vec() };
            for (i, &xv) in x.data.iter().enumerate() {
                if xv == 0.0 {
                    continue;
                }
                for (o, &wv) in z.data.iter_mut().zip(&w[i * out_units..(i + 1) * out_units]) {
                    *o += xv * wv;
                }
            }
            z
        }
        LayerSpec::GlobalAvgPool => {
            let mut z = Tensor::zeros(1, x.ch);
            for row in x.data.chunks_exact(x.ch) {
                for (o, &v) in z.data.iter_mut().zip(row) {
                    *o += v;
                }
            }
            let n = x.len as f64;
            z.data.iter_mut().for_each(|v| *v /= n);
            z
        }
        LayerSpec::Flatten => Tensor { len: 1, ch: x.len * x.ch, data: x.data.clone() },
    }
}

fn relu_in_place(t: &mut Tensor) {
    t.data.iter_mut().for_each(|v| *v = v.max(0.0));
}

/// Numerically stable softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Forward pass keeping every layer's input; the last entry is the logits.
pub(crate) fn forward_trace(model: &ModelDescriptor, input: Tensor) -> Vec<Tensor> {
    let mut trace = Vec::with_capacity(model.architecture.len() + 1);
    trace.push(input);
    for (spec, params) in model.architecture.iter().zip(&model.weights) {
        let mut z = layer_forward(spec, params, trace.last().expect("non-empty"));
        if spec.activation() == Activation::Relu {
            relu_in_place(&mut z);
        }
        trace.push(z);
    }
    trace
}

/// Class probabilities for one sample.
pub fn nn_forward(model: &ModelDescriptor, sample: &StrokeSample) -> Result<[f64; NUM_CLASSES], NnError> {
    model.validate()?;
    forward_unchecked(model, sample)
}

pub(crate) fn forward_unchecked(model: &ModelDescriptor, sample: &StrokeSample) -> Result<[f64; NUM_CLASSES], NnError> {
    let x = input_tensor(sample, model.input_scaling)?;
    let trace = forward_trace(model, x);
    let p = softmax(&trace.last().expect("non-empty").data);
    let mut out = [0.0; NUM_CLASSES];
    out.copy_from_slice(&p);
    Ok(out)
}

/// Cross-entropy loss of one sample and the gradient of every parameter,
/// accumulated into `grads` (same layout as `model.weights`).
pub(crate) fn accumulate_gradient(
    model: &ModelDescriptor,
    sample: &StrokeSample,
    label: StrokeLabel,
    grads: &mut [Vec<f64>],
) -> Result<(f64, bool), NnError> {
    let x = input_tensor(sample, model.input_scaling)?;
    let trace = forward_trace(model, x);
    let logits = &trace.last().expect("non-empty").data;
    let p = softmax(logits);
    let y = label.index();
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    let loss = lse - logits[y];
    let correct = argmax(&p) == y;

    // gradient w.r.t. the last layer's pre-softmax output
    let mut delta: Vec<f64> = p;
    delta[y] -= 1.0;

    for layer in (0..model.architecture.len()).rev() {
        let spec = &model.architecture[layer];
        let input = &trace[layer];
        if layer + 1 < model.architecture.len() && spec.activation() == Activation::Relu {
            for (d, &a) in delta.iter_mut().zip(&trace[layer + 1].data) {
                if a <= 0.0 {
                    *d = 0.0;
                }
            }
        }
        delta = layer_backward(spec, &model.weights[layer], input, &delta, &mut grads[layer], layer > 0);
    }
    Ok((loss, correct))
}

/// Accumulates parameter gradients for one layer and returns the gradient
/// w.r.t. its input (empty when `need_input_grad` is false).
fn layer_backward(
    spec: &LayerSpec,
    params: &[f64],
    x: &Tensor,
    dz: &[f64],
    grad: &mut [f64],
    need_input_grad: bool,
) -> Vec<f64> {
    match *spec {
        LayerSpec::Conv1d { in_channels: ci, out_channels: co, kernel_size: k, stride, dilation, .. } => {
            let nw = k * ci * co;
            let (w, _) = params.split_at(nw);
            let (gw, gb) = grad.split_at_mut(nw);
            let out_len = dz.len() / co;
            let mut dx = if need_input_grad { vec![0.0; x.data.len()] } else { Vec::new() };
            for t in 0..out_len {
                let d = &dz[t * co..(t + 1) * co];
                if d.iter().all(|&v| v == 0.0) {
                    continue;
                }
                for (g, &dv) in gb.iter_mut().zip(d) {
                    *g += dv;
                }
                for j in 0..k {
                    let src = (t * stride + j * dilation) * ci;
                    for c in 0..ci {
                        let base = (j * ci + c) * co;
                        let xv = x.data[src + c];
                        if xv != 0.0 {
                            for (g, &dv) in gw[base..base + co].iter_mut().zip(d) {
                                *g += xv * dv;
                            }
                        }
                        if need_input_grad {
                            dx[src + c] += w[base..base + co].iter().zip(d).map(|(a, b)| a * b).sum::<f64>();
                        }
                    }
                }
            }
            dx
        }
        LayerSpec::Dense { in_units, out_units, .. } => {
            let nw = in_units * out_units;
            let (w, _) = params.split_at(nw);
            let (gw, gb) = grad.split_at_mut(nw);
            for (g, &dv) in gb.iter_mut().zip(dz) {
                *g += dv;
            }
            let mut dx = if need_input_grad { vec![0.0; in_units] } else { Vec::new() };
            for (i, &xv) in x.data.iter().enumerate().take(in_units) {
                let row = i * out_units..(i + 1) * out_units;
                if xv != 0.0 {
                    for (g, &dv) in gw[row.clone()].iter_mut().zip(dz) {
                        *g += xv * dv;
                    }
                }
                if need_input_grad {
                    dx[i] = w[row].iter().zip(dz).map(|(a, b)| a * b).sum();
                }
            }
            dx
        }
        LayerSpec::GlobalAvgPool => {
            let n = x.len as f64;
            let mut dx = Vec::with_capacity(x.data.len());
            for _ in 0..x.len {
                dx.extend(dz.iter().map(|v| v / n));
            }
            dx
        }
        LayerSpec::Flatten => dz.to_vec(),
    }
}

pub(crate) fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// Mean cross-entropy and per-parameter gradient over a labelled batch.
pub fn loss_and_gradient(model: &ModelDescriptor, batch: &[StrokeSample]) -> Result<(f64, Vec<Vec<f64>>), NnError> {
    model.validate()?;
    let mut grads: Vec<Vec<f64>> = model.weights.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut total = 0.0;
    for s in batch {
        let label = s.label.ok_or_else(|| NnError::Architecture(format!("sample `{}` has no label", s.source_id)))?;
        total += accumulate_gradient(model, s, label, &mut grads)?.0;
    }
    let n = batch.len().max(1) as f64;
    grads.iter_mut().flatten().for_each(|g| *g /= n);
    Ok((total / n, grads))
}

/// Mean cross-entropy over a labelled batch.
pub fn mean_loss(model: &ModelDescriptor, batch: &[StrokeSample]) -> Result<f64, NnError> {
    let mut total = 0.0;
    for s in batch {
        let p = nn_forward(model, s)?;
        let y = s.label.ok_or_else(|| NnError::Architecture(format!("sample `{}` has no label", s.source_id)))?;
        total -= p[y.index()].ln();
    }
    Ok(total / batch.len().max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recognition::PadMode;

    fn sample(rows: &[[f64; 2]]) -> StrokeSample {
        StrokeSample::from_rows(rows, PadMode::Pre, Some(StrokeLabel::Lob), "s".into())
    }

    #[test]
    fn parameter_budgets() {
        assert_eq!(LayerSpec::dense(400, 64, Activation::Relu).param_count(), 25_664);
        assert_eq!(count_params(&default_tcn()), 122_742);
        assert_eq!(count_params(&default_fcnn()), 136_326);
        check_architecture(&default_tcn()).unwrap();
        check_architecture(&default_fcnn()).unwrap();
    }

    #[test]
    fn zero_weights_give_uniform_output() {
        for arch in [default_tcn(), default_fcnn()] {
            let m = ModelDescriptor::zeros(arch, [1.0 / 1920.0, 1.0 / 1080.0]).unwrap();
            let p = nn_forward(&m, &sample(&[[300.0, 400.0]; 120])).unwrap();
            for v in p {
                assert!((v - 1.0 / 6.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn identity_kernel_copies_its_input() {
        let spec = LayerSpec::Conv1d {
            in_channels: 1,
            out_channels: 1,
            kernel_size: 1,
            stride: 1,
            dilation: 1,
            activation: Activation::None,
        };
        let x = Tensor { len: 7, ch: 1, data: vec![3.0, -1.0, 4.0, 1.0, -5.0, 9.0, 2.0] };
        let z = layer_forward(&spec, &[1.0, 0.0], &x);
        assert_eq!(z, x);
    }

    #[test]
    fn strided_conv_matches_sliding_dot_product() {
        let spec = LayerSpec::conv(2, 2, 3, 2, 1);
        let x = Tensor { len: 7, ch: 2, data: (0..14).map(|i| (i as f64 * 0.7).sin()).collect() };
        let params: Vec<f64> = (0..spec.param_count()).map(|i| (i as f64 * 1.3).cos()).collect();
        let z = layer_forward(&spec, &params, &x);
        assert_eq!((z.len, z.ch), (3, 2));
        let w = |tap: usize, c: usize, o: usize| params[(tap * 2 + c) * 2 + o];
        for t in 0..3 {
            for o in 0..2 {
                let mut dot = params[12 + o];
                for tap in 0..3 {
                    for c in 0..2 {
                        dot += w(tap, c, o) * x.data[(2 * t + tap) * 2 + c];
                    }
                }
                assert!((z.data[t * 2 + o] - dot).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn architecture_errors_name_the_layer() {
        let mut arch = default_tcn();
        arch[5] = LayerSpec::dense(100, 320, Activation::Relu);
        assert!(matches!(check_architecture(&arch), Err(NnError::Shape { layer: 5, .. })));
        let mut two_softmax = default_fcnn();
        two_softmax[2] = LayerSpec::dense(256, 128, Activation::Softmax);
        assert!(matches!(check_architecture(&two_softmax), Err(NnError::Architecture(_))));
        let m = ModelDescriptor::zeros(default_fcnn(), [1.0, 1.0]).unwrap();
        let mut bad = m.clone();
        bad.weights[2].pop();
        assert!(matches!(bad.validate(), Err(NnError::Shape { layer: 2, .. })));
        let short = StrokeSample { sequence: vec![[1.0, 1.0]; 10], ..sample(&[]) };
        assert!(matches!(nn_forward(&m, &short), Err(NnError::Shape { layer: 0, .. })));
    }

    #[test]
    fn softmax_is_stable_for_large_logits() {
        let p = softmax(&[1000.0, 1000.0, -1000.0]);
        assert!((p[0] - 0.5).abs() < 1e-15 && p[2] == 0.0);
    }
}
