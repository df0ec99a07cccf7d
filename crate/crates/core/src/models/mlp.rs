//! A small fully connected network trained with Nadam on mean squared error.
//!
//! The default topology is `input -> 20 (relu) -> 15 (relu) -> 1 (linear)`.
//! Weights start from a seeded uniform draw scaled by fan-in (He-uniform for
//! relu layers, LeCun-uniform for the linear output); biases start at zero.
//! A seeded fraction of the rows is held out for validation, and training
//! stops once the validation loss has not improved for `patience` epochs,
//! restoring the best weights seen.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Matrix, Regressor};
use crate::error::{Error, Result};
use crate::rng::rng;

pub const HIDDEN_WIDTHS: [usize; 2] = [20, 15];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Linear => z,
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<DenseLayer>,
}

/// Parameter-shaped buffer: one `(weights, bias)` pair per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Gradients {
    fn zeros_like(model: &MlpModel) -> Gradients {
        Gradients {
            layers: model
                .layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
                .collect(),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|(w, b)| w.iter().chain(b).copied()).collect()
    }
}

impl MlpModel {
    /// `widths[0]` is the input width; one activation per later entry.
    pub fn new(widths: &[usize], activations: &[Activation], seed: u64) -> MlpModel {
        assert_eq!(widths.len(), activations.len() + 1, "one activation per layer");
        let mut r = rng(seed);
        let layers = widths
            .windows(2)
            .zip(activations)
            .map(|(w, &activation)| {
                let (inputs, outputs) = (w[0], w[1]);
                let gain = if activation == Activation::Relu { 6.0 } else { 3.0 };
                let limit = (gain / inputs as f64).sqrt();
                DenseLayer {
                    inputs,
                    outputs,
                    weights: (0..inputs * outputs).map(|_| r.random_range(-limit..limit)).collect(),
                    bias: vec![0.0; outputs],
                    activation,
                }
            })
            .collect();
        MlpModel { layers }
    }

    /// `input -> 20 relu -> 15 relu -> 1 linear`.
    pub fn standard(input_width: usize, seed: u64) -> MlpModel {
        MlpModel::new(
            &[input_width, HIDDEN_WIDTHS[0], HIDDEN_WIDTHS[1], 1],
            &[Activation::Relu, Activation::Relu, Activation::Linear],
            seed,
        )
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias).copied()).collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.parameter_count());
        let mut k = 0;
        for l in &mut self.layers {
            for v in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *v = params[k];
                k += 1;
            }
        }
    }

    /// Pre-activations and activations of every layer for one sample.
    fn trace(&self, x: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len() + 1);
        post.push(x.to_vec());
        for l in &self.layers {
            let input = post.last().expect("input pushed");
            let z: Vec<f64> = (0..l.outputs)
                .map(|o| {
                    let w = &l.weights[o * l.inputs..(o + 1) * l.inputs];
                    l.bias[o] + w.iter().zip(input).map(|(a, b)| a * b).sum::<f64>()
                })
                .collect();
            post.push(z.iter().map(|v| l.activation.apply(*v)).collect());
            pre.push(z);
        }
        (pre, post)
    }

    /// Mean squared error over `rows` and its gradient.
    pub fn loss_and_gradient(&self, x: &Matrix, y: &[f64], rows: &[usize]) -> (f64, Gradients) {
        let mut grad = Gradients::zeros_like(self);
        let scale = 1.0 / rows.len() as f64;
        let mut loss = 0.0;
        for &i in rows {
            let (pre, post) = self.trace(x.row(i));
            let out = post.last().expect("output")[0];
            let err = out - y[i];
            loss += err * err * scale;
            // dL/d(output activation)
            let mut delta = vec![2.0 * err * scale];
            for (li, layer) in self.layers.iter().enumerate().rev() {
                let dz: Vec<f64> = delta
                    .iter()
                    .zip(&pre[li])
                    .map(|(d, z)| d * layer.activation.derivative(*z))
                    .collect();
                let input = &post[li];
                let (gw, gb) = &mut grad.layers[li];
                for o in 0..layer.outputs {
                    gb[o] += dz[o];
                    let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                    for (g, a) in row.iter_mut().zip(input) {
                        *g += dz[o] * a;
                    }
                }
                if li > 0 {
                    delta = (0..layer.inputs)
                        .map(|j| (0..layer.outputs).map(|o| layer.weights[o * layer.inputs + j] * dz[o]).sum())
                        .collect();
                }
            }
        }
        (loss, grad)
    }

    pub fn mse(&self, x: &Matrix, y: &[f64], rows: &[usize]) -> f64 {
        rows.iter().map(|&i| (self.predict_one(x.row(i)) - y[i]).powi(2)).sum::<f64>() / rows.len() as f64
    }
}

impl Regressor for MlpModel {
    fn width(&self) -> usize {
        self.layers[0].inputs
    }

    fn predict_one(&self, x: &[f64]) -> f64 {
        let mut a = x.to_vec();
        for l in &self.layers {
            a = (0..l.outputs)
                .map(|o| {
                    let w = &l.weights[o * l.inputs..(o + 1) * l.inputs];
                    l.activation.apply(l.bias[o] + w.iter().zip(&a).map(|(p, q)| p * q).sum::<f64>())
                })
                .collect();
        }
        a[0]
    }
}

/// Largest relative difference between the analytic gradient and central
/// finite differences over every parameter. Step per parameter is
/// `1e-6 * max(|theta|, 1)`; the denominator is floored at `1e-6` so
/// vanishing gradients compare absolutely.
pub fn gradient_check(model: &MlpModel, x: &Matrix, y: &[f64], rows: &[usize]) -> f64 {
    let (_, grad) = model.loss_and_gradient(x, y, rows);
    let analytic = grad.flatten();
    let base = model.parameters();
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for (k, a) in analytic.iter().enumerate() {
        let h = 1e-6 * base[k].abs().max(1.0);
        let mut p = base.clone();
        p[k] = base[k] + h;
        probe.set_parameters(&p);
        let up = probe.loss_and_gradient(x, y, rows).0;
        p[k] = base[k] - h;
        probe.set_parameters(&p);
        let down = probe.loss_and_gradient(x, y, rows).0;
        let numeric = (up - down) / (2.0 * h);
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub validation_fraction: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            batch_size: 32,
            patience: 10,
            validation_fraction: 0.1,
            learning_rate: 0.002,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.epochs > 0
            && self.batch_size > 0
            && self.validation_fraction > 0.0
            && self.validation_fraction <= 0.5
            && self.learning_rate > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid MLP training config {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    /// 1-based epoch whose weights were kept.
    pub best_epoch: usize,
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
}

/// Nadam in Dozat's form: Adam moments with a Nesterov look-ahead on the
/// first moment.
struct Nadam {
    config: TrainConfig,
    step: i32,
    m: Gradients,
    v: Gradients,
}

impl Nadam {
    fn new(model: &MlpModel, config: TrainConfig) -> Nadam {
        Nadam { config, step: 0, m: Gradients::zeros_like(model), v: Gradients::zeros_like(model) }
    }

    fn update(&mut self, model: &mut MlpModel, grad: &Gradients) {
        self.step += 1;
        let c = &self.config;
        let (b1, b2) = (c.beta1, c.beta2);
        let bias1 = 1.0 - b1.powi(self.step);
        let bias1_next = 1.0 - b1.powi(self.step + 1);
        let bias2 = 1.0 - b2.powi(self.step);
        for (li, layer) in model.layers.iter_mut().enumerate() {
            let (gw, gb) = &grad.layers[li];
            let (mw, mb) = &mut self.m.layers[li];
            let (vw, vb) = &mut self.v.layers[li];
            let params = layer.weights.iter_mut().chain(layer.bias.iter_mut());
            let grads = gw.iter().chain(gb.iter());
            let ms = mw.iter_mut().chain(mb.iter_mut());
            let vs = vw.iter_mut().chain(vb.iter_mut());
            for (((p, g), m), v) in params.zip(grads).zip(ms).zip(vs) {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = b1 * *m / bias1_next + (1.0 - b1) * g / bias1;
                let v_hat = *v / bias2;
                *p -= c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
            }
        }
    }
}

pub struct MlpFit {
    pub model: MlpModel,
    pub report: TrainReport,
}

/// Trains the standard network on `x`, `y` (inputs already scaled).
pub fn fit_mlp(x: &Matrix, y: &[f64], config: &TrainConfig) -> Result<MlpFit> {
    fit_mlp_from(MlpModel::standard(x.cols(), config.seed), x, y, config)
}

/// Trains a given initial network.
pub fn fit_mlp_from(mut model: MlpModel, x: &Matrix, y: &[f64], config: &TrainConfig) -> Result<MlpFit> {
    config.validate()?;
    let n = x.rows();
    if n < 10 {
        return Err(Error::EmptyInput("MLP training needs at least 10 rows"));
    }
    if y.len() != n {
        return Err(Error::LengthMismatch { left: y.len(), right: n });
    }
    if x.cols() != model.width() {
        return Err(Error::WidthMismatch { expected: model.width(), actual: x.cols() });
    }
    let mut r = rng(crate::rng::derive_seed(config.seed, &["mlp-shuffle"]));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let n_val = ((config.validation_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let (val, train) = order.split_at(n_val);
    let val = val.to_vec();
    let mut train = train.to_vec();

    let mut opt = Nadam::new(&model, *config);
    let mut best = (f64::INFINITY, model.clone(), 0usize);
    let mut stale = 0;
    let mut report = TrainReport { epochs_run: 0, best_epoch: 0, train_loss: Vec::new(), val_loss: Vec::new() };

    for epoch in 1..=config.epochs {
        train.shuffle(&mut r);
        for batch in train.chunks(config.batch_size) {
            let (loss, grad) = model.loss_and_gradient(x, y, batch);
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, learning_rate: config.learning_rate });
            }
            opt.update(&mut model, &grad);
        }
        let train_loss = model.mse(x, y, &train);
        let val_loss = model.mse(x, y, &val);
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::Diverged { epoch, learning_rate: config.learning_rate });
        }
        report.epochs_run = epoch;
        report.train_loss.push(train_loss);
        report.val_loss.push(val_loss);
        if val_loss < best.0 {
            best = (val_loss, model.clone(), epoch);
            stale = 0;
        } else {
            stale += 1;
        }
        if stale >= config.patience {
            break;
        }
    }
    report.best_epoch = best.2;
    Ok(MlpFit { model: best.1, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng;

    fn linear_data(n: usize, seed: u64) -> (Matrix, Vec<f64>) {
        let mut r = rng(seed);
        let x = Matrix::from_rows(3, (0..n).map(|_| [r.random::<f64>(), r.random::<f64>(), r.random::<f64>()]));
        let y = (0..n).map(|i| {
            let v = x.row(i);
            0.5 + 1.5 * v[0] - 0.7 * v[1] + 0.3 * v[2]
        });
        let y = y.collect();
        (x, y)
    }

    #[test]
    fn forward_matches_hand_computation() {
        let mut m = MlpModel::new(&[2, 2, 1], &[Activation::Relu, Activation::Linear], 0);
        m.layers[0].weights = vec![1.0, -1.0, 0.5, 2.0];
        m.layers[0].bias = vec![0.0, -1.0];
        m.layers[1].weights = vec![3.0, -2.0];
        m.layers[1].bias = vec![0.25];
        // hidden: relu(1 - 2) = 0, relu(0.5 + 4 - 1) = 3.5; out = 0.25 - 7
        assert_eq!(m.predict_one(&[1.0, 2.0]), -6.75);
    }

    #[test]
    fn standard_topology() {
        let m = MlpModel::standard(8, 1);
        let shape: Vec<(usize, usize)> = m.layers.iter().map(|l| (l.inputs, l.outputs)).collect();
        assert_eq!(shape, vec![(8, 20), (20, 15), (15, 1)]);
        assert_eq!(m.layers[2].activation, Activation::Linear);
        assert_eq!(m.parameter_count(), 8 * 20 + 20 + 20 * 15 + 15 + 15 + 1);
    }

    #[test]
    fn learns_a_linear_map() {
        let (x, y) = linear_data(400, 3);
        let cfg = TrainConfig { epochs: 400, patience: 400, seed: 5, ..TrainConfig::default() };
        let fit = fit_mlp(&x, &y, &cfg).unwrap();
        let all: Vec<usize> = (0..x.rows()).collect();
        assert!(fit.model.mse(&x, &y, &all) < 1e-3, "mse {}", fit.model.mse(&x, &y, &all));
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let (x, y) = linear_data(5, 21);
        for seed in 0..5 {
            let mut m = MlpModel::new(&[3, 20, 15, 1], &[Activation::Relu, Activation::Relu, Activation::Linear], seed);
            let mut r = rng(seed + 100);
            for l in &mut m.layers {
                l.bias.iter_mut().for_each(|b| *b = r.random_range(-0.5..0.5));
            }
            let err = gradient_check(&m, &x, &y, &[0, 1, 2, 3, 4]);
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn zero_patience_trains_one_epoch() {
        let (x, y) = linear_data(50, 4);
        let fit = fit_mlp(&x, &y, &TrainConfig { patience: 0, ..TrainConfig::default() }).unwrap();
        assert_eq!(fit.report.epochs_run, 1);
        assert_eq!(fit.report.best_epoch, 1);
    }

    #[test]
    fn training_is_reproducible() {
        let (x, y) = linear_data(120, 8);
        let cfg = TrainConfig { epochs: 20, seed: 77, ..TrainConfig::default() };
        let a = fit_mlp(&x, &y, &cfg).unwrap();
        let b = fit_mlp(&x, &y, &cfg).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.report, b.report);
    }

    #[test]
    fn divergence_is_reported() {
        let (x, mut y) = linear_data(40, 1);
        y[3] = f64::MAX;
        match fit_mlp(&x, &y, &TrainConfig::default()) {
            Err(Error::Diverged { epoch, learning_rate }) => {
                assert_eq!(epoch, 1);
                assert_eq!(learning_rate, 0.002);
            }
            other => panic!("expected divergence, got {:?}", other.map(|f| f.report)),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let (x, y) = linear_data(9, 1);
        assert!(fit_mlp(&x, &y, &TrainConfig::default()).is_err());
        let (x, y) = linear_data(20, 1);
        assert!(fit_mlp(&x, &y, &TrainConfig { validation_fraction: 0.7, ..TrainConfig::default() }).is_err());
    }
}
