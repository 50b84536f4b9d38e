//! L2-regularized logistic regression, fitted by full-batch gradient
//! descent. Used to score held-out samples in the evaluation harness.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticConfig {
    pub l2: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Threaded through for reproducibility; the full-batch fit draws no
    /// random numbers.
    pub seed: u64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            l2: 1e-2,
            epochs: 300,
            learning_rate: 1.0,
            seed: 0,
        }
    }
}

/// Halvings of the step size allowed over a whole fit.
const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// Weights on standardized inputs.
    pub weights: Array1<f64>,
    pub bias: f64,
    mean: Array1<f64>,
    scale: Array1<f64>,
    /// Training loss after every accepted step, starting with the
    /// initial loss.
    pub loss_history: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn loss(x: ArrayView2<'_, f64>, y: &Array1<f64>, w: &Array1<f64>, b: f64, l2: f64) -> f64 {
    let z = x.dot(w) + b;
    let data: f64 = z.iter().zip(y).map(|(&z, &t)| softplus(z) - t * z).sum::<f64>() / y.len() as f64;
    data + 0.5 * l2 * w.dot(w)
}

impl LinearModel {
    /// Linear decision value; larger means more likely positive.
    pub fn decision(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        let standardized = (&x - &self.mean) / &self.scale;
        (standardized.dot(&self.weights) + self.bias).to_vec()
    }

    pub fn predict_proba(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        self.decision(x).into_iter().map(sigmoid).collect()
    }
}

/// Fits `P(y = 1 | x) = sigmoid(w . z + b)` on column-standardized `z`.
///
/// Each epoch takes one gradient step; a step that would raise the loss is
/// retried at half the learning rate, so the recorded loss never increases.
/// The fit stops early once the step size has been halved 20 times.
pub fn train_linear(x: ArrayView2<'_, f64>, y: &[bool], config: &LogisticConfig) -> Result<LinearModel> {
    let (samples, features) = x.dim();
    if samples != y.len() {
        return Err(Error::LengthMismatch {
            left: samples,
            right: y.len(),
        });
    }
    if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
        return Err(Error::SingleClass(1));
    }
    let mean = x.mean_axis(Axis(0)).expect("at least one sample");
    let scale = x
        .std_axis(Axis(0), 0.0)
        .mapv(|s| if s > 0.0 { s } else { 1.0 });
    let z: Array2<f64> = (&x - &mean) / &scale;
    let target: Array1<f64> = y.iter().map(|&v| f64::from(u8::from(v))).collect();

    let mut w = Array1::<f64>::zeros(features);
    let mut b = 0.0;
    let mut lr = config.learning_rate;
    let mut current = loss(z.view(), &target, &w, b, config.l2);
    let mut history = vec![current];
    let mut halvings = 0;

    'epochs: for _ in 0..config.epochs {
        let residual = z.dot(&w).mapv(|v| v + b).mapv(sigmoid) - &target;
        let grad_w = z.t().dot(&residual) / samples as f64 + &w * config.l2;
        let grad_b = residual.sum() / samples as f64;
        loop {
            let w_next = &w - &(&grad_w * lr);
            let b_next = b - lr * grad_b;
            let next = loss(z.view(), &target, &w_next, b_next, config.l2);
            if next <= current {
                w = w_next;
                b = b_next;
                current = next;
                history.push(current);
                break;
            }
            if halvings == MAX_HALVINGS {
                break 'epochs;
            }
            lr /= 2.0;
            halvings += 1;
        }
    }

    Ok(LinearModel {
        weights: w,
        bias: b,
        mean,
        scale,
        loss_history: history,
    })
}
