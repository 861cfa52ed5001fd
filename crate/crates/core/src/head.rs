//! Linear-softmax head retrained on frozen features, and the two-stage
//! selection between that head and the EEP.
//!
//! The head maximizes the average log-likelihood `l = (1/n) Σ log p(y_i | f_i)`
//! with `p = softmax(W f + b)`. The EEP is itself a candidate classifier whose
//! average log-likelihood is exactly the LEEP score, so taking the better of
//! the two can never fall below LEEP.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leep::leep_score;
use crate::sum::exact_mean;
use crate::types::{FeatureMatrix, PredictionMatrix, TargetLabels};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearHead {
    /// c×d, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub c: usize,
    pub d: usize,
}

impl LinearHead {
    pub fn zeros(c: usize, d: usize) -> Self {
        Self { weights: vec![0.0; c * d], bias: vec![0.0; c], c, d }
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        (0..self.c)
            .map(|y| {
                let w = &self.weights[y * self.d..(y + 1) * self.d];
                self.bias[y] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }

    fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.01, epochs: 100, batch_size: 10, seed: 0, l2: 0.0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be positive".into()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::InvalidConfig("l2 must be nonnegative".into()));
        }
        Ok(())
    }
}

fn log_softmax_at(logits: &[f64], y: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    logits[y] - lse
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn check_shapes(head: &LinearHead, features: &FeatureMatrix, labels: &TargetLabels) -> Result<()> {
    if features.n() != labels.n() {
        return Err(Error::LengthMismatch { left: features.n(), right: labels.n() });
    }
    if head.d != features.d() {
        return Err(Error::DimensionMismatch { expected: head.d, got: features.d() });
    }
    if head.c != labels.c() {
        return Err(Error::DimensionMismatch { expected: head.c, got: labels.c() });
    }
    Ok(())
}

/// `(1/n) Σ_i log softmax(W f_i + b)[y_i]`, computed with log-sum-exp.
pub fn avg_log_likelihood(head: &LinearHead, features: &FeatureMatrix, labels: &TargetLabels) -> Result<f64> {
    check_shapes(head, features, labels)?;
    let ll = exact_mean(
        features.rows().zip(labels.values()).map(|(x, &y)| log_softmax_at(&head.logits(x), y)),
        features.n(),
    );
    Ok(ll.min(0.0))
}

/// Mini-batch gradient descent on the mean cross-entropy (plus `l2/2 · ‖W‖²`),
/// starting from zero weights. Examples are reshuffled every epoch from a
/// ChaCha stream seeded with `cfg.seed`, so the result is reproducible
/// bit-for-bit.
pub fn train_linear_head(features: &FeatureMatrix, labels: &TargetLabels, cfg: &TrainConfig) -> Result<LinearHead> {
    cfg.validate()?;
    let (c, d) = (labels.c(), features.d());
    let mut head = LinearHead::zeros(c, d);
    check_shapes(&head, features, labels)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..features.n()).collect();
    let mut grad_w = vec![0.0; c * d];
    let mut grad_b = vec![0.0; c];

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad_w.iter_mut().for_each(|g| *g = 0.0);
            grad_b.iter_mut().for_each(|g| *g = 0.0);
            for &i in batch {
                let x = features.row(i);
                let probs = softmax(&head.logits(x));
                let y = labels.get(i);
                for (k, p) in probs.iter().enumerate() {
                    let err = p - if k == y { 1.0 } else { 0.0 };
                    grad_b[k] += err;
                    for (g, xj) in grad_w[k * d..(k + 1) * d].iter_mut().zip(x) {
                        *g += err * xj;
                    }
                }
            }
            let scale = cfg.learning_rate / batch.len() as f64;
            for (w, g) in head.weights.iter_mut().zip(&grad_w) {
                *w -= scale * g + cfg.learning_rate * cfg.l2 * *w;
            }
            for (b, g) in head.bias.iter_mut().zip(&grad_b) {
                *b -= scale * g;
            }
        }
        if !head.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
    }
    Ok(head)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    TrainedHead,
    Eep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStageResult {
    pub best: Winner,
    /// Average log-likelihood of the winning classifier.
    pub l_star: f64,
    pub head_log_likelihood: f64,
    /// The EEP's average log-likelihood, i.e. the LEEP score.
    pub leep: f64,
}

/// Trains the head, then keeps whichever of {head, EEP} has the larger
/// average log-likelihood. Ties go to the EEP.
pub fn two_stage_optimal(
    pred: &PredictionMatrix,
    features: &FeatureMatrix,
    labels: &TargetLabels,
    cfg: &TrainConfig,
) -> Result<TwoStageResult> {
    if pred.n() != features.n() {
        return Err(Error::LengthMismatch { left: pred.n(), right: features.n() });
    }
    let leep = leep_score(pred, labels)?.value;
    let head = train_linear_head(features, labels, cfg)?;
    let head_ll = avg_log_likelihood(&head, features, labels)?;
    let (best, l_star) = if head_ll > leep { (Winner::TrainedHead, head_ll) } else { (Winner::Eep, leep) };
    Ok(TwoStageResult { best, l_star, head_log_likelihood: head_ll, leep })
}
