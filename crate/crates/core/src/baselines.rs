//! Comparison measures: negative conditional entropy over argmax ("dummy")
//! source labels, the H-score of a feature representation, and the
//! NCE-based lower bound on LEEP.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::leep::{conditional_from_joint, empirical_joint};
use crate::sum::{exact_mean, exact_sum};
use crate::types::{FeatureMatrix, Measure, PredictionMatrix, Score, TargetLabels};

/// Eigenvalues of the feature covariance below `PINV_RCOND · λ_max` are
/// treated as zero.
pub const PINV_RCOND: f64 = 1e-8;

/// How far below zero an H-score may fall from rounding before it is an error.
pub const NEGATIVE_TRACE_TOLERANCE: f64 = 1e-9;

/// Hard argmax source label for every example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DummyLabels {
    values: Vec<usize>,
    m: usize,
    tie_count: usize,
}

impl DummyLabels {
    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn get(&self, i: usize) -> usize {
        self.values[i]
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of rows whose maximum was attained more than once.
    pub fn tie_count(&self) -> usize {
        self.tie_count
    }
}

/// Ties go to the lowest index.
pub fn dummy_labels(pred: &PredictionMatrix) -> DummyLabels {
    let mut tie_count = 0;
    let values = pred
        .rows()
        .map(|row| {
            let mut best = 0;
            let mut tied = false;
            for (z, &p) in row.iter().enumerate().skip(1) {
                if p > row[best] {
                    best = z;
                    tied = false;
                } else if p == row[best] {
                    tied = true;
                }
            }
            if tied {
                tie_count += 1;
            }
            best
        })
        .collect();
    DummyLabels { values, m: pred.m(), tie_count }
}

/// Per-example hard-pair conditional `count(y_i, z_i) / count(z_i)`.
fn hard_conditionals(labels: &TargetLabels, dummy: &DummyLabels) -> Vec<f64> {
    let (c, m) = (labels.c(), dummy.m());
    let mut pair = vec![0usize; c * m];
    let mut column = vec![0usize; m];
    for (&y, &z) in labels.values().iter().zip(dummy.values()) {
        pair[y * m + z] += 1;
        column[z] += 1;
    }
    labels.values().iter().zip(dummy.values()).map(|(&y, &z)| pair[y * m + z] as f64 / column[z] as f64).collect()
}

/// `NCE(Y | Z) = (1/n) Σ_i log P(y_i | z_i)` with `P` counted from the hard
/// (y_i, z_i) pairs.
pub fn nce_score(labels: &TargetLabels, dummy: &DummyLabels) -> Result<Score> {
    if labels.n() != dummy.n() {
        return Err(Error::LengthMismatch { left: labels.n(), right: dummy.n() });
    }
    let cond = hard_conditionals(labels, dummy);
    let value = exact_mean(cond.iter().map(|p| p.ln()), cond.len());
    Score::new(Measure::Nce, value, labels.n(), dummy.m(), labels.c())
}

/// Both terms of the NCE-based lower bound on LEEP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    pub nce: f64,
    /// `(1/n) Σ_i log θ(x_i)_{z_i}`, the average log-probability of the
    /// dummy labels.
    pub dummy_log_likelihood: f64,
}

impl LowerBound {
    pub fn value(&self) -> f64 {
        self.nce + self.dummy_log_likelihood
    }
}

fn dummy_log_likelihood(pred: &PredictionMatrix, dummy: &DummyLabels) -> f64 {
    exact_mean(pred.rows().zip(dummy.values()).map(|(row, &z)| row[z].ln()), pred.n())
}

/// `NCE(Y | Z) + (1/n) Σ_i log θ(x_i)_{z_i}` with hard-pair NCE.
///
/// This equals the soft-conditional bound of [`soft_pair_bound`] when every
/// prediction row is one-hot. For soft predictions the two conditionals
/// differ and this quantity can exceed LEEP.
pub fn leep_lower_bound(pred: &PredictionMatrix, labels: &TargetLabels) -> Result<LowerBound> {
    if pred.n() != labels.n() {
        return Err(Error::LengthMismatch { left: pred.n(), right: labels.n() });
    }
    let dummy = dummy_labels(pred);
    let nce = nce_score(labels, &dummy)?.value;
    Ok(LowerBound { nce, dummy_log_likelihood: dummy_log_likelihood(pred, &dummy) })
}

/// `(1/n) Σ_i log(P(y_i | z_i) θ(x_i)_{z_i})` where `P` is the soft empirical
/// conditional used by LEEP itself. Dropping every term but `z_i` from the
/// EEP's inner sum can only lower it, so this never exceeds LEEP.
pub fn soft_pair_bound(pred: &PredictionMatrix, labels: &TargetLabels) -> Result<LowerBound> {
    let cond = conditional_from_joint(&empirical_joint(pred, labels)?);
    let dummy = dummy_labels(pred);
    let nce = exact_mean(labels.values().iter().zip(dummy.values()).map(|(&y, &z)| cond.get(y, z).ln()), pred.n());
    Ok(LowerBound { nce, dummy_log_likelihood: dummy_log_likelihood(pred, &dummy) })
}

/// Result of an H-score computation, with the numerical rank of the feature
/// covariance for range checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HScore {
    pub score: Score,
    pub covariance_rank: usize,
}

/// `trace(pinv(Σ_f) Σ_g)`.
///
/// Σ_f is the (1/n) covariance of the globally centered features and
/// Σ_g = Σ_y (n_y/n) g_y g_yᵀ with g_y the mean centered feature of class y.
/// The pseudo-inverse comes from a symmetric eigendecomposition with
/// relative cutoff [`PINV_RCOND`].
pub fn h_score(features: &FeatureMatrix, labels: &TargetLabels) -> Result<HScore> {
    let (n, d) = (features.n(), features.d());
    if n != labels.n() {
        return Err(Error::LengthMismatch { left: n, right: labels.n() });
    }
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let c = labels.c();
    let mean: Vec<f64> = (0..d).map(|k| exact_mean(features.rows().map(|r| r[k]), n)).collect();
    let centered = DMatrix::from_fn(n, d, |i, k| features.row(i)[k] - mean[k]);

    let cov_f = DMatrix::from_fn(d, d, |a, b| {
        exact_sum(centered.column(a).iter().zip(centered.column(b).iter()).map(|(x, y)| x * y)) / n as f64
    });

    let counts = labels.class_counts();
    let mut class_means = DMatrix::<f64>::zeros(c, d);
    for k in 0..d {
        for y in 0..c {
            let total =
                exact_sum(labels.values().iter().enumerate().filter(|(_, &l)| l == y).map(|(i, _)| centered[(i, k)]));
            class_means[(y, k)] = total / counts[y] as f64;
        }
    }
    let cov_g = DMatrix::from_fn(d, d, |a, b| {
        exact_sum((0..c).map(|y| counts[y] as f64 / n as f64 * class_means[(y, a)] * class_means[(y, b)]))
    });

    let eig = SymmetricEigen::try_new(cov_f, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalFailure("symmetric eigendecomposition did not converge".into()))?;
    let lambda_max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let cutoff = PINV_RCOND * lambda_max;
    let mut rank = 0;
    let mut terms = Vec::with_capacity(d);
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda_max <= 0.0 || lambda <= cutoff {
            continue;
        }
        rank += 1;
        let v = eig.eigenvectors.column(j);
        let quad = (v.transpose() * &cov_g * v)[(0, 0)];
        terms.push(quad / lambda);
    }
    let trace = exact_sum(terms);
    if trace < -NEGATIVE_TRACE_TOLERANCE {
        return Err(Error::NegativeTrace(trace));
    }
    let score = Score::new(Measure::HScore, trace.max(0.0), n, d, c)?;
    Ok(HScore { score, covariance_rank: rank })
}
