//! LEEP: the average log-likelihood of the expected empirical predictor.
//!
//! Given the source model's predicted distributions θ(x_i) over its own
//! labels Z and the true target labels y_i, the score is built in three
//! steps:
//!
//! 1. the empirical joint `P(y, z) = (1/n) Σ_{i: y_i = y} θ(x_i)_z`,
//! 2. the conditional `P(y | z) = P(y, z) / P(z)`,
//! 3. the expected empirical predictor (EEP) `p(y | x) = Σ_z P(y | z) θ(x)_z`,
//!    whose average log-likelihood on the target data is the score.
//!
//! Sums are correctly rounded (see [`crate::sum`]), so the score is
//! bit-identical under any reordering of examples, source labels or target
//! classes.

use crate::error::{Error, Result};
use crate::sum::{exact_mean, exact_sum, ExactSum};
use crate::types::{
    ConditionalDistribution, FeatureMatrix, JointDistribution, Measure, PredictionMatrix, Score, TargetLabels,
};

/// Slack allowed above 1 for an EEP probability before it counts as a bound
/// violation; rows are stochastic only to within this.
const INNER_SUM_SLACK: f64 = 1e-12;

fn check_lengths(pred: &PredictionMatrix, labels: &TargetLabels) -> Result<()> {
    if pred.n() != labels.n() {
        return Err(Error::LengthMismatch { left: pred.n(), right: labels.n() });
    }
    Ok(())
}

pub fn empirical_joint(pred: &PredictionMatrix, labels: &TargetLabels) -> Result<JointDistribution> {
    check_lengths(pred, labels)?;
    Ok(joint_from_rows(pred.rows(), labels.values().iter().copied(), labels.c(), pred.m(), pred.n()))
}

/// Joint over an arbitrary row subset, without requiring every class present.
pub(crate) fn joint_from_rows<'a>(
    rows: impl Iterator<Item = &'a [f64]>,
    labels: impl Iterator<Item = usize>,
    c: usize,
    m: usize,
    n: usize,
) -> JointDistribution {
    let mut acc = vec![ExactSum::new(); c * m];
    for (row, y) in rows.zip(labels) {
        for (z, &p) in row.iter().enumerate() {
            if p != 0.0 {
                acc[y * m + z].add(p);
            }
        }
    }
    let values = acc.iter().map(|a| a.value() / n as f64).collect();
    JointDistribution { c, m, values }
}

pub fn conditional_from_joint(joint: &JointDistribution) -> ConditionalDistribution {
    let (c, m) = (joint.c(), joint.m());
    let marginal = joint.source_marginal();
    let supported: Vec<bool> = marginal.iter().map(|&p| p > 0.0).collect();
    let mut values = vec![0.0; c * m];
    for y in 0..c {
        for z in 0..m {
            if supported[z] {
                values[y * m + z] = joint.get(y, z) / marginal[z];
            }
        }
    }
    ConditionalDistribution { c, m, values, supported }
}

/// Predicted target-label distribution of the EEP for one input.
///
/// Mass the input puts on unsupported source labels is dropped, so the
/// output sums to less than 1 in that case.
pub fn eep_predict(theta_row: &[f64], cond: &ConditionalDistribution) -> Result<Vec<f64>> {
    if theta_row.len() != cond.m() {
        return Err(Error::DimensionMismatch { expected: cond.m(), got: theta_row.len() });
    }
    Ok((0..cond.c()).map(|y| eep_probability(theta_row, cond, y)).collect())
}

fn eep_probability(theta_row: &[f64], cond: &ConditionalDistribution, y: usize) -> f64 {
    let m = cond.m();
    let cond_row = &cond.values()[y * m..(y + 1) * m];
    exact_sum(cond_row.iter().zip(theta_row).map(|(&q, &p)| q * p))
}

/// Per-example EEP probabilities of the true label, each checked to lie in
/// (0, 1].
pub fn inner_sums(pred: &PredictionMatrix, labels: &TargetLabels) -> Result<Vec<f64>> {
    let joint = empirical_joint(pred, labels)?;
    let cond = conditional_from_joint(&joint);
    pred.rows()
        .zip(labels.values())
        .enumerate()
        .map(|(i, (row, &y))| {
            let s = eep_probability(row, &cond, y);
            if s.is_nan() || s <= 0.0 || s > 1.0 + INNER_SUM_SLACK {
                return Err(Error::BoundViolation(format!("EEP probability of example {i} is {s}, outside (0, 1]")));
            }
            Ok(s.min(1.0))
        })
        .collect()
}

pub fn leep_score(pred: &PredictionMatrix, labels: &TargetLabels) -> Result<Score> {
    let sums = inner_sums(pred, labels)?;
    let value = exact_mean(sums.iter().map(|s| s.ln()), sums.len());
    Score::new(Measure::Leep, value, pred.n(), pred.m(), labels.c())
}

/// Row-wise softmax, shifted by the row maximum.
pub fn softmax_rows(features: &FeatureMatrix) -> Result<PredictionMatrix> {
    let d = features.d();
    let mut values = Vec::with_capacity(features.n() * d);
    for row in features.rows() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|&v| (v - max).exp()).collect();
        let total = exact_sum(exps.iter().copied());
        values.extend(exps.iter().map(|e| e / total));
    }
    PredictionMatrix::new(features.n(), d, values)
}

/// LEEP on the softmax of the feature vectors instead of the source model's
/// output distribution. No temperature or feature normalization is applied.
pub fn feature_softmax_leep(features: &FeatureMatrix, labels: &TargetLabels) -> Result<Score> {
    if features.n() != labels.n() {
        return Err(Error::LengthMismatch { left: features.n(), right: labels.n() });
    }
    if features.d() < 2 {
        return Err(Error::DegenerateDimension { what: "feature dimensions", min: 2, got: features.d() });
    }
    let pred = softmax_rows(features)?;
    let score = leep_score(&pred, labels)?;
    Score::new(Measure::FeatureLeep, score.value, score.n, score.m, score.c)
}
