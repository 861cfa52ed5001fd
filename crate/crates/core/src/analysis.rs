//! Evaluation methodology: how well a transferability score tracks actual
//! transfer performance across many tasks, and which source model it picks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::types::Measure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    #[default]
    Accuracy,
    F1,
}

impl std::str::FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "accuracy" => Ok(MetricKind::Accuracy),
            "f1" => Ok(MetricKind::F1),
            other => Err(format!("unknown metric `{other}`")),
        }
    }
}

/// One scored (source model, target task) pair, optionally with the
/// performance actually reached after transfer. In a ranking context
/// `task_id` identifies the source model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub task_id: String,
    pub scores: BTreeMap<Measure, f64>,
    pub transfer_metric: Option<f64>,
    #[serde(default)]
    pub metric_kind: MetricKind,
}

impl ExperimentRecord {
    pub fn new(task_id: impl Into<String>) -> Self {
        Self {
            task_id: task_id.into(),
            scores: BTreeMap::new(),
            transfer_metric: None,
            metric_kind: MetricKind::Accuracy,
        }
    }

    pub fn with_score(mut self, measure: Measure, value: f64) -> Self {
        self.scores.insert(measure, value);
        self
    }

    pub fn with_metric(mut self, kind: MetricKind, value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InsufficientData(format!("transfer metric {value} is outside [0, 1]")));
        }
        self.metric_kind = kind;
        self.transfer_metric = Some(value);
        Ok(self)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn check_pair(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch { left: xs.len(), right: ys.len() });
    }
    if xs.len() < 3 {
        return Err(Error::TooFewPoints(xs.len()));
    }
    Ok(())
}

/// Sample Pearson correlation, clamped to [-1, 1].
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_pair(xs, ys)?;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Two-sided p-value of a Pearson correlation under the Student-t null with
/// `n - 2` degrees of freedom: `I_{ν/(ν+t²)}(ν/2, 1/2)`.
pub fn p_value_two_sided(r: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::TooFewPoints(n));
    }
    if r.is_nan() || r.abs() > 1.0 {
        return Err(Error::InvalidConfig(format!("correlation {r} outside [-1, 1]")));
    }
    if r.abs() == 1.0 {
        return Ok(0.0);
    }
    let nu = (n - 2) as f64;
    // ν/(ν+t²) with t² = ν r²/(1-r²) simplifies to 1 - r².
    let x = 1.0 - r * r;
    Ok(beta_reg(nu / 2.0, 0.5, x).clamp(0.0, 1.0))
}

/// Equal-width binning of `scores` into `k` levels over [min, max]; the last
/// bin is closed on the right. A constant input maps everything to level 0.
pub fn bin_levels(scores: &[f64], k: usize) -> Result<Vec<usize>> {
    if scores.is_empty() {
        return Err(Error::Empty);
    }
    if k == 0 {
        return Err(Error::InvalidConfig("bin count must be at least 1".into()));
    }
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(min.is_finite() && max.is_finite()) {
        return Err(Error::InvalidConfig("scores must be finite".into()));
    }
    if max == min {
        return Ok(vec![0; scores.len()]);
    }
    let width = (max - min) / k as f64;
    Ok(scores.iter().map(|&s| (((s - min) / width).floor() as usize).min(k - 1)).collect())
}

/// Mean metric per level; `None` for levels nothing fell into.
pub fn level_means(levels: &[usize], metrics: &[f64], k: usize) -> Result<Vec<Option<f64>>> {
    if levels.len() != metrics.len() {
        return Err(Error::LengthMismatch { left: levels.len(), right: metrics.len() });
    }
    let mut sums = vec![(0.0, 0usize); k];
    for (&level, &metric) in levels.iter().zip(metrics) {
        let slot = sums.get_mut(level).ok_or_else(|| Error::InvalidConfig(format!("level {level} outside 0..{k}")))?;
        slot.0 += metric;
        slot.1 += 1;
    }
    Ok(sums.into_iter().map(|(s, c)| (c > 0).then(|| s / c as f64)).collect())
}

/// Point-wise average of per-task curves within each level, e.g. the
/// accuracy difference against a reference model after each epoch.
///
/// Curves in the same level are truncated to the shortest one.
pub fn average_curves_by_level(levels: &[usize], curves: &[Vec<f64>], k: usize) -> Result<Vec<Option<Vec<f64>>>> {
    if levels.len() != curves.len() {
        return Err(Error::LengthMismatch { left: levels.len(), right: curves.len() });
    }
    let mut grouped: Vec<Vec<&Vec<f64>>> = vec![Vec::new(); k];
    for (&level, curve) in levels.iter().zip(curves) {
        grouped
            .get_mut(level)
            .ok_or_else(|| Error::InvalidConfig(format!("level {level} outside 0..{k}")))?
            .push(curve);
    }
    Ok(grouped
        .into_iter()
        .map(|group| {
            let len = group.iter().map(|c| c.len()).min()?;
            Some((0..len).map(|t| group.iter().map(|c| c[t]).sum::<f64>() / group.len() as f64).collect())
        })
        .collect())
}

/// Per-level summary of an equal-width binning of one measure's scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: usize,
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mean_metric: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinReport {
    pub measure: Measure,
    pub levels: Vec<LevelSummary>,
    /// (task id, level) for every record that carried the measure.
    pub assignments: Vec<(String, usize)>,
}

/// Bins the records by their score on `measure` and averages the transfer
/// metric within each level. Records without a metric still count towards
/// the level populations.
pub fn bin_records(records: &[ExperimentRecord], measure: Measure, k: usize) -> Result<BinReport> {
    let scored: Vec<&ExperimentRecord> = records.iter().filter(|r| r.scores.contains_key(&measure)).collect();
    let scores: Vec<f64> = scored.iter().map(|r| r.scores[&measure]).collect();
    let levels = bin_levels(&scores, k)?;
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (max - min) / k as f64;

    let mut summaries: Vec<LevelSummary> = (0..k)
        .map(|level| LevelSummary {
            level,
            lower: min + level as f64 * width,
            upper: if level + 1 == k { max } else { min + (level + 1) as f64 * width },
            count: 0,
            mean_metric: None,
        })
        .collect();
    let mut metric_sums = vec![(0.0, 0usize); k];
    for (r, &level) in scored.iter().zip(&levels) {
        summaries[level].count += 1;
        if let Some(v) = r.transfer_metric {
            metric_sums[level].0 += v;
            metric_sums[level].1 += 1;
        }
    }
    for (s, (total, count)) in summaries.iter_mut().zip(metric_sums) {
        s.mean_metric = (count > 0).then(|| total / count as f64);
    }
    Ok(BinReport {
        measure,
        levels: summaries,
        assignments: scored.iter().zip(levels).map(|(r, l)| (r.task_id.clone(), l)).collect(),
    })
}

fn confusion(predicted: &[i64], actual: &[i64], positive: i64) -> (usize, usize, usize) {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (&p, &a) in predicted.iter().zip(actual) {
        match (p == positive, a == positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    (tp, fp, fn_)
}

fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> f64 {
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn distinct(values: &[i64]) -> Vec<i64> {
    let mut v = values.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// F1 of `positive_class`. Both label vectors together may use at most two
/// distinct values.
pub fn f1_binary(predicted: &[i64], actual: &[i64], positive_class: i64) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch { left: predicted.len(), right: actual.len() });
    }
    let all: Vec<i64> = predicted.iter().chain(actual).copied().collect();
    if distinct(&all).len() > 2 {
        return Err(Error::NotBinary);
    }
    if !actual.contains(&positive_class) {
        return Err(Error::MissingPositiveClass(positive_class));
    }
    let (tp, fp, fn_) = confusion(predicted, actual, positive_class);
    Ok(f1_from_counts(tp, fp, fn_))
}

/// The least frequent class of `actual`; ties go to the smaller label.
pub fn minority_class(actual: &[i64]) -> Result<i64> {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &a in actual {
        *counts.entry(a).or_default() += 1;
    }
    counts.into_iter().min_by_key(|&(label, count)| (count, label)).map(|(label, _)| label).ok_or(Error::Empty)
}

/// Unweighted mean of per-class F1 over the classes present in `actual`.
pub fn f1_macro(predicted: &[i64], actual: &[i64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch { left: predicted.len(), right: actual.len() });
    }
    let classes = distinct(actual);
    if classes.is_empty() {
        return Err(Error::Empty);
    }
    let total: f64 = classes
        .iter()
        .map(|&c| {
            let (tp, fp, fn_) = confusion(predicted, actual, c);
            f1_from_counts(tp, fp, fn_)
        })
        .sum();
    Ok(total / classes.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub measure: Measure,
    pub metric_kind: MetricKind,
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
    /// Least-squares line `metric ≈ slope · score + intercept`.
    pub fit_slope: f64,
    pub fit_intercept: f64,
}

/// Correlates one measure with the transfer metric over every record that
/// carries both and whose metric kind matches.
pub fn correlate(records: &[ExperimentRecord], measure: Measure, metric_kind: MetricKind) -> Result<CorrelationReport> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| r.metric_kind == metric_kind)
        .filter_map(|r| Some((*r.scores.get(&measure)?, r.transfer_metric?)))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} records carry both a {measure} score and a {metric_kind:?} metric; need 3",
            xs.len()
        )));
    }
    let r = pearson(&xs, &ys)?;
    let p_value = p_value_two_sided(r, xs.len())?;
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let fit_slope = sxy / sxx;
    Ok(CorrelationReport {
        measure,
        metric_kind,
        r,
        p_value,
        n: xs.len(),
        fit_slope,
        fit_intercept: my - fit_slope * mx,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedModel {
    pub model_id: String,
    pub score: f64,
    /// Shares its score with at least one other model.
    pub tied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub measure: Measure,
    pub ranking: Vec<RankedModel>,
}

impl RankingReport {
    pub fn best(&self) -> &RankedModel {
        &self.ranking[0]
    }

    pub fn has_ties(&self) -> bool {
        self.ranking.iter().any(|m| m.tied)
    }
}

/// Orders source models by descending score; exact ties keep input order.
pub fn rank_models(records: &[ExperimentRecord], measure: Measure) -> Result<RankingReport> {
    let mut ranking: Vec<RankedModel> = records
        .iter()
        .filter_map(|r| Some(RankedModel { model_id: r.task_id.clone(), score: *r.scores.get(&measure)?, tied: false }))
        .collect();
    if ranking.len() < 2 {
        return Err(Error::InsufficientData(format!("{} models carry a {measure} score; need 2", ranking.len())));
    }
    // Stable sort, so equal scores keep their input order.
    ranking.sort_by(|a, b| b.score.total_cmp(&a.score));
    for i in 1..ranking.len() {
        if ranking[i].score == ranking[i - 1].score {
            ranking[i].tied = true;
            ranking[i - 1].tied = true;
        }
    }
    Ok(RankingReport { measure, ranking })
}
