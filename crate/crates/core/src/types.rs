//! Validated domain types shared by every measure.
//!
//! Construction is the only place preconditions are checked. Once a
//! [`PredictionMatrix`], [`TargetLabels`] or [`FeatureMatrix`] exists, the
//! scoring code can rely on its invariants without re-checking.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::exact_sum;

/// Largest deviation from 1 a prediction row may have before loading fails.
pub const ROW_SUM_LOAD_TOLERANCE: f64 = 1e-3;

/// Rows closer to 1 than this are left untouched by renormalization.
pub const ROW_SUM_EXACT_TOLERANCE: f64 = 1e-12;

/// n×m row-stochastic matrix: row i is the source model's predicted
/// distribution over its m labels for target example i.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    n: usize,
    m: usize,
    values: Vec<f64>,
}

impl PredictionMatrix {
    /// Validates `n` rows of `m` values (row-major) and renormalizes each row.
    ///
    /// Rows with a negative entry, or whose sum is further than
    /// [`ROW_SUM_LOAD_TOLERANCE`] from 1, are rejected. Rows already within
    /// [`ROW_SUM_EXACT_TOLERANCE`] of 1 are kept bit-for-bit, which makes
    /// validation idempotent.
    pub fn new(n: usize, m: usize, mut values: Vec<f64>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::EmptyMatrix);
        }
        if m < 2 {
            return Err(Error::DegenerateDimension { what: "source labels", min: 2, got: m });
        }
        if values.len() != n * m {
            return Err(Error::DimensionMismatch { expected: n * m, got: values.len() });
        }
        for (row, chunk) in values.chunks_exact_mut(m).enumerate() {
            for (col, &v) in chunk.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row, col });
                }
                if v < 0.0 {
                    return Err(Error::NegativeEntry { row, col });
                }
            }
            let sum = exact_sum(chunk.iter().copied());
            if (sum - 1.0).abs() > ROW_SUM_LOAD_TOLERANCE {
                return Err(Error::RowSumOutOfTolerance { row, sum });
            }
            if (sum - 1.0).abs() > ROW_SUM_EXACT_TOLERANCE {
                for v in chunk.iter_mut() {
                    *v /= sum;
                }
            }
        }
        Ok(Self { n, m, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let (n, m, values) = flatten_rows(rows)?;
        Self::new(n, m, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.m)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.m);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self::new(indices.len(), self.m, values)
    }
}

/// Dense 0-based target class indices, every class in `0..c` present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetLabels {
    c: usize,
    values: Vec<usize>,
}

impl TargetLabels {
    /// `c` is `declared_c` when given, otherwise one more than the largest label.
    pub fn new(raw: &[i64], declared_c: Option<usize>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyLabels);
        }
        let c = match declared_c {
            Some(c) => c,
            None => {
                let max = *raw.iter().max().expect("nonempty");
                if max < 0 {
                    return Err(Error::OutOfRange { index: 0 });
                }
                max as usize + 1
            }
        };
        let mut seen = vec![false; c];
        let mut values = Vec::with_capacity(raw.len());
        for (index, &y) in raw.iter().enumerate() {
            if y < 0 || y as u64 >= c as u64 {
                return Err(Error::OutOfRange { index });
            }
            seen[y as usize] = true;
            values.push(y as usize);
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::MissingClass(missing));
        }
        if c < 2 {
            return Err(Error::DegenerateDimension { what: "target classes", min: 2, got: c });
        }
        Ok(Self { c, values })
    }

    pub fn from_indices(values: &[usize], declared_c: Option<usize>) -> Result<Self> {
        let raw: Vec<i64> = values.iter().map(|&v| v as i64).collect();
        Self::new(&raw, declared_c)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn get(&self, i: usize) -> usize {
        self.values[i]
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.c];
        for &y in &self.values {
            counts[y] += 1;
        }
        counts
    }
}

/// n×d matrix of finite reals, typically penultimate-layer activations.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::EmptyMatrix);
        }
        if values.len() != n * d {
            return Err(Error::DimensionMismatch { expected: n * d, got: values.len() });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: k / d, col: k % d });
        }
        Ok(Self { n, d, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let (n, d, values) = flatten_rows(rows)?;
        Self::new(n, d, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.d)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl From<&PredictionMatrix> for FeatureMatrix {
    fn from(pred: &PredictionMatrix) -> Self {
        Self { n: pred.n, d: pred.m, values: pred.values.clone() }
    }
}

fn flatten_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<(usize, usize, Vec<f64>)> {
    let n = rows.len();
    let width = rows.first().map(|r| r.as_ref().len()).ok_or(Error::EmptyMatrix)?;
    let mut values = Vec::with_capacity(n * width);
    for (row, r) in rows.iter().enumerate() {
        let r = r.as_ref();
        if r.len() != width {
            return Err(Error::Ragged { row, len: r.len(), expected: width });
        }
        values.extend_from_slice(r);
    }
    Ok((n, width, values))
}

/// Empirical joint distribution over (target label, source label), c×m row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub(crate) c: usize,
    pub(crate) m: usize,
    pub(crate) values: Vec<f64>,
}

impl JointDistribution {
    pub fn c(&self) -> usize {
        self.c
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, y: usize, z: usize) -> f64 {
        self.values[y * self.m + z]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Marginal over source labels, each entry the exact column sum.
    pub fn source_marginal(&self) -> Vec<f64> {
        (0..self.m).map(|z| exact_sum((0..self.c).map(|y| self.get(y, z)))).collect()
    }
}

/// Conditional distribution of the target label given the source label.
///
/// Columns whose source label never receives probability mass are all-zero
/// and marked unsupported.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDistribution {
    pub(crate) c: usize,
    pub(crate) m: usize,
    pub(crate) values: Vec<f64>,
    pub(crate) supported: Vec<bool>,
}

impl ConditionalDistribution {
    pub fn c(&self) -> usize {
        self.c
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, y: usize, z: usize) -> f64 {
        self.values[y * self.m + z]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_supported(&self, z: usize) -> bool {
        self.supported[z]
    }

    pub fn support_mask(&self) -> &[bool] {
        &self.supported
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Leep,
    Nce,
    #[serde(rename = "hscore")]
    HScore,
    FeatureLeep,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::Leep, Measure::Nce, Measure::HScore, Measure::FeatureLeep];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Leep => "leep",
            Measure::Nce => "nce",
            Measure::HScore => "hscore",
            Measure::FeatureLeep => "feature_leep",
        }
    }

    /// Whether larger values mean better transferability and the value is
    /// a log-likelihood (≤ 0).
    pub fn is_log_likelihood(self) -> bool {
        !matches!(self, Measure::HScore)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "leep" => Ok(Measure::Leep),
            "nce" => Ok(Measure::Nce),
            "hscore" | "h-score" | "h_score" => Ok(Measure::HScore),
            "feature-leep" | "feature_leep" => Ok(Measure::FeatureLeep),
            other => Err(format!("unknown measure `{other}`")),
        }
    }
}

/// A transferability score together with the shape of the data it came from.
///
/// `m` is the source label count, or the feature dimension for H-score and
/// feature LEEP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub value: f64,
    pub measure: Measure,
    pub n: usize,
    pub m: usize,
    pub c: usize,
}

impl Score {
    pub(crate) fn new(measure: Measure, value: f64, n: usize, m: usize, c: usize) -> Result<Self> {
        let ok = value.is_finite() && if measure.is_log_likelihood() { value <= 0.0 } else { value >= 0.0 };
        if !ok {
            return Err(Error::BoundViolation(format!("{measure} score {value} out of range")));
        }
        Ok(Self { value, measure, n, m, c })
    }
}
