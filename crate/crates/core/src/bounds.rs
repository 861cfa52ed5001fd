//! Both sides of the sandwich around LEEP, evaluated on concrete data.
//!
//! Upper side: the best of {retrained linear head, EEP} can never fall below
//! LEEP. Lower side, two forms: the NCE bound with hard argmax pairs, and the
//! same expression with the soft conditional LEEP itself uses. Only the soft
//! form is guaranteed by the log-monotonicity argument; the hard form agrees
//! with it when prediction rows are one-hot and may exceed LEEP otherwise.

use serde::Serialize;

use crate::baselines::{leep_lower_bound, soft_pair_bound, LowerBound};
use crate::error::Result;
use crate::head::{two_stage_optimal, TrainConfig, TwoStageResult};
use crate::leep::leep_score;
use crate::types::{FeatureMatrix, PredictionMatrix, TargetLabels};

/// Slack on the lower-bound comparisons for rounding in the two sides.
pub const LOWER_BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub leep: f64,
    pub two_stage: TwoStageResult,
    /// `leep <= l_star`, checked exactly.
    pub optimal_upper: Inequality,
    /// `nce + mean log θ_{z_i} <= leep` with hard-pair NCE.
    pub nce_lower: Inequality,
    pub nce_terms: (f64, f64),
    /// `mean log(P(y_i|z_i) θ_{z_i}) <= leep` with LEEP's own conditional.
    pub soft_lower: Inequality,
    pub soft_terms: (f64, f64),
}

fn terms(b: &LowerBound) -> (f64, f64) {
    (b.nce, b.dummy_log_likelihood)
}

pub fn verify_bounds(
    pred: &PredictionMatrix,
    features: &FeatureMatrix,
    labels: &TargetLabels,
    cfg: &TrainConfig,
) -> Result<BoundsReport> {
    let leep = leep_score(pred, labels)?.value;
    let two_stage = two_stage_optimal(pred, features, labels, cfg)?;
    let hard = leep_lower_bound(pred, labels)?;
    let soft = soft_pair_bound(pred, labels)?;
    Ok(BoundsReport {
        leep,
        optimal_upper: Inequality { lhs: leep, rhs: two_stage.l_star, holds: leep <= two_stage.l_star },
        two_stage,
        nce_lower: Inequality { lhs: hard.value(), rhs: leep, holds: hard.value() <= leep + LOWER_BOUND_SLACK },
        nce_terms: terms(&hard),
        soft_lower: Inequality { lhs: soft.value(), rhs: leep, holds: soft.value() <= leep + LOWER_BOUND_SLACK },
        soft_terms: terms(&soft),
    })
}
