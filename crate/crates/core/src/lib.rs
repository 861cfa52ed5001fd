//! Transferability estimation from a source model's exported outputs.
//!
//! The toolkit scores how well a pre-trained classifier should transfer to a
//! labeled target data set, using only one forward pass of the model over the
//! target inputs:
//!
//! - [`leep`]: LEEP, the average log-likelihood of the expected empirical
//!   predictor, and its feature-softmax variant;
//! - [`baselines`]: negative conditional entropy over argmax labels, and the
//!   H-score of a feature representation;
//! - [`head`] and [`bounds`]: a retrained linear head and the inequalities
//!   that sandwich LEEP;
//! - [`analysis`]: correlation with transfer performance, transferability
//!   levels, F1, source-model ranking;
//! - [`synth`]: synthetic tasks with planted transferability;
//! - [`io`]: matrix, label and manifest formats.
//!
//! ```
//! use xfer_score::{leep_score, PredictionMatrix, TargetLabels};
//!
//! let pred = PredictionMatrix::from_rows(&[[0.9, 0.1], [0.2, 0.8], [0.6, 0.4]]).unwrap();
//! let labels = TargetLabels::new(&[0, 1, 0], None).unwrap();
//! let score = leep_score(&pred, &labels).unwrap();
//! assert!(score.value < 0.0 && score.value > -0.41);
//! ```

pub mod analysis;
pub mod baselines;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod head;
pub mod io;
pub mod leep;
pub mod sum;
pub mod synth;
pub mod types;

pub use analysis::{
    bin_levels, correlate, f1_binary, p_value_two_sided, pearson, rank_models, CorrelationReport, ExperimentRecord,
    MetricKind, RankingReport,
};
pub use baselines::{dummy_labels, h_score, leep_lower_bound, nce_score, DummyLabels};
pub use error::{Error, Result};
pub use head::{avg_log_likelihood, train_linear_head, two_stage_optimal, LinearHead, TrainConfig};
pub use leep::{conditional_from_joint, eep_predict, empirical_joint, feature_softmax_leep, leep_score};
pub use types::{
    ConditionalDistribution, FeatureMatrix, JointDistribution, Measure, PredictionMatrix, Score, TargetLabels,
};

/// Computes one measure. LEEP and NCE need predictions; H-score and
/// feature LEEP need features.
pub fn compute_score(
    measure: Measure,
    pred: Option<&PredictionMatrix>,
    features: Option<&FeatureMatrix>,
    labels: &TargetLabels,
) -> Result<Score> {
    let need = |what: &str| Error::InsufficientData(format!("{measure} needs {what}"));
    match measure {
        Measure::Leep => leep_score(pred.ok_or_else(|| need("predictions"))?, labels),
        Measure::Nce => {
            let pred = pred.ok_or_else(|| need("predictions"))?;
            if pred.n() != labels.n() {
                return Err(Error::LengthMismatch { left: pred.n(), right: labels.n() });
            }
            nce_score(labels, &dummy_labels(pred))
        }
        Measure::HScore => Ok(h_score(features.ok_or_else(|| need("features"))?, labels)?.score),
        Measure::FeatureLeep => feature_softmax_leep(features.ok_or_else(|| need("features"))?, labels),
    }
}
