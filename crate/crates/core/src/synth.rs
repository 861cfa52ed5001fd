//! Synthetic source-model/target-task pairs with a planted, tunable amount of
//! transferability.
//!
//! A surjective map g from source labels to target classes is planted. For
//! each example the "source model" puts its mass near a source label z: with
//! probability `alignment` a z with g(z) = y_i, otherwise any z. Features are
//! the mean vector of that z (the unit vector e_z) plus Gaussian noise. At
//! alignment 1 the predictions determine the labels; at alignment 0 they are
//! independent of them.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::analysis::{ExperimentRecord, MetricKind};
use crate::baselines::{dummy_labels, h_score, nce_score};
use crate::error::{Error, Result};
use crate::leep::{conditional_from_joint, eep_predict, joint_from_rows, leep_score};
use crate::types::{FeatureMatrix, Measure, PredictionMatrix, TargetLabels};

/// Dirichlet concentration on the planted source label.
pub const PLANTED_CONCENTRATION: f64 = 10.0;
/// Dirichlet concentration on every other source label.
pub const BACKGROUND_CONCENTRATION: f64 = 0.1;
/// Fraction of a task's examples used to fit the EEP for the hold-out metric.
pub const TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub m: usize,
    pub c: usize,
    pub alignment: f64,
    pub noise: f64,
    pub seed: u64,
    /// Draw prediction rows from a Dirichlet around the chosen source label
    /// instead of emitting an exact one-hot row.
    pub perturb: bool,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self { n: 500, m: 10, c: 5, alignment: 0.5, noise: 0.5, seed: 0, perturb: true }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSpec(msg));
        if self.c < 2 {
            return fail(format!("need at least 2 target classes, got {}", self.c));
        }
        if self.m < self.c {
            return fail(format!("need m >= c, got m = {} and c = {}", self.m, self.c));
        }
        if self.n < self.c {
            return fail(format!("need n >= c so every class occurs, got n = {}", self.n));
        }
        if !(0.0..=1.0).contains(&self.alignment) {
            return fail(format!("alignment {} outside [0, 1]", self.alignment));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return fail(format!("noise {} must be a nonnegative number", self.noise));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTask {
    pub predictions: PredictionMatrix,
    pub features: FeatureMatrix,
    pub labels: TargetLabels,
    /// Planted target class of each source label.
    pub source_to_target: Vec<usize>,
}

/// SplitMix64 finalizer; used to derive independent per-task seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

pub fn generate_task(spec: &SynthSpec) -> Result<SyntheticTask> {
    spec.validate()?;
    let SynthSpec { n, m, c, .. } = *spec;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut rng);
    let mut source_to_target = vec![0; m];
    for (k, &z) in perm.iter().enumerate() {
        source_to_target[z] = k % c;
    }
    let preimages: Vec<Vec<usize>> = (0..c).map(|y| (0..m).filter(|&z| source_to_target[z] == y).collect()).collect();

    let mut labels: Vec<usize> = (0..n).map(|i| if i < c { i } else { rng.random_range(0..c) }).collect();
    labels.shuffle(&mut rng);

    let planted = Gamma::new(PLANTED_CONCENTRATION, 1.0).expect("valid shape");
    let background = Gamma::new(BACKGROUND_CONCENTRATION, 1.0).expect("valid shape");

    let mut pred = Vec::with_capacity(n * m);
    let mut feats = Vec::with_capacity(n * m);
    for &y in &labels {
        let z = if rng.random::<f64>() < spec.alignment {
            *preimages[y].choose(&mut rng).expect("g is surjective")
        } else {
            rng.random_range(0..m)
        };
        if spec.perturb {
            let draws: Vec<f64> =
                (0..m).map(|k| if k == z { planted.sample(&mut rng) } else { background.sample(&mut rng) }).collect();
            let total: f64 = draws.iter().sum();
            pred.extend(draws.iter().map(|g| g / total));
        } else {
            pred.extend((0..m).map(|k| if k == z { 1.0 } else { 0.0 }));
        }
        for k in 0..m {
            let centre = if k == z { 1.0 } else { 0.0 };
            let eps: f64 = StandardNormal.sample(&mut rng);
            feats.push(centre + spec.noise * eps);
        }
    }

    Ok(SyntheticTask {
        predictions: PredictionMatrix::new(n, m, pred)?,
        features: FeatureMatrix::new(n, m, feats)?,
        labels: TargetLabels::from_indices(&labels, Some(c))?,
        source_to_target,
    })
}

/// Accuracy of the argmax EEP fitted on a seeded 80% split and evaluated on
/// the remaining 20%. Ties and all-zero predictions go to the lowest class.
pub fn eep_holdout_accuracy(task: &SyntheticTask, seed: u64) -> Result<f64> {
    let n = task.labels.n();
    let n_train = ((n as f64) * TRAIN_FRACTION).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::InsufficientData(format!("cannot split {n} examples 80/20")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train, test) = order.split_at(n_train);

    let pred = &task.predictions;
    let joint = joint_from_rows(
        train.iter().map(|&i| pred.row(i)),
        train.iter().map(|&i| task.labels.get(i)),
        task.labels.c(),
        pred.m(),
        train.len(),
    );
    let cond = conditional_from_joint(&joint);
    let mut correct = 0;
    for &i in test {
        let probs = eep_predict(pred.row(i), &cond)?;
        let guess = probs.iter().enumerate().fold(0, |best, (y, &p)| if p > probs[best] { y } else { best });
        if guess == task.labels.get(i) {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.len() as f64)
}

/// Scores one task with LEEP, NCE and H-score and attaches the EEP hold-out
/// accuracy as its transfer metric.
pub fn evaluate_task(task_id: impl Into<String>, task: &SyntheticTask, split_seed: u64) -> Result<ExperimentRecord> {
    let leep = leep_score(&task.predictions, &task.labels)?.value;
    let nce = nce_score(&task.labels, &dummy_labels(&task.predictions))?.value;
    let h = h_score(&task.features, &task.labels)?.score.value;
    ExperimentRecord::new(task_id)
        .with_score(Measure::Leep, leep)
        .with_score(Measure::Nce, nce)
        .with_score(Measure::HScore, h)
        .with_metric(MetricKind::Accuracy, eep_holdout_accuracy(task, split_seed)?)
}

/// Generates and scores `tasks_per_point` tasks at every alignment.
///
/// Task `k` overall gets seed `derive_seed(base.seed, k)`, so each record is
/// independent of how the sweep is scheduled.
pub fn sweep(base: &SynthSpec, alignments: &[f64], tasks_per_point: usize) -> Result<Vec<ExperimentRecord>> {
    if alignments.is_empty() {
        return Err(Error::InvalidSpec("alignment list is empty".into()));
    }
    let mut records = Vec::with_capacity(alignments.len() * tasks_per_point);
    for (a, &alignment) in alignments.iter().enumerate() {
        for t in 0..tasks_per_point {
            let index = (a * tasks_per_point + t) as u64;
            let seed = derive_seed(base.seed, index);
            let spec = SynthSpec { alignment, seed, ..base.clone() };
            let task = generate_task(&spec)?;
            records.push(evaluate_task(format!("a{alignment:.3}-t{t:03}"), &task, splitmix64(seed))?);
        }
    }
    Ok(records)
}
