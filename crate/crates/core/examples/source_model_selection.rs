//! Picks the best of several source models for one target task. Each
//! candidate is a synthetic model with a different alignment to the target.
//!
//! cargo run --example source_model_selection

use xfer_score::synth::{eep_holdout_accuracy, generate_task, SynthSpec};
use xfer_score::{leep_score, rank_models, ExperimentRecord, Measure};

fn main() -> xfer_score::Result<()> {
    let candidates = [("resnet-ish", 0.9), ("vgg-ish", 0.6), ("tiny", 0.3), ("random-init", 0.0)];
    let mut records = Vec::new();
    for (k, (name, alignment)) in candidates.iter().enumerate() {
        let task = generate_task(&SynthSpec { alignment: *alignment, seed: 100 + k as u64, ..SynthSpec::default() })?;
        let leep = leep_score(&task.predictions, &task.labels)?.value;
        println!("{name:<12} LEEP {leep:>9.5}  hold-out accuracy {:.3}", eep_holdout_accuracy(&task, 1)?);
        records.push(ExperimentRecord::new(*name).with_score(Measure::Leep, leep));
    }
    let ranking = rank_models(&records, Measure::Leep)?;
    println!("ranking:");
    for (k, m) in ranking.ranking.iter().enumerate() {
        println!("  {}. {}{}", k + 1, m.model_id, if m.tied { " (tied)" } else { "" });
    }
    println!("selected: {}", ranking.best().model_id);
    Ok(())
}
