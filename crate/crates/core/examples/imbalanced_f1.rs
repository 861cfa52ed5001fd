//! F1 instead of accuracy for an imbalanced binary target, as the transfer
//! metric in a correlation study.
//!
//! cargo run --example imbalanced_f1

use xfer_score::analysis::{f1_macro, minority_class};
use xfer_score::{correlate, f1_binary, ExperimentRecord, Measure, MetricKind};

fn main() -> xfer_score::Result<()> {
    let actual = [0, 0, 0, 0, 0, 0, 0, 0, 1, 1];
    let always_zero = [0; 10];
    let decent = [0, 0, 0, 0, 0, 0, 0, 1, 1, 0];

    let pos = minority_class(&actual)?;
    println!("positive class (minority): {pos}");
    for (name, predicted) in [("always 0", &always_zero), ("decent", &decent)] {
        let acc = predicted.iter().zip(&actual).filter(|(p, a)| p == a).count() as f64 / actual.len() as f64;
        println!(
            "{name:<9} accuracy {acc:.2}  F1 {:.3}  macro F1 {:.3}",
            f1_binary(predicted, &actual, pos)?,
            f1_macro(predicted, &actual)?
        );
    }

    // Scores against F1 metrics from four hypothetical fine-tuning runs.
    let runs = [(-1.2, 0.31), (-0.9, 0.45), (-0.6, 0.52), (-0.3, 0.74)];
    let records: Vec<ExperimentRecord> = runs
        .iter()
        .enumerate()
        .map(|(k, &(leep, f1))| {
            ExperimentRecord::new(format!("run{k}")).with_score(Measure::Leep, leep).with_metric(MetricKind::F1, f1)
        })
        .collect::<Result<_, _>>()?;
    let rep = correlate(&records, Measure::Leep, MetricKind::F1)?;
    println!("LEEP vs F1: r = {:.4}, p = {:.4}", rep.r, rep.p_value);
    Ok(())
}
