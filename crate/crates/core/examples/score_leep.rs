//! LEEP on a small hand-made target set, with the intermediate
//! distributions printed.
//!
//! cargo run --example score_leep

use xfer_score::{conditional_from_joint, eep_predict, empirical_joint, leep_score, PredictionMatrix, TargetLabels};

fn main() -> xfer_score::Result<()> {
    // Source model outputs over two source labels for three target examples.
    let pred = PredictionMatrix::from_rows(&[[0.9, 0.1], [0.2, 0.8], [0.6, 0.4]])?;
    let labels = TargetLabels::new(&[0, 1, 0], None)?;

    let joint = empirical_joint(&pred, &labels)?;
    let cond = conditional_from_joint(&joint);
    println!("P(y, z):");
    for y in 0..labels.c() {
        println!("  y={y}: {:.5} {:.5}", joint.get(y, 0), joint.get(y, 1));
    }
    println!("P(y | z):");
    for y in 0..labels.c() {
        println!("  y={y}: {:.5} {:.5}", cond.get(y, 0), cond.get(y, 1));
    }
    for (i, row) in pred.rows().enumerate() {
        let eep = eep_predict(row, &cond)?;
        println!("EEP(x_{i}) = {eep:.5?}, true label {}", labels.get(i));
    }

    let score = leep_score(&pred, &labels)?;
    println!("LEEP = {:.6}", score.value);
    Ok(())
}
