//! LEEP computed from raw features through a softmax, for representations
//! that come without a classifier head.
//!
//! cargo run --example feature_leep

use xfer_score::{feature_softmax_leep, FeatureMatrix, TargetLabels};

fn main() -> xfer_score::Result<()> {
    let labels = TargetLabels::new(&[0, 1, 0, 1], None)?;

    let flat = FeatureMatrix::from_rows(&[[0.0, 0.0]; 4])?;
    println!("constant features: {:.6}", feature_softmax_leep(&flat, &labels)?.value);

    for scale in [0.5, 2.0, 8.0, 1e4] {
        let rows: Vec<[f64; 2]> =
            labels.values().iter().map(|&y| if y == 0 { [scale, 0.0] } else { [0.0, scale] }).collect();
        let features = FeatureMatrix::from_rows(&rows)?;
        println!("label-aligned features, scale {scale:>7}: {:.6}", feature_softmax_leep(&features, &labels)?.value);
    }
    Ok(())
}
