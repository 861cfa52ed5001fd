//! LEEP next to NCE and H-score on one synthetic task.
//!
//! cargo run --example baselines

use xfer_score::synth::{generate_task, SynthSpec};
use xfer_score::{dummy_labels, h_score, leep_score, nce_score};

fn main() -> xfer_score::Result<()> {
    for alignment in [0.0, 0.5, 1.0] {
        let task = generate_task(&SynthSpec { alignment, seed: 3, ..SynthSpec::default() })?;
        let dummy = dummy_labels(&task.predictions);
        let leep = leep_score(&task.predictions, &task.labels)?.value;
        let nce = nce_score(&task.labels, &dummy)?.value;
        let h = h_score(&task.features, &task.labels)?;
        println!(
            "alignment {alignment:.1}: LEEP {leep:>9.5}  NCE {nce:>9.5}  H {:>7.4} (rank {}), argmax ties {}",
            h.score.value,
            h.covariance_rank,
            dummy.tie_count()
        );
    }
    Ok(())
}
