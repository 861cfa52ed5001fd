//! Checks the inequalities around LEEP on a synthetic task: the retrained
//! head or the EEP is at least as good as LEEP, and the two NCE-style lower
//! bounds.
//!
//! cargo run --example verify_bounds

use xfer_score::bounds::verify_bounds;
use xfer_score::synth::{generate_task, SynthSpec};
use xfer_score::TrainConfig;

fn main() -> xfer_score::Result<()> {
    let task = generate_task(&SynthSpec { n: 300, alignment: 0.6, ..SynthSpec::default() })?;
    let cfg = TrainConfig { epochs: 50, ..TrainConfig::default() };
    let r = verify_bounds(&task.predictions, &task.features, &task.labels, &cfg)?;

    println!("LEEP                         {:.6}", r.leep);
    println!("trained head log-likelihood  {:.6}", r.two_stage.head_log_likelihood);
    println!("best of the two ({:?})   {:.6}", r.two_stage.best, r.two_stage.l_star);
    println!("upper:  {:.6} <= {:.6}  {}", r.optimal_upper.lhs, r.optimal_upper.rhs, r.optimal_upper.holds);
    println!(
        "hard NCE lower: {:.6} + {:.6} = {:.6} <= {:.6}  {}",
        r.nce_terms.0, r.nce_terms.1, r.nce_lower.lhs, r.nce_lower.rhs, r.nce_lower.holds
    );
    println!(
        "soft lower:     {:.6} + {:.6} = {:.6} <= {:.6}  {}",
        r.soft_terms.0, r.soft_terms.1, r.soft_lower.lhs, r.soft_lower.rhs, r.soft_lower.holds
    );
    Ok(())
}
