//! Sweeps the planted alignment, scores every task, and reports how well
//! each measure tracks the hold-out accuracy, plus the binned curve.
//!
//! cargo run --release --example correlation_sweep

use xfer_score::analysis::bin_records;
use xfer_score::synth::{sweep, SynthSpec};
use xfer_score::{correlate, Measure, MetricKind};

fn main() -> xfer_score::Result<()> {
    let alignments: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let records = sweep(&SynthSpec::default(), &alignments, 20)?;
    println!("{} tasks", records.len());

    for measure in [Measure::Leep, Measure::Nce, Measure::HScore] {
        let rep = correlate(&records, measure, MetricKind::Accuracy)?;
        println!(
            "{:<7} r = {:.4}  p = {:.2e}  fit: acc = {:.3} * score + {:.3}",
            measure.to_string(),
            rep.r,
            rep.p_value,
            rep.fit_slope,
            rep.fit_intercept
        );
    }

    let bins = bin_records(&records, Measure::Leep, 5)?;
    println!("LEEP level  range                 tasks  mean accuracy");
    for l in &bins.levels {
        let mean = l.mean_metric.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!("{:>10}  [{:>8.4}, {:>8.4}]  {:>5}  {mean}", l.level, l.lower, l.upper, l.count);
    }
    Ok(())
}
