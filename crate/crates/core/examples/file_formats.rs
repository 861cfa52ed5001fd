//! Writes a synthetic task to disk in both matrix formats, builds a
//! manifest, reads everything back and scores it.
//!
//! cargo run --example file_formats

use xfer_score::cli::score_manifest;
use xfer_score::io::{
    read_manifest, read_matrix, write_labels, write_manifest, write_matrix, ExperimentManifest, ManifestEntry,
    MatrixFormat, RawMatrix,
};
use xfer_score::synth::{generate_task, SynthSpec};
use xfer_score::{Measure, MetricKind};

fn main() -> xfer_score::Result<()> {
    let dir = std::env::temp_dir().join("xfer-score-file-formats");
    std::fs::create_dir_all(&dir).map_err(|source| xfer_score::Error::Io { path: dir.clone(), source })?;

    let task = generate_task(&SynthSpec { n: 50, ..SynthSpec::default() })?;
    let p = &task.predictions;
    let raw = RawMatrix { rows: p.n(), cols: p.m(), values: p.values().to_vec() };
    write_matrix(&dir.join("pred.bin"), &raw, None)?;
    write_matrix(&dir.join("pred.csv"), &raw, Some(MatrixFormat::Csv))?;
    write_labels(&dir.join("labels.txt"), task.labels.values())?;

    let from_bin = read_matrix(&dir.join("pred.bin"), None)?;
    let from_csv = read_matrix(&dir.join("pred.csv"), None)?;
    println!("binary round trip identical: {}", from_bin == raw);
    println!("csv round trip identical:    {}", from_csv == raw);

    let entry = |id: &str, file: &str| ManifestEntry {
        model_id: id.into(),
        predictions_path: file.into(),
        labels_path: "labels.txt".into(),
        features_path: None,
        transfer_metric: Some(0.5),
        metric_kind: Some(MetricKind::Accuracy),
    };
    let manifest_path = dir.join("manifest.json");
    write_manifest(&manifest_path, &ExperimentManifest::new(vec![entry("bin", "pred.bin"), entry("csv", "pred.csv")]))?;

    for record in score_manifest(&read_manifest(&manifest_path)?, Measure::Leep)? {
        println!("{:<4} LEEP {:.12}", record.task_id, record.scores[&Measure::Leep]);
    }
    println!("files in {}", dir.display());
    Ok(())
}
