//! Command-line surface. The `xfer-score` binary is a thin wrapper around
//! [`run`]; exit code 0 is success, 1 a validation error, 2 an I/O error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{bin_records, correlate, rank_models, ExperimentRecord, MetricKind};
use crate::bounds::verify_bounds;
use crate::compute_score;
use crate::error::{Error, Result};
use crate::head::TrainConfig;
use crate::io::{
    read_labels, read_manifest, read_matrix, write_labels, write_manifest, write_matrix, write_report_csv,
    write_report_json, CsvReport, ExperimentManifest, ManifestEntry, MatrixFormat, RawMatrix,
};
use crate::synth::{derive_seed, eep_holdout_accuracy, generate_task, splitmix64, SynthSpec, SyntheticTask};
use crate::types::{FeatureMatrix, Measure, PredictionMatrix, TargetLabels};

#[derive(Debug, Parser)]
#[command(name = "xfer-score", version, about = "Transferability scores from exported model outputs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score one (predictions, labels) pair with a single measure.
    Score(ScoreArgs),
    /// Check both inequalities around LEEP and print each side.
    Verify(VerifyArgs),
    /// Rank the source models of a manifest by a measure.
    Rank(ManifestArgs),
    /// Correlate a measure with the manifest's transfer metrics.
    Correlate(CorrelateArgs),
    /// Average transfer metrics within equal-width score levels.
    Bins(BinsArgs),
    /// Write synthetic tasks with planted transferability.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Matrix file format; inferred from the extension when omitted.
    #[arg(long)]
    pub format: Option<MatrixFormat>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub measure: Measure,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 10)]
    pub batch: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ManifestArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub measure: Measure,
    /// Also write the report here (`.json` for JSON, anything else CSV).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub common: ManifestArgs,
    #[arg(long, default_value = "accuracy")]
    pub metric: MetricKind,
}

#[derive(Debug, Args)]
pub struct BinsArgs {
    #[command(flatten)]
    pub common: ManifestArgs,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    #[arg(long, default_value_t = 5)]
    pub c: usize,
    #[arg(long, default_value_t = 0.5)]
    pub alignment: f64,
    #[arg(long, default_value_t = 0.5)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Emit exact one-hot prediction rows instead of Dirichlet draws.
    #[arg(long)]
    pub no_perturb: bool,
    /// Comma-separated alignment levels; overrides --alignment.
    #[arg(long, value_delimiter = ',')]
    pub alignments: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub tasks_per_point: usize,
    #[arg(long, default_value = "bin")]
    pub format: MatrixFormat,
}

/// `%.12g`-style formatting used for every number the CLI prints.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    // Rounding can carry into the next decade; the exponent of the
    // scientific form is authoritative.
    let exp = sci.rsplit('e').next().and_then(|e| e.parse::<i32>().ok()).unwrap_or(exp);
    if !(-5..DIGITS).contains(&exp) {
        let (mantissa, e) = sci.split_once('e').expect("scientific format");
        let mantissa = trim_zeros(mantissa);
        format!(
            "{mantissa}e{}{:02}",
            if exp < 0 { '-' } else { '+' },
            e.trim_start_matches('-').parse::<i32>().unwrap_or(0)
        )
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|source| Error::Io { path: PathBuf::from("<stdout>"), source })
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|source| Error::Json { path: PathBuf::from("<stdout>"), source })?;
    emit(out, &(text + "\n"))
}

struct Loaded {
    pred: PredictionMatrix,
    features: Option<FeatureMatrix>,
    labels: TargetLabels,
}

fn load_predictions(path: &Path, format: Option<MatrixFormat>) -> Result<PredictionMatrix> {
    let raw = read_matrix(path, format)?;
    PredictionMatrix::new(raw.rows, raw.cols, raw.values)
}

fn load_features(path: &Path, format: Option<MatrixFormat>) -> Result<FeatureMatrix> {
    let raw = read_matrix(path, format)?;
    FeatureMatrix::new(raw.rows, raw.cols, raw.values)
}

fn load(predictions: &Path, labels: &Path, features: Option<&Path>, format: Option<MatrixFormat>) -> Result<Loaded> {
    let pred = load_predictions(predictions, format)?;
    let labels = TargetLabels::new(&read_labels(labels)?, None)?;
    if pred.n() != labels.n() {
        return Err(Error::LengthMismatch { left: pred.n(), right: labels.n() });
    }
    let features = features.map(|f| load_features(f, format)).transpose()?;
    if let Some(f) = &features {
        if f.n() != labels.n() {
            return Err(Error::LengthMismatch { left: f.n(), right: labels.n() });
        }
    }
    Ok(Loaded { pred, features, labels })
}

fn score(args: &ScoreArgs, out: &mut dyn Write) -> Result<()> {
    let i = &args.input;
    let data = load(&i.predictions, &i.labels, i.features.as_deref(), i.format)?;
    let score = compute_score(args.measure, Some(&data.pred), data.features.as_ref(), &data.labels)?;
    if args.json {
        return emit_json(out, &score);
    }
    emit(
        out,
        &format!(
            "measure\t{}\nscore\t{}\nn\t{}\nm\t{}\nc\t{}\n",
            score.measure,
            fmt_sig(score.value),
            score.n,
            score.m,
            score.c
        ),
    )
}

fn verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<()> {
    let i = &args.input;
    let data = load(&i.predictions, &i.labels, i.features.as_deref(), i.format)?;
    let features = data.features.unwrap_or_else(|| FeatureMatrix::from(&data.pred));
    let cfg =
        TrainConfig { learning_rate: args.lr, epochs: args.epochs, batch_size: args.batch, seed: args.seed, l2: 0.0 };
    let report = verify_bounds(&data.pred, &features, &data.labels, &cfg)?;
    if args.json {
        return emit_json(out, &report);
    }
    let status = |holds: bool| if holds { "holds" } else { "VIOLATED" };
    let text = format!(
        "leep\t{}\n\
         upper bound (leep <= best of head and EEP)\t{} <= {}\t{}\n\
         \ttrained head log-likelihood\t{}\n\
         \twinner\t{:?}\n\
         lower bound, hard-pair NCE (nce + mean log theta_z <= leep)\t{} <= {}\t{}\n\
         \tnce\t{}\n\tmean log theta_z\t{}\n\
         lower bound, soft conditional\t{} <= {}\t{}\n",
        fmt_sig(report.leep),
        fmt_sig(report.optimal_upper.lhs),
        fmt_sig(report.optimal_upper.rhs),
        status(report.optimal_upper.holds),
        fmt_sig(report.two_stage.head_log_likelihood),
        report.two_stage.best,
        fmt_sig(report.nce_lower.lhs),
        fmt_sig(report.nce_lower.rhs),
        status(report.nce_lower.holds),
        fmt_sig(report.nce_terms.0),
        fmt_sig(report.nce_terms.1),
        fmt_sig(report.soft_lower.lhs),
        fmt_sig(report.soft_lower.rhs),
        status(report.soft_lower.holds),
    );
    emit(out, &text)
}

/// Scores every manifest entry with `measure`, in manifest order.
pub fn score_manifest(manifest: &ExperimentManifest, measure: Measure) -> Result<Vec<ExperimentRecord>> {
    manifest
        .entries
        .iter()
        .map(|e| {
            let data = load(&e.predictions_path, &e.labels_path, e.features_path.as_deref(), None)?;
            let score = compute_score(measure, Some(&data.pred), data.features.as_ref(), &data.labels)?;
            let record = ExperimentRecord::new(e.model_id.clone()).with_score(measure, score.value);
            match e.transfer_metric {
                Some(v) => record.with_metric(e.metric_kind.unwrap_or_default(), v),
                None => Ok(record),
            }
        })
        .collect()
}

fn write_out<T: Serialize + CsvReport>(report: &T, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) if p.extension().is_some_and(|e| e == "json") => write_report_json(report, p),
        Some(p) => write_report_csv(report, p),
        None => Ok(()),
    }
}

fn print_table<T: CsvReport>(report: &T, out: &mut dyn Write) -> Result<()> {
    let mut text = report.header().join("\t") + "\n";
    for row in report.rows() {
        let row: Vec<String> = row
            .into_iter()
            .map(|cell| match cell.parse::<f64>() {
                Ok(v) if cell.contains('e') => fmt_sig(v),
                _ => cell,
            })
            .collect();
        text += &(row.join("\t") + "\n");
    }
    emit(out, &text)
}

fn rank(args: &ManifestArgs, out: &mut dyn Write) -> Result<()> {
    let records = score_manifest(&read_manifest(&args.manifest)?, args.measure)?;
    let report = rank_models(&records, args.measure)?;
    write_out(&report, args.out.as_deref())?;
    if args.json {
        emit_json(out, &report)
    } else {
        print_table(&report, out)
    }
}

fn correlate_cmd(args: &CorrelateArgs, out: &mut dyn Write) -> Result<()> {
    let c = &args.common;
    let records = score_manifest(&read_manifest(&c.manifest)?, c.measure)?;
    let report = correlate(&records, c.measure, args.metric)?;
    write_out(&report, c.out.as_deref())?;
    if c.json {
        emit_json(out, &report)
    } else {
        print_table(&report, out)
    }
}

fn bins(args: &BinsArgs, out: &mut dyn Write) -> Result<()> {
    let c = &args.common;
    let records = score_manifest(&read_manifest(&c.manifest)?, c.measure)?;
    let report = bin_records(&records, c.measure, args.k)?;
    write_out(&report, c.out.as_deref())?;
    if c.json {
        emit_json(out, &report)
    } else {
        print_table(&report, out)
    }
}

fn write_task(
    dir: &Path,
    stem: &str,
    task: &SyntheticTask,
    format: MatrixFormat,
) -> Result<(PathBuf, PathBuf, PathBuf)> {
    let ext = match format {
        MatrixFormat::Bin => "bin",
        MatrixFormat::Csv => "csv",
    };
    let pred = PathBuf::from(format!("{stem}.predictions.{ext}"));
    let feats = PathBuf::from(format!("{stem}.features.{ext}"));
    let labels = PathBuf::from(format!("{stem}.labels.txt"));
    let p = &task.predictions;
    write_matrix(&dir.join(&pred), &RawMatrix { rows: p.n(), cols: p.m(), values: p.values().to_vec() }, Some(format))?;
    let f = &task.features;
    write_matrix(
        &dir.join(&feats),
        &RawMatrix { rows: f.n(), cols: f.d(), values: f.values().to_vec() },
        Some(format),
    )?;
    write_labels(&dir.join(&labels), task.labels.values())?;
    Ok((pred, feats, labels))
}

fn synth(args: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let base = SynthSpec {
        n: args.n,
        m: args.m,
        c: args.c,
        alignment: args.alignment,
        noise: args.noise,
        seed: args.seed,
        perturb: !args.no_perturb,
    };
    base.validate()?;
    std::fs::create_dir_all(&args.out).map_err(|source| Error::Io { path: args.out.clone(), source })?;
    let alignments = if args.alignments.is_empty() { vec![args.alignment] } else { args.alignments.clone() };
    let single = alignments.len() == 1 && args.tasks_per_point == 1;

    let mut entries = Vec::new();
    for (a, &alignment) in alignments.iter().enumerate() {
        for t in 0..args.tasks_per_point {
            let seed = if single { args.seed } else { derive_seed(args.seed, (a * args.tasks_per_point + t) as u64) };
            let task = generate_task(&SynthSpec { alignment, seed, ..base.clone() })?;
            let stem = if single { "task".to_string() } else { format!("a{alignment:.3}-t{t:03}") };
            let (pred, feats, labels) = write_task(&args.out, &stem, &task, args.format)?;
            entries.push(ManifestEntry {
                model_id: stem,
                predictions_path: pred,
                labels_path: labels,
                features_path: Some(feats),
                transfer_metric: Some(eep_holdout_accuracy(&task, splitmix64(seed))?),
                metric_kind: Some(MetricKind::Accuracy),
            });
        }
    }
    let manifest_path = args.out.join("manifest.json");
    write_manifest(&manifest_path, &ExperimentManifest::new(entries))?;
    emit(out, &format!("wrote {}\n", manifest_path.display()))
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Score(a) => score(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Rank(a) => rank(a, out),
        Command::Correlate(a) => correlate_cmd(a, out),
        Command::Bins(a) => bins(a, out),
        Command::Synth(a) => synth(a, out),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_io() {
        2
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(-0.408706107), "-0.408706107");
        assert_eq!(fmt_sig(0.5f64.ln()), "-0.69314718056");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(123456.0), "123456");
        assert_eq!(fmt_sig(1.5e-7), "1.5e-07");
        assert_eq!(fmt_sig(2.0e13), "2e+13");
        assert_eq!(fmt_sig(9.9999999999999e-1), "1");
    }
}
