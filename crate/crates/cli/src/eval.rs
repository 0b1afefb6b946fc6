//! Streaming evaluation: ids are processed in sorted chunks, each chunk in
//! parallel, and results are written in id order as chunks complete.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use layoutforge::geometry::{sample_longitudes, visible_boundary, DepthSequence, HeightSequence, LongitudeGrid};
use layoutforge::imbalance::{GroupAccumulator, Grouping};
use layoutforge::io::{read_annotation, read_prediction};
use layoutforge::metrics::{evaluate_layout, EvalOptions, MetricRecord, DEFAULT_CAMERA_HEIGHT};
use layoutforge::objectives::{layout_objective, overall_objective, LayoutLoss};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::common::{
    create_dir, json_files, metric_csv_header, metric_csv_row, write_json, write_run_provenance, CliError, CliResult,
    ErrorListing, Provenance, EXIT_PAIRING, EXIT_PARSE,
};
use crate::report::write_group_report;
use crate::Cli;

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub annotations: PathBuf,

    #[arg(long)]
    pub predictions: PathBuf,

    #[arg(long)]
    pub out: PathBuf,

    /// Predictions on AVG-restyled inputs, paired with the annotations.
    #[arg(long)]
    pub avg_predictions: Option<PathBuf>,

    /// Predictions on CSMix samples, paired with `--csmix-labels`.
    #[arg(long, requires = "csmix_labels")]
    pub csmix_predictions: Option<PathBuf>,

    #[arg(long, requires = "csmix_predictions")]
    pub csmix_labels: Option<PathBuf>,

    /// Samples evaluated per parallel batch.
    #[arg(long, default_value_t = 64)]
    pub chunk: usize,
}

struct Evaluated {
    id: String,
    record: MetricRecord,
    loss: LayoutLoss,
    keys: [&'static str; 3],
    warnings: Vec<String>,
}

type SampleError = (i32, String);

fn failure(path: &Path, e: layoutforge::Error) -> SampleError {
    let e = CliError::from(e);
    (e.code, format!("{}: {}", path.display(), strip_path(path, &e.message)))
}

/// Library messages already name the file for read errors; avoid doubling it.
fn strip_path(path: &Path, msg: &str) -> String {
    let prefix = format!("{}: ", path.display());
    msg.replacen(&prefix, "", 1)
}

fn load_prediction(
    path: &Path,
    id: &str,
    n: usize,
    strict: bool,
) -> Result<(DepthSequence, HeightSequence, Vec<String>), SampleError> {
    let parsed = read_prediction(path, strict).map_err(|e| failure(path, e))?;
    if parsed.value.id != id {
        return Err((
            EXIT_PAIRING,
            format!("{}: id {:?} does not match file name", path.display(), parsed.value.id),
        ));
    }
    if parsed.value.depths.len() != n {
        return Err((
            EXIT_PARSE,
            format!(
                "{}: {} samples, expected --n {n}",
                path.display(),
                parsed.value.depths.len()
            ),
        ));
    }
    let (d, h) = parsed.value.sequences().map_err(|e| failure(path, e))?;
    let warnings = parsed
        .unknown_keys
        .iter()
        .map(|k| format!("{}: ignoring unknown key {k:?}", path.display()))
        .collect();
    Ok((d, h, warnings))
}

fn eval_one(
    cli: &Cli,
    grid: &LongitudeGrid,
    id: &str,
    ann_path: &Path,
    pred_path: &Path,
) -> Result<Evaluated, SampleError> {
    let parsed = read_annotation(ann_path, cli.strict).map_err(|e| failure(ann_path, e))?;
    let ann = parsed.value;
    if ann.id() != id {
        return Err((
            EXIT_PAIRING,
            format!("{}: id {:?} does not match file name", ann_path.display(), ann.id()),
        ));
    }
    let mut warnings: Vec<String> = parsed
        .unknown_keys
        .iter()
        .map(|k| format!("{}: ignoring unknown key {k:?}", ann_path.display()))
        .collect();
    let (pred_d, pred_h, pred_warnings) = load_prediction(pred_path, id, grid.len(), cli.strict)?;
    warnings.extend(pred_warnings);
    let (gt_d, gt_h) = visible_boundary(&ann, grid).map_err(|e| failure(ann_path, e))?;
    let opts = EvalOptions {
        height: cli.resolution.0,
        width: cli.resolution.1,
        camera_height: ann.camera_height(),
        horizon_only: cli.horizon_only,
        ..EvalOptions::default()
    };
    let record = evaluate_layout(&gt_d, &gt_h, &pred_d, &pred_h, grid, &opts).map_err(|e| failure(pred_path, e))?;
    let loss = layout_objective(&gt_d, &pred_d, gt_h.values(), pred_h.values(), grid, ann.floor_v())
        .map_err(|e| failure(pred_path, e))?;
    let mut keys = [""; 3];
    for (k, g) in keys.iter_mut().zip(Grouping::ALL) {
        *k = g.key_of(&ann, cli.angle_tol).map_err(|e| failure(ann_path, e))?;
    }
    Ok(Evaluated {
        id: id.to_string(),
        record,
        loss,
        keys,
        warnings,
    })
}

/// Pairs two stem-keyed listings; unmatched stems land in `errors`.
fn pair(
    left: Vec<(String, PathBuf)>,
    right: Vec<(String, PathBuf)>,
    right_name: &str,
    left_name: &str,
    errors: &mut ErrorListing,
) -> Vec<(String, PathBuf, PathBuf)> {
    let mut right: BTreeMap<String, PathBuf> = right.into_iter().collect();
    let mut out = Vec::new();
    for (id, lp) in left {
        match right.remove(&id) {
            Some(rp) => out.push((id, lp, rp)),
            None => errors.push(EXIT_PAIRING, format!("{id}: no {right_name} ({})", lp.display())),
        }
    }
    for (id, rp) in right {
        errors.push(EXIT_PAIRING, format!("{id}: no {left_name} ({})", rp.display()));
    }
    out
}

fn loss_line(id: &str, loss: &LayoutLoss) -> String {
    let mut v = serde_json::to_value(loss).expect("loss serializes");
    v.as_object_mut().expect("object").insert("id".into(), json!(id));
    v.to_string()
}

/// Mean objective total over predictions paired with `labels`, where labels
/// are either annotations (`true`) or prediction-format files.
fn mean_objective(
    cli: &Cli,
    grid: &LongitudeGrid,
    pairs: &[(String, PathBuf, PathBuf)],
    labels_are_annotations: bool,
) -> Result<f64, SampleError> {
    let totals = pairs
        .par_iter()
        .map(|(id, label_path, pred_path)| {
            let (gt_d, gt_h, floor_v) = if labels_are_annotations {
                let ann = read_annotation(label_path, cli.strict)
                    .map_err(|e| failure(label_path, e))?
                    .value;
                let (d, h) = visible_boundary(&ann, grid).map_err(|e| failure(label_path, e))?;
                (d, h, ann.floor_v())
            } else {
                let (d, h, _) = load_prediction(label_path, id, grid.len(), cli.strict)?;
                (d, h, -DEFAULT_CAMERA_HEIGHT)
            };
            let (pd, ph, _) = load_prediction(pred_path, id, grid.len(), cli.strict)?;
            layout_objective(&gt_d, &pd, gt_h.values(), ph.values(), grid, floor_v)
                .map(|l| l.total)
                .map_err(|e| failure(pred_path, e))
        })
        .collect::<Vec<_>>();
    let mut sum = 0.0;
    for t in totals {
        sum += t?;
    }
    Ok(sum / pairs.len().max(1) as f64)
}

fn run_config(cli: &Cli, args: &EvalArgs) -> Value {
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    json!({
        "annotations": args.annotations.display().to_string(),
        "predictions": args.predictions.display().to_string(),
        "avg_predictions": path(&args.avg_predictions),
        "csmix_predictions": path(&args.csmix_predictions),
        "csmix_labels": path(&args.csmix_labels),
        "n": cli.n,
        "resolution": [cli.resolution.0, cli.resolution.1],
        "horizon_only": cli.horizon_only,
        "strict": cli.strict,
        "angle_tol": cli.angle_tol,
        "alpha": cli.alpha,
        "beta": cli.beta,
    })
}

pub fn run(cli: &Cli, args: &EvalArgs) -> CliResult<()> {
    if args.chunk == 0 {
        return Err(CliError::usage("--chunk must be positive"));
    }
    let weights = cli.weights()?;
    let config = run_config(cli, args);
    let prov = Provenance::new("eval", cli.seed_or_default(), &config);
    let grid = sample_longitudes(cli.n)?;

    let mut errors = ErrorListing::default();
    let pairs = pair(
        json_files(&args.annotations)?,
        json_files(&args.predictions)?,
        "prediction",
        "annotation",
        &mut errors,
    );
    if !errors.is_empty() && !cli.keep_going {
        return Err(errors.into_error().expect("non-empty listing"));
    }

    create_dir(&args.out)?;
    let mut metrics = BufWriter::new(File::create(args.out.join("metrics.csv"))?);
    writeln!(metrics, "{}\n{}", prov.csv_comment(), metric_csv_header())?;
    let mut losses = BufWriter::new(File::create(args.out.join("losses.jsonl"))?);
    writeln!(losses, "{}", json!({ "provenance": prov }))?;

    let mut accumulators = Grouping::ALL.map(GroupAccumulator::new);
    let mut loss_sum = 0.0;
    let mut evaluated = 0usize;
    'chunks: for chunk in pairs.chunks(args.chunk) {
        let results: Vec<_> = chunk
            .par_iter()
            .map(|(id, ann, pred)| eval_one(cli, &grid, id, ann, pred))
            .collect();
        for result in results {
            match result {
                Ok(ev) => {
                    for w in &ev.warnings {
                        eprintln!("warning: {w}");
                    }
                    writeln!(metrics, "{}", metric_csv_row(&ev.id, &ev.record))?;
                    writeln!(losses, "{}", loss_line(&ev.id, &ev.loss))?;
                    for (acc, key) in accumulators.iter_mut().zip(ev.keys) {
                        acc.add(key, &ev.record);
                    }
                    loss_sum += ev.loss.total;
                    evaluated += 1;
                }
                Err((code, msg)) => {
                    errors.push(code, msg);
                    if !cli.keep_going {
                        break 'chunks;
                    }
                }
            }
        }
        metrics.flush()?;
        losses.flush()?;
    }
    metrics.flush()?;
    losses.flush()?;
    if !errors.is_empty() && !cli.keep_going {
        return Err(errors.into_error().expect("non-empty listing"));
    }

    for acc in &accumulators {
        if !acc.is_empty() {
            write_group_report(&args.out, &acc.finish()?, &prov)?;
        }
    }

    let l_real = if evaluated > 0 {
        loss_sum / evaluated as f64
    } else {
        0.0
    };
    let mut l_avg = None;
    if let Some(dir) = &args.avg_predictions {
        let pairs = pair(
            json_files(&args.annotations)?,
            json_files(dir)?,
            "AVG prediction",
            "annotation",
            &mut errors,
        );
        match mean_objective(cli, &grid, &pairs, true) {
            Ok(v) => l_avg = Some(v),
            Err((code, msg)) => errors.push(code, msg),
        }
    }
    let mut l_csmix = None;
    if let (Some(preds), Some(labels)) = (&args.csmix_predictions, &args.csmix_labels) {
        let pairs = pair(
            json_files(labels)?,
            json_files(preds)?,
            "CSMix prediction",
            "CSMix label",
            &mut errors,
        );
        match mean_objective(cli, &grid, &pairs, false) {
            Ok(v) => l_csmix = Some(v),
            Err((code, msg)) => errors.push(code, msg),
        }
    }
    let overall = overall_objective(l_real, l_avg.unwrap_or(0.0), l_csmix.unwrap_or(0.0), weights)?;
    write_json(
        &args.out.join("objective.json"),
        &json!({
            "provenance": prov,
            "samples": evaluated,
            "L_real": l_real,
            "L_avg": l_avg,
            "L_csmix": l_csmix,
            "alpha": weights.alpha,
            "beta": weights.beta,
            "overall": overall,
        }),
    )?;
    write_run_provenance(&args.out, &prov, &config)?;
    errors.into_error().map_or(Ok(()), Err)
}
