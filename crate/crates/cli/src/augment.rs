use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use layoutforge::avg::{adain_transfer, channel_stats, sample_style, FeatureSequence, StylePrior};
use layoutforge::csmix::{sample_mix_spec, splice_sample, LayoutSample, MixSpec};
use layoutforge::io::{prediction_to_json, read_lfsq_file, read_prediction, write_lfsq_file, LayoutPrediction};
use serde_json::{json, Value};

use crate::common::{create_dir, write_json, CliError, CliResult, Provenance};
use crate::Cli;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Avg,
    Csmix,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long, value_enum)]
    pub mode: Mode,

    /// LFSQ feature files: one for `avg`, two for `csmix`.
    #[arg(long, required = true)]
    pub features: Vec<PathBuf>,

    /// Prediction-format label JSONs, one per feature file.
    #[arg(long, required = true)]
    pub labels: Vec<PathBuf>,

    #[arg(long)]
    pub out: PathBuf,

    /// `avg`: take the style from this LFSQ file instead of sampling one.
    #[arg(long)]
    pub reference: Option<PathBuf>,

    #[arg(long, default_value_t = 0.5)]
    pub mean_scale: f64,

    #[arg(long, default_value_t = 0.5)]
    pub std_scale: f64,

    /// `csmix`: explicit window as `c_a,c_b,w`.
    #[arg(long, conflicts_with = "replay")]
    pub spec: Option<String>,

    /// `csmix`: reuse the spec recorded in an earlier sidecar.
    #[arg(long)]
    pub replay: Option<PathBuf>,
}

fn parse_spec(s: &str) -> CliResult<MixSpec> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::usage(format!("--spec {s:?}: {e}")))?;
    match parts[..] {
        [c_a, c_b, w] => Ok(MixSpec { c_a, c_b, w }),
        _ => Err(CliError::usage(format!("--spec needs c_a,c_b,w, got {s:?}"))),
    }
}

fn read_replay(path: &Path) -> CliResult<MixSpec> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_value(v["spec"].clone())
        .map_err(|e| CliError::usage(format!("{}: no usable spec: {e}", path.display())))
}

fn load_sample(features: &Path, labels: &Path, strict: bool) -> CliResult<(String, LayoutSample)> {
    let f = read_lfsq_file(features)?;
    let label = read_prediction(labels, strict)?.value;
    let (d, h) = label.sequences()?;
    let sample = LayoutSample::new(f, d, h)
        .map_err(|e| CliError::usage(format!("{} / {}: {e}", features.display(), labels.display())))?;
    Ok((label.id, sample))
}

fn write_sample(dir: &Path, stem: &str, id: &str, sample: &LayoutSample) -> CliResult<()> {
    write_lfsq_file(&dir.join(format!("{stem}.lfsq")), &sample.features)?;
    let label = LayoutPrediction::new(id, &sample.depths, &sample.heights);
    fs::write(dir.join(format!("{stem}.json")), prediction_to_json(&label) + "\n")?;
    Ok(())
}

fn paths(p: &[PathBuf]) -> Vec<String> {
    p.iter().map(|p| p.display().to_string()).collect()
}

fn run_avg(cli: &Cli, args: &AugmentArgs) -> CliResult<()> {
    if args.features.len() != 1 || args.labels.len() != 1 {
        return Err(CliError::usage("avg takes exactly one --features and one --labels"));
    }
    let seed = cli.seed_or_default();
    let (id, sample) = load_sample(&args.features[0], &args.labels[0], cli.strict)?;
    let style = match &args.reference {
        Some(path) => channel_stats(&read_lfsq_file(path)?),
        None => sample_style(
            &StylePrior::new(args.mean_scale, args.std_scale, seed)?,
            sample.features.channels(),
        )?,
    };
    let styled: FeatureSequence = adain_transfer(&sample.features, &style)?;
    let config = json!({
        "mode": "avg",
        "features": paths(&args.features),
        "labels": paths(&args.labels),
        "reference": args.reference.as_ref().map(|p| p.display().to_string()),
        "mean_scale": args.mean_scale,
        "std_scale": args.std_scale,
        "strict": cli.strict,
    });
    let prov = Provenance::new("augment", seed, &config);
    create_dir(&args.out)?;
    let out = LayoutSample {
        features: styled,
        ..sample
    };
    write_sample(&args.out, "avg", &id, &out)?;
    write_json(
        &args.out.join("avg.sidecar.json"),
        &json!({
            "provenance": prov,
            "config": config,
            "seed": seed,
            "style": style,
        }),
    )
}

fn run_csmix(cli: &Cli, args: &AugmentArgs) -> CliResult<()> {
    if args.features.len() != 2 || args.labels.len() != 2 {
        return Err(CliError::usage("csmix takes exactly two --features and two --labels"));
    }
    let seed = cli.seed_or_default();
    let (id_a, a) = load_sample(&args.features[0], &args.labels[0], cli.strict)?;
    let (id_b, b) = load_sample(&args.features[1], &args.labels[1], cli.strict)?;
    let n = a.features.columns();
    if b.features.columns() != n || b.features.channels() != a.features.channels() {
        return Err(CliError::usage("csmix inputs must share N and D"));
    }
    let spec = match (&args.spec, &args.replay) {
        (Some(s), _) => parse_spec(s)?,
        (None, Some(path)) => read_replay(path)?,
        (None, None) => sample_mix_spec(n, seed)?,
    };
    spec.validate(n)?;
    let (mix_a, mix_b) = splice_sample(&a, &b, spec)?;
    // the spec fully determines the outputs, so it stands in for the seed
    let config = json!({
        "mode": "csmix",
        "features": paths(&args.features),
        "labels": paths(&args.labels),
        "spec": spec,
        "strict": cli.strict,
    });
    let prov = Provenance::new("augment", seed, &config);
    create_dir(&args.out)?;
    write_sample(&args.out, "mix_a", &format!("{id_a}_x_{id_b}"), &mix_a)?;
    write_sample(&args.out, "mix_b", &format!("{id_b}_x_{id_a}"), &mix_b)?;
    write_json(
        &args.out.join("csmix.sidecar.json"),
        &json!({
            "provenance": prov,
            "config": config,
            "seed": seed,
            "spec": spec,
        }),
    )
}

pub fn run(cli: &Cli, args: &AugmentArgs) -> CliResult<()> {
    match args.mode {
        Mode::Avg => run_avg(cli, args),
        Mode::Csmix => run_csmix(cli, args),
    }
}
