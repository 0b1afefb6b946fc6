use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use layoutforge::imbalance::{GroupAccumulator, GroupReport};
use layoutforge::io::read_annotation;
use layoutforge::metrics::MetricRecord;
use serde_json::json;

use crate::common::{
    create_dir, json_files, write_json, write_run_provenance, CliError, CliResult, ErrorListing, Provenance,
    EXIT_PAIRING, EXIT_PARSE,
};
use crate::Cli;

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Per-sample metrics CSV as written by `eval`.
    #[arg(long)]
    pub metrics: PathBuf,

    #[arg(long)]
    pub annotations: PathBuf,

    #[arg(long)]
    pub out: PathBuf,
}

pub const MACRO_ROW: &str = "__macro_average__";

/// `report_<grouping>.csv` and its JSON mirror.
pub fn write_group_report(dir: &Path, report: &GroupReport, prov: &Provenance) -> CliResult<()> {
    let name = report.grouping.as_str();
    let mut csv = format!(
        "{}\ngroup,count,{}\n",
        prov.csv_comment(),
        MetricRecord::FIELDS.join(",")
    );
    let row = |group: &str, count: usize, m: &MetricRecord| {
        format!("{group},{count},{},{},{},{}\n", m.iou2d, m.iou3d, m.rmse, m.delta1)
    };
    for g in &report.groups {
        csv.push_str(&row(&g.group, g.count, &g.mean));
    }
    csv.push_str(&row(MACRO_ROW, report.total_count(), &report.macro_average));
    fs::write(dir.join(format!("report_{name}.csv")), csv)?;
    write_json(
        &dir.join(format!("report_{name}.json")),
        &json!({ "provenance": prov, "report": report }),
    )
}

fn parse_metrics_csv(path: &Path) -> CliResult<Vec<(String, MetricRecord)>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let bad = |line: usize, msg: &str| CliError::new(EXIT_PARSE, format!("{}:{line}: {msg}", path.display()));
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line != crate::common::metric_csv_header() {
                return Err(bad(i + 1, "unexpected header"));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(bad(i + 1, "expected 5 fields"));
        }
        let mut values = [0.0; 4];
        for (v, f) in values.iter_mut().zip(&fields[1..]) {
            *v = f.parse().map_err(|_| bad(i + 1, "non-numeric metric"))?;
        }
        rows.push((fields[0].to_string(), MetricRecord::from_array(values)));
    }
    Ok(rows)
}

pub fn run(cli: &Cli, args: &ReportArgs) -> CliResult<()> {
    let config = json!({
        "metrics": args.metrics.display().to_string(),
        "annotations": args.annotations.display().to_string(),
        "grouping": cli.grouping,
        "angle_tol": cli.angle_tol,
        "strict": cli.strict,
    });
    let prov = Provenance::new("report", cli.seed_or_default(), &config);
    let rows = parse_metrics_csv(&args.metrics)?;
    let annotations: BTreeMap<String, PathBuf> = json_files(&args.annotations)?.into_iter().collect();
    let mut errors = ErrorListing::default();
    let mut acc = GroupAccumulator::new(cli.grouping);
    for (id, record) in &rows {
        let Some(path) = annotations.get(id) else {
            errors.push(EXIT_PAIRING, format!("{id}: no annotation"));
            continue;
        };
        match read_annotation(path, cli.strict).and_then(|a| cli.grouping.key_of(&a.value, cli.angle_tol)) {
            Ok(key) => acc.add(key, record),
            Err(e) => {
                let e = CliError::from(e);
                errors.push(e.code, e.message);
            }
        }
        if !cli.keep_going && !errors.is_empty() {
            break;
        }
    }
    if !errors.is_empty() && !cli.keep_going {
        return Err(errors.into_error().expect("non-empty listing"));
    }
    create_dir(&args.out)?;
    if !acc.is_empty() {
        write_group_report(&args.out, &acc.finish()?, &prov)?;
    }
    write_run_provenance(&args.out, &prov, &config)?;
    errors.into_error().map_or(Ok(()), Err)
}
