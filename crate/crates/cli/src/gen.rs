use std::fs;
use std::path::PathBuf;

use clap::Args;
use layoutforge::geometry::{sample_longitudes, visible_boundary};
use layoutforge::imbalance::distribution_stats;
use layoutforge::io::{annotation_to_json, prediction_to_json, LayoutPrediction};
use layoutforge::synthgen::{gen_dataset, GenConfig};
use serde_json::json;

use crate::common::{create_dir, write_json, write_run_provenance, CliError, CliResult, Provenance};
use crate::Cli;

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of rooms.
    #[arg(long, default_value_t = 100)]
    pub count: usize,

    #[arg(long)]
    pub out: PathBuf,

    /// JSON generator configuration; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Make every corner bucket equally likely.
    #[arg(long)]
    pub uniform_corners: bool,

    #[arg(long)]
    pub non_manhattan_fraction: Option<f64>,

    #[arg(long)]
    pub secondary_fraction: Option<f64>,
}

fn load_config(cli: &Cli, args: &GenArgs) -> CliResult<GenConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
        }
        None => GenConfig::default(),
    };
    if args.uniform_corners {
        config = config.uniform_corners();
    }
    if let Some(f) = args.non_manhattan_fraction {
        config.non_manhattan_fraction = f;
    }
    if let Some(f) = args.secondary_fraction {
        config.secondary_fraction = f;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.angle_tol = cli.angle_tol;
    config.validate()?;
    Ok(config)
}

pub fn run(cli: &Cli, args: &GenArgs) -> CliResult<()> {
    let config = load_config(cli, args)?;
    let config_value = json!({ "generator": config, "count": args.count, "n": cli.n });
    let prov = Provenance::new("gen", config.seed, &config_value);
    let rooms = gen_dataset(&config, args.count)?;
    let grid = sample_longitudes(cli.n)?;

    let room_dir = args.out.join("rooms");
    let label_dir = args.out.join("labels");
    create_dir(&room_dir)?;
    create_dir(&label_dir)?;
    let mut room_files = Vec::with_capacity(rooms.len());
    let mut label_files = Vec::with_capacity(rooms.len());
    for room in &rooms {
        let (depths, heights) = visible_boundary(room, &grid)?;
        let name = format!("{}.json", room.id());
        fs::write(room_dir.join(&name), annotation_to_json(room) + "\n")?;
        let label = LayoutPrediction::new(room.id(), &depths, &heights);
        fs::write(label_dir.join(&name), prediction_to_json(&label) + "\n")?;
        room_files.push(format!("rooms/{name}"));
        label_files.push(format!("labels/{name}"));
    }
    let stats = distribution_stats(&rooms, config.angle_tol)?;
    write_json(
        &args.out.join("manifest.json"),
        &json!({
            "provenance": prov,
            "config": config_value,
            "rooms": room_files,
            "labels": label_files,
            "distribution": stats,
        }),
    )?;
    write_run_provenance(&args.out, &prov, &config_value)?;
    eprintln!("generated {} rooms in {}", rooms.len(), args.out.display());
    Ok(())
}
