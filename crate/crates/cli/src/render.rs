use std::path::PathBuf;

use clap::Args;
use layoutforge::geometry::sample_longitudes;
use layoutforge::io::{read_annotation, read_prediction, write_ldpm_file};
use layoutforge::metrics::{render_depth_map, RoomGeometry, DEFAULT_CAMERA_HEIGHT};
use serde_json::json;

use crate::common::{write_sidecar_provenance, CliResult, Provenance};
use crate::Cli;

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long, required_unless_present = "prediction", conflicts_with = "prediction")]
    pub annotation: Option<PathBuf>,

    /// Prediction JSON; its room is the boundary polygon of the depths.
    #[arg(long)]
    pub prediction: Option<PathBuf>,

    /// Output `.ldpm` file.
    #[arg(long)]
    pub out: PathBuf,

    /// Defaults to the annotation's camera height, or 1.6 m for predictions.
    #[arg(long)]
    pub camera_height: Option<f64>,
}

pub fn run(cli: &Cli, args: &RenderArgs) -> CliResult<()> {
    let (room, own_height, source) = match (&args.annotation, &args.prediction) {
        (Some(path), _) => {
            let ann = read_annotation(path, cli.strict)?.value;
            (RoomGeometry::from_layout(&ann), ann.camera_height(), path)
        }
        (None, Some(path)) => {
            let pred = read_prediction(path, cli.strict)?.value;
            let (d, h) = pred.sequences()?;
            let grid = sample_longitudes(d.len())?;
            (
                RoomGeometry::from_sequences(&d, &h, &grid)?,
                DEFAULT_CAMERA_HEIGHT,
                path,
            )
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let camera_height = args.camera_height.unwrap_or(own_height);
    let (h, w) = cli.resolution;
    let map = render_depth_map(&room, h, w, camera_height)?;
    let config = json!({
        "source": source.display().to_string(),
        "resolution": [h, w],
        "camera_height": camera_height,
        "strict": cli.strict,
    });
    write_ldpm_file(&args.out, &map)?;
    write_sidecar_provenance(
        &args.out,
        &Provenance::new("render-depth", cli.seed_or_default(), &config),
    )?;
    Ok(())
}
