//! Layout evaluation: 2D/3D IoU from polygon intersection, and depth RMSE and
//! δ₁ over rendered equirectangular depth maps.

mod clip;
mod render;

use serde::{Deserialize, Serialize};

pub use clip::{polygon_intersection_area, Intersection, SNAP_DISTANCE};
pub use render::{pixel_latitude, pixel_longitude, render_depth_map, DepthMap, RoomGeometry, DEFAULT_CAMERA_HEIGHT};

use crate::error::{invalid, Error, Result};
use crate::geometry::{DepthSequence, HeightSequence, LongitudeGrid};
use crate::polygon::{self, Vec2};

/// Default δ₁ ratio threshold.
pub const DELTA1_THRESHOLD: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub iou2d: f64,
    pub iou3d: f64,
    pub rmse: f64,
    pub delta1: f64,
}

impl MetricRecord {
    pub const FIELDS: [&'static str; 4] = ["iou2d", "iou3d", "rmse", "delta1"];

    pub fn as_array(&self) -> [f64; 4] {
        [self.iou2d, self.iou3d, self.rmse, self.delta1]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self {
            iou2d: v[0],
            iou3d: v[1],
            rmse: v[2],
            delta1: v[3],
        }
    }
}

/// Absolute shoelace area of a simple polygon.
pub fn polygon_area(poly: &[Vec2]) -> Result<f64> {
    if poly.len() < 3 {
        return Err(Error::InvalidPolygon(format!("{} vertices", poly.len())));
    }
    if !polygon::is_simple(poly) {
        return Err(Error::InvalidPolygon("polygon self-intersects".into()));
    }
    Ok(polygon::signed_area(poly).abs())
}

pub fn iou2d(gt: &[Vec2], pred: &[Vec2]) -> Result<f64> {
    let (inter, a_gt, a_pred) = overlap(gt, pred)?;
    Ok(ratio(inter, a_gt + a_pred - inter))
}

/// Volume IoU of two prisms standing on a common floor.
pub fn iou3d(gt: &[Vec2], gt_height: f64, pred: &[Vec2], pred_height: f64) -> Result<f64> {
    if !(gt_height > 0.0 && pred_height > 0.0) {
        return Err(invalid(format!(
            "prism heights must be positive, got {gt_height} and {pred_height}"
        )));
    }
    let (inter, a_gt, a_pred) = overlap(gt, pred)?;
    if gt_height == pred_height {
        return Ok(ratio(inter, a_gt + a_pred - inter));
    }
    let inter_vol = inter * gt_height.min(pred_height);
    Ok(ratio(inter_vol, a_gt * gt_height + a_pred * pred_height - inter_vol))
}

fn overlap(gt: &[Vec2], pred: &[Vec2]) -> Result<(f64, f64, f64)> {
    let a_gt = polygon_area(gt)?;
    let a_pred = polygon_area(pred)?;
    if a_gt == 0.0 && a_pred == 0.0 {
        return Err(Error::UndefinedMetric("IoU of two zero-area polygons".into()));
    }
    let inter = polygon_intersection_area(gt, pred).area.min(a_gt).min(a_pred);
    Ok((inter, a_gt, a_pred))
}

fn ratio(num: f64, den: f64) -> f64 {
    (num / den).clamp(0.0, 1.0)
}

fn check_same_shape(pred: &DepthMap, gt: &DepthMap) -> Result<()> {
    if pred.height() != gt.height() || pred.width() != gt.width() {
        return Err(invalid(format!(
            "depth map shapes differ: {}x{} vs {}x{}",
            pred.height(),
            pred.width(),
            gt.height(),
            gt.width()
        )));
    }
    Ok(())
}

/// Root mean squared difference over every pixel.
pub fn rmse(pred: &DepthMap, gt: &DepthMap) -> Result<f64> {
    check_same_shape(pred, gt)?;
    rmse_values(pred.values(), gt.values())
}

pub fn rmse_values(pred: &[f64], gt: &[f64]) -> Result<f64> {
    if pred.len() != gt.len() || pred.is_empty() {
        return Err(invalid("RMSE needs equal non-empty inputs"));
    }
    let sum: f64 = pred.iter().zip(gt).map(|(p, g)| (p - g) * (p - g)).sum();
    Ok((sum / pred.len() as f64).sqrt())
}

/// Fraction of pixels with `max(pred/gt, gt/pred) < threshold`.
pub fn delta1(pred: &DepthMap, gt: &DepthMap, threshold: f64) -> Result<f64> {
    check_same_shape(pred, gt)?;
    delta1_values(pred.values(), gt.values(), threshold)
}

pub fn delta1_values(pred: &[f64], gt: &[f64], threshold: f64) -> Result<f64> {
    if pred.len() != gt.len() || pred.is_empty() {
        return Err(invalid("δ1 needs equal non-empty inputs"));
    }
    let mut hits = 0usize;
    for (&p, &g) in pred.iter().zip(gt) {
        if !(p > 0.0 && g > 0.0) {
            return Err(invalid(format!("δ1 needs positive depths, got {p} and {g}")));
        }
        if (p / g).max(g / p) < threshold {
            hits += 1;
        }
    }
    Ok(hits as f64 / pred.len() as f64)
}

/// Knobs of [`evaluate_layout`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub height: usize,
    pub width: usize,
    pub camera_height: f64,
    /// Compute RMSE and δ₁ on the horizon-depth sequences instead of full
    /// rendered maps.
    pub horizon_only: bool,
    pub delta_threshold: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            height: 512,
            width: 1024,
            camera_height: DEFAULT_CAMERA_HEIGHT,
            horizon_only: false,
            delta_threshold: DELTA1_THRESHOLD,
        }
    }
}

/// Scores a predicted `(depths, heights)` pair against the ground-truth pair
/// sampled on the same grid. Both sides are turned into rooms the same way:
/// the boundary polygon of the depths, with the mean height as ceiling.
pub fn evaluate_layout(
    gt_depths: &DepthSequence,
    gt_heights: &HeightSequence,
    pred_depths: &DepthSequence,
    pred_heights: &HeightSequence,
    grid: &LongitudeGrid,
    opts: &EvalOptions,
) -> Result<MetricRecord> {
    let gt = RoomGeometry::from_sequences(gt_depths, gt_heights, grid)?;
    let pred = RoomGeometry::from_sequences(pred_depths, pred_heights, grid)?;
    let iou2d = iou2d(&gt.polygon, &pred.polygon)?;
    let iou3d = iou3d(&gt.polygon, gt.ceiling_height, &pred.polygon, pred.ceiling_height)?;
    let (rmse, delta1) = if opts.horizon_only {
        (
            rmse_values(pred_depths.values(), gt_depths.values())?,
            delta1_values(pred_depths.values(), gt_depths.values(), opts.delta_threshold)?,
        )
    } else {
        let gt_map = render_depth_map(&gt, opts.height, opts.width, opts.camera_height)?;
        let pred_map = render_depth_map(&pred, opts.height, opts.width, opts.camera_height)?;
        (
            rmse(&pred_map, &gt_map)?,
            delta1(&pred_map, &gt_map, opts.delta_threshold)?,
        )
    };
    Ok(MetricRecord {
        iou2d,
        iou3d,
        rmse,
        delta1,
    })
}
