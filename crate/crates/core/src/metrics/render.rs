//! Equirectangular depth rendering of prism-shaped rooms.
//!
//! Pixel `(row v, col u)` of an `H × W` map looks along
//! `θ = 2π(u + 0.5)/W − π`, `φ = π/2 − π(v + 0.5)/H`, i.e. the direction
//! `(cos φ sin θ, sin φ, cos φ cos θ)`. The stored value is the Euclidean
//! distance to the first surface: floor, ceiling or a vertical wall.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::{boundary_polygon, ray_depth, DepthSequence, HeightSequence, LayoutAnnotation, LongitudeGrid};
use crate::polygon::Vec2;

/// Default camera height used by the depth metrics, in meters.
pub const DEFAULT_CAMERA_HEIGHT: f64 = 1.6;

/// Per-pixel distances of an equirectangular map, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl DepthMap {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        check_resolution(height, width)?;
        if values.len() != height * width {
            return Err(invalid(format!(
                "depth map {height}x{width} needs {} values, got {}",
                height * width,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid(format!(
                "depth map value at row {}, col {} is not positive and finite",
                i / width,
                i % width
            )));
        }
        Ok(Self { height, width, values })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }
}

fn check_resolution(height: usize, width: usize) -> Result<()> {
    if height == 0 || width != 2 * height {
        return Err(invalid(format!(
            "equirectangular maps need width = 2 x height, got {height}x{width}"
        )));
    }
    Ok(())
}

pub fn pixel_longitude(col: usize, width: usize) -> f64 {
    2.0 * PI * (col as f64 + 0.5) / width as f64 - PI
}

pub fn pixel_latitude(row: usize, height: usize) -> f64 {
    PI / 2.0 - PI * (row as f64 + 0.5) / height as f64
}

/// A room as the renderer sees it: floor polygon around the camera and a
/// flat ceiling.
#[derive(Debug, Clone, PartialEq)]
pub struct RoomGeometry {
    pub polygon: Vec<Vec2>,
    pub ceiling_height: f64,
}

impl RoomGeometry {
    pub fn from_layout(layout: &LayoutAnnotation) -> Self {
        Self {
            polygon: layout.vertices().to_vec(),
            ceiling_height: layout.ceiling_height(),
        }
    }

    /// Boundary polygon of the depths with the mean height as ceiling.
    pub fn from_sequences(depths: &DepthSequence, heights: &HeightSequence, grid: &LongitudeGrid) -> Result<Self> {
        if heights.is_empty() {
            return Err(invalid("empty height sequence"));
        }
        let ceiling_height = heights.values().iter().sum::<f64>() / heights.len() as f64;
        Ok(Self {
            polygon: boundary_polygon(depths, grid)?,
            ceiling_height,
        })
    }

    /// Distance to the first surface along longitude `theta`, latitude `phi`.
    /// `None` when the horizontal ray finds no wall and the ray is not
    /// stopped by the floor or ceiling.
    pub fn ray_distance(&self, theta: f64, phi: f64, camera_height: f64) -> Option<f64> {
        let wall = ray_depth(&self.polygon, theta);
        surface_distance(wall, phi, camera_height, self.ceiling_height - camera_height)
    }
}

fn surface_distance(wall: Option<f64>, phi: f64, camera_height: f64, ceiling_v: f64) -> Option<f64> {
    let (sin_phi, cos_phi) = phi.sin_cos();
    let plane = if sin_phi > 0.0 {
        ceiling_v / sin_phi
    } else if sin_phi < 0.0 {
        camera_height / -sin_phi
    } else {
        f64::INFINITY
    };
    let wall = match wall {
        Some(d) if cos_phi > 0.0 => d / cos_phi,
        Some(_) => f64::INFINITY,
        None if plane.is_finite() => return Some(plane),
        None => return None,
    };
    let t = wall.min(plane);
    t.is_finite().then_some(t)
}

pub fn render_depth_map(room: &RoomGeometry, height: usize, width: usize, camera_height: f64) -> Result<DepthMap> {
    check_resolution(height, width)?;
    if !(camera_height > 0.0) {
        return Err(invalid(format!("camera height must be positive, got {camera_height}")));
    }
    let ceiling_v = room.ceiling_height - camera_height;
    if !(ceiling_v > 0.0) {
        return Err(invalid(format!(
            "ceiling at {} m is not above the camera at {camera_height} m",
            room.ceiling_height
        )));
    }
    let walls = (0..width)
        .map(|col| {
            ray_depth(&room.polygon, pixel_longitude(col, width)).ok_or_else(|| Error::Render {
                row: 0,
                col,
                reason: "ray escapes the room: no wall along this longitude".into(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = vec![0.0; height * width];
    values.par_chunks_mut(width).enumerate().try_for_each(|(row, out)| {
        let phi = pixel_latitude(row, height);
        for (col, px) in out.iter_mut().enumerate() {
            *px = surface_distance(Some(walls[col]), phi, camera_height, ceiling_v).ok_or_else(|| Error::Render {
                row,
                col,
                reason: "no surface hit".into(),
            })?;
        }
        Ok::<(), Error>(())
    })?;
    DepthMap::new(height, width, values)
}
