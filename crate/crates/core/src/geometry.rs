//! Longitude sampling, point/horizon-depth conversion and visible-boundary
//! extraction.
//!
//! Frame: `x` and `z` span the horizontal plane, `v` is vertical (up
//! positive) and the camera sits at the origin. Longitude `θ` points along
//! `(sin θ, cos θ)` in `(x, z)`. The floor lies at `v = −camera_height` and
//! the ceiling at `v = ceiling_height − camera_height`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::polygon::{self, Vec2};

/// Capture-position label attached to every annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoseLabel {
    Primary,
    Secondary,
}

impl PoseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PoseLabel::Primary => "primary",
            PoseLabel::Secondary => "secondary",
        }
    }
}

/// Ground-truth room: camera-centered floor polygon plus heights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutAnnotation {
    id: String,
    vertices: Vec<Vec2>,
    camera_height: f64,
    ceiling_height: f64,
    pose: PoseLabel,
}

impl LayoutAnnotation {
    /// Validates every annotation invariant: at least three vertices, a simple
    /// counter-clockwise polygon, camera strictly inside, and
    /// `0 < camera_height < ceiling_height`.
    pub fn new(
        id: impl Into<String>,
        vertices: Vec<Vec2>,
        camera_height: f64,
        ceiling_height: f64,
        pose: PoseLabel,
    ) -> Result<Self> {
        let id = id.into();
        let bad = |msg: String| Error::InconsistentAnnotation(format!("{id}: {msg}"));
        if vertices.len() < 3 {
            return Err(bad(format!("{} vertices, need at least 3", vertices.len())));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(bad("non-finite vertex coordinate".into()));
        }
        if !polygon::is_simple(&vertices) {
            return Err(bad("polygon is not simple".into()));
        }
        if polygon::signed_area(&vertices) <= 0.0 {
            return Err(bad("vertices are not counter-clockwise".into()));
        }
        if !polygon::contains_point(&vertices, [0.0, 0.0]) || polygon::boundary_distance(&vertices, [0.0, 0.0]) == 0.0 {
            return Err(bad("camera is not strictly inside the polygon".into()));
        }
        if !(camera_height.is_finite() && ceiling_height.is_finite())
            || camera_height <= 0.0
            || camera_height >= ceiling_height
        {
            return Err(bad(format!(
                "need 0 < camera_height ({camera_height}) < ceiling_height ({ceiling_height})"
            )));
        }
        Ok(Self {
            id,
            vertices,
            camera_height,
            ceiling_height,
            pose,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn camera_height(&self) -> f64 {
        self.camera_height
    }

    pub fn ceiling_height(&self) -> f64 {
        self.ceiling_height
    }

    pub fn pose(&self) -> PoseLabel {
        self.pose
    }

    /// Vertical coordinate of the floor plane.
    pub fn floor_v(&self) -> f64 {
        -self.camera_height
    }
}

/// Equal-interval longitudes `θ_i = 2π((i+1)/n − 0.5)`, `i = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LongitudeGrid {
    thetas: Vec<f64>,
}

impl LongitudeGrid {
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }
}

pub fn sample_longitudes(n: usize) -> Result<LongitudeGrid> {
    if n == 0 {
        return Err(invalid("longitude count must be at least 1"));
    }
    let nf = n as f64;
    let thetas = (0..n).map(|i| 2.0 * PI * ((i + 1) as f64 / nf - 0.5)).collect();
    Ok(LongitudeGrid { thetas })
}

/// A 3D point in the camera frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorPoint {
    pub x: f64,
    pub v: f64,
    pub z: f64,
}

pub fn horizon_depth(p: FloorPoint) -> Result<f64> {
    if p.x == 0.0 && p.z == 0.0 {
        return Err(Error::DegeneratePoint);
    }
    Ok(p.x.hypot(p.z))
}

pub fn point_from_depth(theta: f64, d: f64, v: f64) -> Result<FloorPoint> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(invalid(format!("depth must be positive and finite, got {d}")));
    }
    let (s, c) = theta.sin_cos();
    Ok(FloorPoint { x: d * s, v, z: d * c })
}

macro_rules! positive_sequence {
    ($name:ident, $what:literal) => {
        #[doc = concat!("Per-longitude ", $what, " in meters; every value positive and finite.")]
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(Vec<f64>);

        impl $name {
            pub fn new(values: Vec<f64>) -> Result<Self> {
                if let Some((i, v)) = values
                    .iter()
                    .enumerate()
                    .find(|(_, v)| !(v.is_finite() && **v > 0.0))
                {
                    return Err(invalid(format!(
                        concat!($what, "[{}] = {} is not positive and finite"),
                        i, v
                    )));
                }
                Ok(Self(values))
            }

            pub fn values(&self) -> &[f64] {
                &self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }
        }
    };
}

positive_sequence!(DepthSequence, "depth");
positive_sequence!(HeightSequence, "height");

/// Unit horizontal direction of longitude `theta` in `(x, z)`.
pub fn longitude_direction(theta: f64) -> Vec2 {
    let (s, c) = theta.sin_cos();
    [s, c]
}

/// Horizon depth of the nearest wall along `theta`, if any edge is hit.
pub fn ray_depth(poly: &[Vec2], theta: f64) -> Option<f64> {
    polygon::nearest_ray_hit(poly, longitude_direction(theta))
}

/// Nearest-hit horizon depths and per-point room heights at every grid
/// longitude. Occluded parts of the polygon never show up in the depths.
pub fn visible_boundary(layout: &LayoutAnnotation, grid: &LongitudeGrid) -> Result<(DepthSequence, HeightSequence)> {
    let poly = layout.vertices();
    let depths = grid
        .thetas()
        .iter()
        .map(|&theta| {
            ray_depth(poly, theta).ok_or_else(|| {
                Error::InconsistentAnnotation(format!("{}: ray at longitude {theta} hits no wall", layout.id()))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let heights = vec![layout.ceiling_height(); grid.len()];
    Ok((DepthSequence::new(depths)?, HeightSequence::new(heights)?))
}

/// Polygon through the boundary points `(d_i sin θ_i, d_i cos θ_i)`.
pub fn boundary_polygon(depths: &DepthSequence, grid: &LongitudeGrid) -> Result<Vec<Vec2>> {
    if depths.len() != grid.len() {
        return Err(invalid(format!(
            "{} depths for a grid of {} longitudes",
            depths.len(),
            grid.len()
        )));
    }
    Ok(depths
        .values()
        .iter()
        .zip(grid.thetas())
        .map(|(&d, &theta)| {
            let [s, c] = longitude_direction(theta);
            [d * s, d * c]
        })
        .collect())
}
