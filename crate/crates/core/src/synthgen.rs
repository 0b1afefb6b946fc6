//! Procedural rooms with controllable corner-count imbalance.
//!
//! Rectilinear rooms start from a rectangle and get rectangular notches cut
//! at convex corners; each notch adds two corners. Odd corner counts come
//! from chamfering one convex corner of a rectilinear room (one extra corner,
//! one 45° wall). Even non-Manhattan rooms are sheared rectilinear rooms.
//!
//! Every room of a dataset is drawn from its own generator seeded with
//! [`derive_seed`]`(config.seed, index)`, so rooms can be produced in any
//! order or in parallel and the dataset stays bit-identical.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{LayoutAnnotation, PoseLabel};
use crate::imbalance::{is_manhattan, CornerBucket, DEFAULT_ANGLE_TOL};
use crate::polygon::{self, cross, norm, sub, Vec2};

/// Construction attempts per room before giving up.
pub const RETRY_BUDGET: usize = 100;
/// Rejection samples per camera placement.
pub const PLACEMENT_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub corner_distribution: BTreeMap<CornerBucket, f64>,
    /// Probability that an even-cornered room is sheared off the Manhattan
    /// axes. Odd-cornered rooms are always non-Manhattan.
    pub non_manhattan_fraction: f64,
    /// Range of the base rectangle's side lengths, meters.
    pub size_range: (f64, f64),
    pub camera_margin: f64,
    pub ceiling_range: (f64, f64),
    pub camera_height: f64,
    pub secondary_fraction: f64,
    pub max_shear: f64,
    pub angle_tol: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        let corner_distribution = [
            (CornerBucket::Four, 0.55),
            (CornerBucket::Five, 0.04),
            (CornerBucket::Six, 0.20),
            (CornerBucket::Seven, 0.03),
            (CornerBucket::Eight, 0.10),
            (CornerBucket::Nine, 0.02),
            (CornerBucket::TenPlus, 0.06),
        ]
        .into_iter()
        .collect();
        Self {
            corner_distribution,
            non_manhattan_fraction: 0.1,
            size_range: (2.5, 8.0),
            camera_margin: 0.3,
            ceiling_range: (2.4, 3.2),
            camera_height: 1.6,
            secondary_fraction: 0.35,
            max_shear: 0.3,
            angle_tol: DEFAULT_ANGLE_TOL,
            seed: 0,
        }
    }
}

impl GenConfig {
    /// Same shape parameters with every corner bucket equally likely.
    pub fn uniform_corners(mut self) -> Self {
        let p = 1.0 / CornerBucket::ALL.len() as f64;
        self.corner_distribution = CornerBucket::ALL.iter().map(|&b| (b, p)).collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.corner_distribution.values().sum();
        if self.corner_distribution.values().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!(
                "corner probabilities must be non-negative and sum to 1, got {total}"
            )));
        }
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.non_manhattan_fraction) || !unit(self.secondary_fraction) {
            return Err(invalid("fractions must lie in [0, 1]"));
        }
        if !(self.camera_margin > 0.0) {
            return Err(invalid("camera margin must be positive"));
        }
        let (lo, hi) = self.size_range;
        if !(lo > 2.0 * self.camera_margin && hi >= lo) {
            return Err(invalid(format!(
                "size range ({lo}, {hi}) must be ordered with min > 2 x camera margin"
            )));
        }
        let (c_lo, c_hi) = self.ceiling_range;
        if !(self.camera_height > 0.0 && c_lo > self.camera_height && c_hi >= c_lo) {
            return Err(invalid("ceiling range must be ordered and above the camera"));
        }
        if !(self.max_shear > self.angle_tol && self.max_shear < std::f64::consts::FRAC_PI_4) {
            return Err(invalid("max_shear must lie between angle_tol and pi/4"));
        }
        Ok(())
    }
}

/// Mixes the root seed with a sample index (SplitMix64 finalizer over
/// `root + (index + 1) · 0x9E3779B97F4A7C15`).
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Reorders to counter-clockwise (increasing longitude).
fn orient_ccw(mut poly: Vec<Vec2>) -> Vec<Vec2> {
    if polygon::signed_area(&poly) < 0.0 {
        poly.reverse();
    }
    poly
}

fn unit(v: Vec2) -> Vec2 {
    let l = norm(v);
    [v[0] / l, v[1] / l]
}

/// Indices of convex vertices whose adjacent edges are at least `min_len`.
fn convex_corners(poly: &[Vec2], min_len: f64) -> Vec<usize> {
    let n = poly.len();
    // convex vertices turn the same way as the overall winding
    let winding = polygon::signed_area(poly).signum();
    (0..n)
        .filter(|&i| {
            let prev = poly[(i + n - 1) % n];
            let next = poly[(i + 1) % n];
            let v = poly[i];
            let turn = -cross(sub(v, prev), sub(next, v));
            turn * winding > 0.0 && norm(sub(prev, v)) >= min_len && norm(sub(next, v)) >= min_len
        })
        .collect()
}

fn try_notch<R: Rng + ?Sized>(poly: &[Vec2], min_len: f64, rng: &mut R) -> Option<Vec<Vec2>> {
    let corners = convex_corners(poly, min_len);
    if corners.is_empty() {
        return None;
    }
    let n = poly.len();
    let i = corners[rng.random_range(0..corners.len())];
    let v = poly[i];
    let to_prev = sub(poly[(i + n - 1) % n], v);
    let to_next = sub(poly[(i + 1) % n], v);
    let a = rng.random_range(0.2..0.45) * norm(to_prev);
    let b = rng.random_range(0.2..0.45) * norm(to_next);
    let (up, un) = (unit(to_prev), unit(to_next));
    let p1 = [v[0] + a * up[0], v[1] + a * up[1]];
    let p3 = [v[0] + b * un[0], v[1] + b * un[1]];
    let p2 = [p1[0] + b * un[0], p1[1] + b * un[1]];
    let mut out = poly.to_vec();
    out.splice(i..=i, [p1, p2, p3]);
    let before = polygon::signed_area(poly).abs();
    let after = polygon::signed_area(&out).abs();
    // the removed corner rectangle must lie inside the room
    let ok = polygon::is_simple(&out) && ((before - after) - a * b).abs() <= 1e-9 * before;
    ok.then_some(out)
}

fn try_chamfer<R: Rng + ?Sized>(poly: &[Vec2], min_len: f64, rng: &mut R) -> Option<Vec<Vec2>> {
    let corners = convex_corners(poly, min_len);
    if corners.is_empty() {
        return None;
    }
    let n = poly.len();
    let i = corners[rng.random_range(0..corners.len())];
    let v = poly[i];
    let to_prev = sub(poly[(i + n - 1) % n], v);
    let to_next = sub(poly[(i + 1) % n], v);
    let c = rng.random_range(0.2..0.45) * norm(to_prev).min(norm(to_next));
    let (up, un) = (unit(to_prev), unit(to_next));
    let mut out = poly.to_vec();
    out.splice(
        i..=i,
        [
            [v[0] + c * up[0], v[1] + c * up[1]],
            [v[0] + c * un[0], v[1] + c * un[1]],
        ],
    );
    polygon::is_simple(&out).then_some(out)
}

/// Axis-aligned rectilinear floor polygon with exactly `k` corners, not yet
/// centered on a camera.
pub fn rectilinear_polygon<R: Rng + ?Sized>(k: usize, size_range: (f64, f64), rng: &mut R) -> Result<Vec<Vec2>> {
    if k < 4 || !k.is_multiple_of(2) {
        return Err(invalid(format!(
            "rectilinear rooms need an even corner count >= 4, got {k}"
        )));
    }
    let min_len = 0.35 * size_range.0;
    'attempt: for _ in 0..RETRY_BUDGET {
        let w = rng.random_range(size_range.0..=size_range.1);
        let l = rng.random_range(size_range.0..=size_range.1);
        let mut poly = orient_ccw(vec![[0.0, 0.0], [w, 0.0], [w, l], [0.0, l]]);
        while poly.len() < k {
            match try_notch(&poly, min_len, rng) {
                Some(next) => poly = next,
                None => continue 'attempt,
            }
        }
        return Ok(orient_ccw(poly));
    }
    Err(Error::Generation(format!(
        "no {k}-corner rectilinear room within {RETRY_BUDGET} attempts"
    )))
}

/// Where a camera is placed inside a room.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementMode {
    /// Central positions: the most clearance among several feasible draws.
    Primary,
    /// Near a wall, between one and two margins from the closest edge.
    Secondary,
}

impl From<PoseLabel> for PlacementMode {
    fn from(p: PoseLabel) -> Self {
        match p {
            PoseLabel::Primary => Self::Primary,
            PoseLabel::Secondary => Self::Secondary,
        }
    }
}

/// Rejection-samples an interior point at least `margin` from every edge.
pub fn place_camera<R: Rng + ?Sized>(poly: &[Vec2], margin: f64, mode: PlacementMode, rng: &mut R) -> Result<Vec2> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in poly {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let mut best: Option<(Vec2, f64)> = None;
    let mut feasible = 0usize;
    for _ in 0..PLACEMENT_SAMPLES {
        let p = [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])];
        if !polygon::contains_point(poly, p) {
            continue;
        }
        let clearance = polygon::boundary_distance(poly, p);
        if clearance < margin {
            continue;
        }
        feasible += 1;
        match mode {
            PlacementMode::Primary => {
                if best.is_none_or(|(_, c)| clearance > c) {
                    best = Some((p, clearance));
                }
                if feasible == 16 {
                    break;
                }
            }
            PlacementMode::Secondary => {
                if clearance <= 2.0 * margin {
                    return Ok(p);
                }
                if best.is_none_or(|(_, c)| clearance < c) {
                    best = Some((p, clearance));
                }
            }
        }
    }
    best.map(|(p, _)| p).ok_or_else(|| {
        Error::Placement(format!(
            "no point {margin} m clear of every wall in {PLACEMENT_SAMPLES} samples"
        ))
    })
}

fn centered(poly: &[Vec2], camera: Vec2) -> Vec<Vec2> {
    orient_ccw(poly.iter().map(|p| sub(*p, camera)).collect())
}

fn finish_room<R: Rng + ?Sized>(
    id: &str,
    poly: &[Vec2],
    config: &GenConfig,
    pose: PoseLabel,
    rng: &mut R,
) -> Result<LayoutAnnotation> {
    let camera = place_camera(poly, config.camera_margin, pose.into(), rng)?;
    let ceiling = rng.random_range(config.ceiling_range.0..=config.ceiling_range.1);
    LayoutAnnotation::new(id, centered(poly, camera), config.camera_height, ceiling, pose)
}

/// Rectilinear room with `k` corners and a placed camera.
pub fn gen_rectilinear_room<R: Rng + ?Sized>(
    id: &str,
    k: usize,
    config: &GenConfig,
    pose: PoseLabel,
    rng: &mut R,
) -> Result<LayoutAnnotation> {
    let mut last = None;
    for _ in 0..RETRY_BUDGET {
        let poly = rectilinear_polygon(k, config.size_range, rng)?;
        match finish_room(id, &poly, config, pose, rng) {
            Ok(room) => return Ok(room),
            Err(e) => last = Some(e),
        }
    }
    Err(Error::Generation(format!(
        "{id}: {k}-corner room failed {RETRY_BUDGET} times, last error: {}",
        last.map_or_else(String::new, |e| e.to_string())
    )))
}

/// Rectilinear room of `k − 1` corners with one convex corner cut at 45°.
pub fn gen_chamfered_room<R: Rng + ?Sized>(
    id: &str,
    k: usize,
    config: &GenConfig,
    pose: PoseLabel,
    rng: &mut R,
) -> Result<LayoutAnnotation> {
    if k < 5 || k.is_multiple_of(2) {
        return Err(invalid(format!(
            "chamfered rooms need an odd corner count >= 5, got {k}"
        )));
    }
    for _ in 0..RETRY_BUDGET {
        let base = rectilinear_polygon(k - 1, config.size_range, rng)?;
        let Some(poly) = try_chamfer(&base, 0.35 * config.size_range.0, rng) else {
            continue;
        };
        if let Ok(room) = finish_room(id, &poly, config, pose, rng) {
            return Ok(room);
        }
    }
    Err(Error::Generation(format!(
        "{id}: no {k}-corner chamfered room within {RETRY_BUDGET} attempts"
    )))
}

/// Shears `base` about its camera so that its `z`-running walls tilt by an
/// angle drawn from `(angle_tol, max_shear]`. The camera stays at the origin.
pub fn gen_sheared_room<R: Rng + ?Sized>(
    base: &LayoutAnnotation,
    max_shear: f64,
    angle_tol: f64,
    rng: &mut R,
) -> Result<LayoutAnnotation> {
    if !(max_shear > 0.0 && max_shear < std::f64::consts::FRAC_PI_4) {
        return Err(invalid(format!("max_shear must lie in (0, pi/4), got {max_shear}")));
    }
    if max_shear <= angle_tol {
        return Err(invalid(format!(
            "max_shear {max_shear} cannot leave the Manhattan tolerance {angle_tol}"
        )));
    }
    for _ in 0..RETRY_BUDGET {
        let lo = angle_tol + 0.1 * (max_shear - angle_tol);
        let magnitude = rng.random_range(lo..=max_shear);
        let shear = if rng.random_bool(0.5) { magnitude } else { -magnitude }.tan();
        let poly: Vec<Vec2> = base.vertices().iter().map(|p| [p[0] + shear * p[1], p[1]]).collect();
        if !polygon::is_simple(&poly) || is_manhattan(&poly, angle_tol) {
            continue;
        }
        if let Ok(room) = LayoutAnnotation::new(
            base.id(),
            orient_ccw(poly),
            base.camera_height(),
            base.ceiling_height(),
            base.pose(),
        ) {
            return Ok(room);
        }
    }
    Err(Error::Generation(format!(
        "{}: shear kept failing validation",
        base.id()
    )))
}

fn pick_bucket<R: Rng + ?Sized>(dist: &BTreeMap<CornerBucket, f64>, rng: &mut R) -> CornerBucket {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = CornerBucket::Four;
    for b in CornerBucket::ALL {
        let p = dist.get(&b).copied().unwrap_or(0.0);
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = b;
        if u < acc {
            return b;
        }
    }
    last
}

/// Identifier of the `index`-th generated room.
pub fn room_id(index: usize) -> String {
    format!("room_{index:05}")
}

/// Generates room `index` of the dataset described by `config`.
pub fn gen_room(config: &GenConfig, index: usize) -> Result<LayoutAnnotation> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, index as u64));
    let id = room_id(index);
    let bucket = pick_bucket(&config.corner_distribution, &mut rng);
    let pose = if rng.random_bool(config.secondary_fraction) {
        PoseLabel::Secondary
    } else {
        PoseLabel::Primary
    };
    let k = match bucket {
        CornerBucket::TenPlus => rng.random_range(10..=12),
        b => b.as_str().parse().expect("numeric bucket"),
    };
    if k % 2 == 1 {
        return gen_chamfered_room(&id, k, config, pose, &mut rng);
    }
    if !rng.random_bool(config.non_manhattan_fraction) {
        return gen_rectilinear_room(&id, k, config, pose, &mut rng);
    }
    for _ in 0..RETRY_BUDGET {
        let base = gen_rectilinear_room(&id, k, config, pose, &mut rng)?;
        let room = gen_sheared_room(&base, config.max_shear, config.angle_tol, &mut rng)?;
        // shearing moves walls toward or away from the camera
        if polygon::boundary_distance(room.vertices(), [0.0, 0.0]) >= config.camera_margin {
            return Ok(room);
        }
    }
    Err(Error::Generation(format!(
        "{id}: sheared rooms kept crowding the camera"
    )))
}

/// Generates `count` rooms; bit-identical for identical configs.
pub fn gen_dataset(config: &GenConfig, count: usize) -> Result<Vec<LayoutAnnotation>> {
    config.validate()?;
    (0..count).into_par_iter().map(|i| gen_room(config, i)).collect()
}
