//! Layout training objectives: depth and height L1 terms, wall-normal
//! alignment, the corner/occlusion gradient constraint, and the weighted
//! combination over real and synthesized samples.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{point_from_depth, DepthSequence, LongitudeGrid};

/// Horizontal unit wall normal `[x, v, z]` with `v == 0`.
pub type Normal = [f64; 3];

/// Per-sample wall normals.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalSequence(Vec<Normal>);

impl NormalSequence {
    pub fn new(values: Vec<Normal>) -> Result<Self> {
        for (i, n) in values.iter().enumerate() {
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            if n[1] != 0.0 || (len - 1.0).abs() > 1e-9 {
                return Err(invalid(format!("normal {i} is not a horizontal unit vector")));
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[Normal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Circular first differences of normal angles and depths.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientPair {
    pub normal_grads: Vec<f64>,
    pub depth_grads: Vec<f64>,
}

/// Weights of the synthesized-sample terms in the overall objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { alpha: 0.1, beta: 0.01 }
    }
}

impl LossWeights {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && alpha >= 0.0 && beta >= 0.0) {
            return Err(invalid(format!(
                "loss weights must be finite and non-negative, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }
}

/// Mean absolute difference. Used for both the depth and height terms.
pub fn l1_sequence_loss(gt: &[f64], pred: &[f64]) -> Result<f64> {
    if gt.is_empty() || gt.len() != pred.len() {
        return Err(invalid(format!(
            "L1 loss needs equal non-empty lengths, got {} and {}",
            gt.len(),
            pred.len()
        )));
    }
    let sum: f64 = gt.iter().zip(pred).map(|(a, b)| (a - b).abs()).sum();
    Ok(sum / gt.len() as f64)
}

/// Normal of each boundary segment `p_i → p_{i+1}` (circular), rotated a
/// quarter turn about the vertical axis so that it faces the camera when the
/// samples advance in increasing longitude.
pub fn wall_normals(depths: &DepthSequence, grid: &LongitudeGrid, floor_v: f64) -> Result<NormalSequence> {
    let n = depths.len();
    if n < 2 {
        return Err(invalid("wall normals need at least 2 samples"));
    }
    if n != grid.len() {
        return Err(invalid(format!("{n} depths for a grid of {}", grid.len())));
    }
    let points = depths
        .values()
        .iter()
        .zip(grid.thetas())
        .map(|(&d, &theta)| point_from_depth(theta, d, floor_v))
        .collect::<Result<Vec<_>>>()?;
    let mut normals = Vec::with_capacity(n);
    for i in 0..n {
        let next = (i + 1) % n;
        let (a, b) = (points[i], points[next]);
        let (dx, dz) = (b.x - a.x, b.z - a.z);
        let len = dx.hypot(dz);
        if len < 1e-12 {
            return Err(Error::DegenerateSegment { index: i, next });
        }
        let (ux, uz) = (dx / len, dz / len);
        // R_y(+π/2): (x, v, z) -> (z, v, -x)
        normals.push([uz, 0.0, -ux]);
    }
    Ok(NormalSequence(normals))
}

/// Mean of `1 − n_i·n̂_i`; zero when every pair is aligned. For unit normals
/// this equals `½|n_i − n̂_i|²`, which is what is summed: it is exactly zero
/// for identical normals and keeps precision for nearly aligned ones.
pub fn normal_loss(gt: &NormalSequence, pred: &NormalSequence) -> Result<f64> {
    if gt.len() != pred.len() || gt.is_empty() {
        return Err(invalid(format!(
            "normal loss needs equal non-empty lengths, got {} and {}",
            gt.len(),
            pred.len()
        )));
    }
    let sum: f64 = gt
        .values()
        .iter()
        .zip(pred.values())
        .map(|(a, b)| {
            let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
            0.5 * dot3(&d, &d)
        })
        .sum();
    Ok(sum / gt.len() as f64)
}

fn dot3(a: &Normal, b: &Normal) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn sequence_gradients(normals: &NormalSequence, depths: &DepthSequence) -> Result<GradientPair> {
    let n = normals.len();
    if n < 2 || depths.len() != n {
        return Err(invalid(format!(
            "gradients need equal lengths of at least 2, got {n} normals and {} depths",
            depths.len()
        )));
    }
    let nv = normals.values();
    let dv = depths.values();
    let normal_grads = (0..n)
        .map(|i| dot3(&nv[i], &nv[(i + 1) % n]).clamp(-1.0, 1.0).acos())
        .collect();
    let depth_grads = (0..n).map(|i| dv[(i + 1) % n] - dv[i]).collect();
    Ok(GradientPair {
        normal_grads,
        depth_grads,
    })
}

pub fn gradient_loss(gt: &GradientPair, pred: &GradientPair) -> Result<f64> {
    let n = gt.normal_grads.len();
    if n == 0 || gt.depth_grads.len() != n || pred.normal_grads.len() != n || pred.depth_grads.len() != n {
        return Err(invalid(
            "gradient loss needs four sequences of one common, non-zero length",
        ));
    }
    let sum: f64 = (0..n)
        .map(|i| (gt.normal_grads[i] - pred.normal_grads[i]).abs() + (gt.depth_grads[i] - pred.depth_grads[i]).abs())
        .sum();
    Ok(sum / n as f64)
}

/// Component breakdown of the per-sample layout objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutLoss {
    #[serde(rename = "L_d")]
    pub depth: f64,
    #[serde(rename = "L_h")]
    pub height: f64,
    #[serde(rename = "L_n")]
    pub normal: f64,
    #[serde(rename = "L_g")]
    pub gradient: f64,
    pub total: f64,
}

/// `L_d + L_h + L_n + L_g` for one sample.
pub fn layout_objective(
    gt_depths: &DepthSequence,
    pred_depths: &DepthSequence,
    gt_heights: &[f64],
    pred_heights: &[f64],
    grid: &LongitudeGrid,
    floor_v: f64,
) -> Result<LayoutLoss> {
    let n = grid.len();
    if [gt_depths.len(), pred_depths.len(), gt_heights.len(), pred_heights.len()]
        .iter()
        .any(|&len| len != n)
    {
        return Err(invalid(format!("all sequences must have the grid length {n}")));
    }
    let depth = l1_sequence_loss(gt_depths.values(), pred_depths.values())?;
    let height = l1_sequence_loss(gt_heights, pred_heights)?;
    let gt_normals = wall_normals(gt_depths, grid, floor_v)?;
    let pred_normals = wall_normals(pred_depths, grid, floor_v)?;
    let normal = normal_loss(&gt_normals, &pred_normals)?;
    let gradient = gradient_loss(
        &sequence_gradients(&gt_normals, gt_depths)?,
        &sequence_gradients(&pred_normals, pred_depths)?,
    )?;
    Ok(LayoutLoss {
        depth,
        height,
        normal,
        gradient,
        total: depth + height + normal + gradient,
    })
}

/// `l_real + α·l_avg + β·l_csmix`.
pub fn overall_objective(l_real: f64, l_avg: f64, l_csmix: f64, weights: LossWeights) -> Result<f64> {
    if [l_real, l_avg, l_csmix].iter().any(|l| !(*l >= 0.0)) {
        return Err(invalid(format!(
            "losses must be non-negative, got ({l_real}, {l_avg}, {l_csmix})"
        )));
    }
    Ok(l_real + weights.alpha * l_avg + weights.beta * l_csmix)
}
