//! Imbalance groupings (corner count, room type, camera pose) and per-group
//! metric aggregation with a macro (group-wise) average.
//!
//! Room types use a local convention: `manhattan_l` is a Manhattan room with
//! exactly six corners (an L shape) and `manhattan_g` a Manhattan room with
//! more than six.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{LayoutAnnotation, PoseLabel};
use crate::metrics::MetricRecord;
use crate::polygon::{norm, sub, Vec2};

/// Default angular tolerance of the Manhattan tests (about 2°).
pub const DEFAULT_ANGLE_TOL: f64 = 0.035;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CornerBucket {
    #[serde(rename = "4")]
    Four,
    #[serde(rename = "5")]
    Five,
    #[serde(rename = "6")]
    Six,
    #[serde(rename = "7")]
    Seven,
    #[serde(rename = "8")]
    Eight,
    #[serde(rename = "9")]
    Nine,
    #[serde(rename = "10+")]
    TenPlus,
}

impl CornerBucket {
    pub const ALL: [CornerBucket; 7] = [
        CornerBucket::Four,
        CornerBucket::Five,
        CornerBucket::Six,
        CornerBucket::Seven,
        CornerBucket::Eight,
        CornerBucket::Nine,
        CornerBucket::TenPlus,
    ];

    pub fn from_count(corners: usize) -> Result<Self> {
        Ok(match corners {
            0..=3 => {
                return Err(Error::OutOfDomain(format!(
                    "{corners} corners is below the smallest bucket (4)"
                )))
            }
            4 => Self::Four,
            5 => Self::Five,
            6 => Self::Six,
            7 => Self::Seven,
            8 => Self::Eight,
            9 => Self::Nine,
            _ => Self::TenPlus,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Four => "4",
            Self::Five => "5",
            Self::Six => "6",
            Self::Seven => "7",
            Self::Eight => "8",
            Self::Nine => "9",
            Self::TenPlus => "10+",
        }
    }
}

impl fmt::Display for CornerBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CornerBucket {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown corner bucket {s:?}")))
    }
}

pub fn corner_bucket(layout: &LayoutAnnotation) -> Result<CornerBucket> {
    CornerBucket::from_count(layout.vertices().len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoomClass {
    Cuboid,
    ManhattanL,
    ManhattanG,
    NonManhattan,
}

impl RoomClass {
    pub const ALL: [RoomClass; 4] = [
        RoomClass::Cuboid,
        RoomClass::ManhattanL,
        RoomClass::ManhattanG,
        RoomClass::NonManhattan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Cuboid => "cuboid",
            Self::ManhattanL => "manhattan_l",
            Self::ManhattanG => "manhattan_g",
            Self::NonManhattan => "non_manhattan",
        }
    }
}

impl fmt::Display for RoomClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Distance between two directions taken modulo π/2.
fn axis_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(FRAC_PI_2);
    d.min(FRAC_PI_2 - d)
}

fn wall_directions(poly: &[Vec2]) -> Vec<(f64, f64)> {
    crate::polygon::edges(poly)
        .map(|(a, b)| {
            let d = sub(b, a);
            (d[1].atan2(d[0]).rem_euclid(FRAC_PI_2), norm(d))
        })
        .collect()
}

/// True when every wall lies within `angle_tol` of one of two orthogonal
/// axes. The axis is fit as the wall direction (mod π/2) supported by the
/// largest total wall length within `angle_tol`.
pub fn is_manhattan(poly: &[Vec2], angle_tol: f64) -> bool {
    let walls = wall_directions(poly);
    let mut best: Option<(f64, f64)> = None;
    for &(cand, _) in &walls {
        let support: f64 = walls
            .iter()
            .filter(|(dir, _)| axis_distance(*dir, cand) <= angle_tol)
            .map(|(_, len)| len)
            .sum();
        if best.is_none_or(|(_, s)| support > s) {
            best = Some((cand, support));
        }
    }
    let Some((axis, _)) = best else { return false };
    walls.iter().all(|(dir, _)| axis_distance(*dir, axis) <= angle_tol)
}

fn interior_angles_near_right(poly: &[Vec2], angle_tol: f64) -> bool {
    let n = poly.len();
    (0..n).all(|i| {
        let v = poly[i];
        let a = sub(poly[(i + n - 1) % n], v);
        let b = sub(poly[(i + 1) % n], v);
        let angle = crate::polygon::cross(a, b).abs().atan2(crate::polygon::dot(a, b));
        (angle - FRAC_PI_2).abs() <= angle_tol
    })
}

pub fn classify_room_type(layout: &LayoutAnnotation, angle_tol: f64) -> RoomClass {
    classify_polygon(layout.vertices(), angle_tol)
}

pub fn classify_polygon(poly: &[Vec2], angle_tol: f64) -> RoomClass {
    if poly.len() == 4 && interior_angles_near_right(poly, angle_tol) {
        return RoomClass::Cuboid;
    }
    if is_manhattan(poly, angle_tol) {
        if poly.len() == 6 {
            RoomClass::ManhattanL
        } else {
            RoomClass::ManhattanG
        }
    } else {
        RoomClass::NonManhattan
    }
}

/// Dimension along which a dataset is split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    Corners,
    RoomType,
    Pose,
}

impl Grouping {
    pub const ALL: [Grouping; 3] = [Grouping::Corners, Grouping::RoomType, Grouping::Pose];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Corners => "corners",
            Self::RoomType => "room_type",
            Self::Pose => "pose",
        }
    }

    /// Every group key of this dimension, in report order.
    pub fn keys(self) -> Vec<&'static str> {
        match self {
            Self::Corners => CornerBucket::ALL.iter().map(|b| b.as_str()).collect(),
            Self::RoomType => RoomClass::ALL.iter().map(|c| c.as_str()).collect(),
            Self::Pose => vec![PoseLabel::Primary.as_str(), PoseLabel::Secondary.as_str()],
        }
    }

    pub fn key_of(self, layout: &LayoutAnnotation, angle_tol: f64) -> Result<&'static str> {
        Ok(match self {
            Self::Corners => corner_bucket(layout)?.as_str(),
            Self::RoomType => classify_room_type(layout, angle_tol).as_str(),
            Self::Pose => layout.pose().as_str(),
        })
    }
}

impl FromStr for Grouping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown grouping {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    pub count: usize,
    pub mean: MetricRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub grouping: Grouping,
    pub groups: Vec<GroupSummary>,
    /// Unweighted mean of the group means.
    pub macro_average: MetricRecord,
    /// Mean over all records, ignoring groups.
    pub micro_average: MetricRecord,
    pub empty_groups: Vec<String>,
}

impl GroupReport {
    pub fn total_count(&self) -> usize {
        self.groups.iter().map(|g| g.count).sum()
    }
}

/// Running per-group sums. Merging is associative and commutative, so
/// partial accumulators from parallel workers can be combined in any order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAccumulator {
    grouping: Grouping,
    sums: BTreeMap<&'static str, (usize, [f64; 4])>,
}

impl GroupAccumulator {
    pub fn new(grouping: Grouping) -> Self {
        Self {
            grouping,
            sums: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, key: &'static str, record: &MetricRecord) {
        let entry = self.sums.entry(key).or_insert((0, [0.0; 4]));
        entry.0 += 1;
        for (s, v) in entry.1.iter_mut().zip(record.as_array()) {
            *s += v;
        }
    }

    pub fn merge(&mut self, other: &GroupAccumulator) {
        for (key, (count, sums)) in &other.sums {
            let entry = self.sums.entry(key).or_insert((0, [0.0; 4]));
            entry.0 += count;
            for (s, v) in entry.1.iter_mut().zip(sums) {
                *s += v;
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    pub fn finish(&self) -> Result<GroupReport> {
        if self.sums.is_empty() {
            return Err(invalid("cannot report on an empty set of records"));
        }
        let mut groups = Vec::new();
        let mut empty_groups = Vec::new();
        let mut macro_sum = [0.0; 4];
        let mut micro_sum = [0.0; 4];
        let mut total = 0usize;
        for key in self.grouping.keys() {
            match self.sums.get(key) {
                Some(&(count, sums)) => {
                    let mean = sums.map(|s| s / count as f64);
                    for k in 0..4 {
                        macro_sum[k] += mean[k];
                        micro_sum[k] += sums[k];
                    }
                    total += count;
                    groups.push(GroupSummary {
                        group: key.to_string(),
                        count,
                        mean: MetricRecord::from_array(mean),
                    });
                }
                None => empty_groups.push(key.to_string()),
            }
        }
        let g = groups.len() as f64;
        Ok(GroupReport {
            grouping: self.grouping,
            groups,
            macro_average: MetricRecord::from_array(macro_sum.map(|s| s / g)),
            micro_average: MetricRecord::from_array(micro_sum.map(|s| s / total as f64)),
            empty_groups,
        })
    }
}

pub fn group_metrics(
    records: &[(LayoutAnnotation, MetricRecord)],
    grouping: Grouping,
    angle_tol: f64,
) -> Result<GroupReport> {
    if records.is_empty() {
        return Err(invalid("cannot group an empty set of records"));
    }
    let mut acc = GroupAccumulator::new(grouping);
    for (layout, record) in records {
        acc.add(grouping.key_of(layout, angle_tol)?, record);
    }
    acc.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub key: String,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionStats {
    pub total: usize,
    pub corners: Vec<HistogramBin>,
    pub room_type: Vec<HistogramBin>,
    pub pose: Vec<HistogramBin>,
}

/// Counts and fractions per bucket for every grouping dimension. Buckets
/// without members are listed with a zero count.
pub fn distribution_stats(layouts: &[LayoutAnnotation], angle_tol: f64) -> Result<DistributionStats> {
    if layouts.is_empty() {
        return Err(invalid("cannot summarize an empty dataset"));
    }
    let total = layouts.len();
    let histogram = |grouping: Grouping| -> Result<Vec<HistogramBin>> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for l in layouts {
            *counts.entry(grouping.key_of(l, angle_tol)?).or_default() += 1;
        }
        Ok(grouping
            .keys()
            .into_iter()
            .map(|key| {
                let count = counts.get(key).copied().unwrap_or(0);
                HistogramBin {
                    key: key.to_string(),
                    count,
                    fraction: count as f64 / total as f64,
                }
            })
            .collect())
    };
    Ok(DistributionStats {
        total,
        corners: histogram(Grouping::Corners)?,
        room_type: histogram(Grouping::RoomType)?,
        pose: histogram(Grouping::Pose)?,
    })
}
