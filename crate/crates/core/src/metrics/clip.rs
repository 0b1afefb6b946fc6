//! Intersection area of two simple polygons, convex or not.
//!
//! The boundary of `P ∩ Q` is made of the parts of `∂P` that lie inside `Q`
//! and the parts of `∂Q` that lie inside `P`. Splitting every edge at its
//! crossings with the other polygon and integrating the kept pieces with the
//! shoelace term yields the area without building the intersection polygon.
//! Boundary pieces shared by both polygons are kept once when the two
//! polygons run in the same direction along them, and dropped when they run
//! in opposite directions (the regions then lie on opposite sides).

use crate::polygon::{self, cross, dot, norm, signed_area, sub, Vec2};

/// Vertices of the second polygon closer than this to a vertex of the first
/// are snapped onto it before clipping.
pub const SNAP_DISTANCE: f64 = 1e-9;

/// Area of `P ∩ Q` plus a flag raised when either input had no area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intersection {
    pub area: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Location {
    Inside,
    Outside,
    SharedSameDirection,
    SharedOppositeDirection,
}

/// Shoelace term of the directed segment `u → w` (see [`signed_area`]).
#[inline]
fn edge_term(u: Vec2, w: Vec2) -> f64 {
    u[1] * w[0] - u[0] * w[1]
}

fn positively_oriented(poly: &[Vec2]) -> Vec<Vec2> {
    let mut out = poly.to_vec();
    if signed_area(&out) < 0.0 {
        out.reverse();
    }
    out
}

fn dedup_ring(poly: Vec<Vec2>) -> Vec<Vec2> {
    let mut out: Vec<Vec2> = Vec::with_capacity(poly.len());
    for p in poly {
        if out.last() != Some(&p) {
            out.push(p);
        }
    }
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

fn snap_onto(poly: &[Vec2], anchors: &[Vec2]) -> Vec<Vec2> {
    poly.iter()
        .map(|&p| {
            anchors
                .iter()
                .copied()
                .find(|&a| norm(sub(p, a)) <= SNAP_DISTANCE)
                .unwrap_or(p)
        })
        .collect()
}

struct Clipper {
    tol: f64,
}

impl Clipper {
    /// Parameters along `a → b` where the segment meets the boundary of
    /// `other`, including both ends.
    fn split_params(&self, a: Vec2, b: Vec2, other: &[Vec2]) -> Vec<f64> {
        let r = sub(b, a);
        let r_len = norm(r);
        let tt = self.tol / r_len;
        let mut params = vec![0.0, 1.0];
        for (c, d) in polygon::edges(other) {
            let s = sub(d, c);
            let s_len = norm(s);
            let denom = cross(r, s);
            let ca = sub(c, a);
            if denom.abs() > 1e-12 * r_len * s_len {
                let t = cross(ca, s) / denom;
                let u = cross(ca, r) / denom;
                let tu = self.tol / s_len;
                if t >= -tt && t <= 1.0 + tt && u >= -tu && u <= 1.0 + tu {
                    params.push(t.clamp(0.0, 1.0));
                }
            } else if cross(r, ca).abs() / r_len <= self.tol {
                // collinear: the overlap is bounded by the projections of c and d
                for p in [c, d] {
                    let t = dot(sub(p, a), r) / (r_len * r_len);
                    if t > -tt && t < 1.0 + tt {
                        params.push(t.clamp(0.0, 1.0));
                    }
                }
            }
        }
        params.sort_by(f64::total_cmp);
        let mut out: Vec<f64> = Vec::with_capacity(params.len());
        for t in params {
            match out.last() {
                Some(&last) if t - last <= tt => {
                    if t == 1.0 {
                        *out.last_mut().unwrap() = 1.0;
                    }
                }
                _ => out.push(t),
            }
        }
        if out.len() == 1 {
            out.push(1.0);
        }
        out
    }

    fn locate(&self, m: Vec2, dir: Vec2, other: &[Vec2]) -> Location {
        let dir_len = norm(dir);
        for (c, d) in polygon::edges(other) {
            if polygon::point_segment_distance(m, c, d) <= self.tol {
                let s = sub(d, c);
                let sin = cross(dir, s) / (dir_len * norm(s));
                if sin.abs() < 1e-6 {
                    return if dot(dir, s) > 0.0 {
                        Location::SharedSameDirection
                    } else {
                        Location::SharedOppositeDirection
                    };
                }
            }
        }
        if polygon::contains_point(other, m) {
            Location::Inside
        } else {
            Location::Outside
        }
    }

    /// Sum of shoelace terms over the pieces of `poly`'s boundary kept
    /// against `other`.
    fn boundary_terms(&self, poly: &[Vec2], other: &[Vec2], keep_shared: bool) -> f64 {
        let mut acc = 0.0;
        for (a, b) in polygon::edges(poly) {
            let params = self.split_params(a, b, other);
            let at = |t: f64| -> Vec2 {
                if t == 0.0 {
                    a
                } else if t == 1.0 {
                    b
                } else {
                    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
                }
            };
            for w in params.windows(2) {
                let (u, v) = (at(w[0]), at(w[1]));
                let mid = [0.5 * (u[0] + v[0]), 0.5 * (u[1] + v[1])];
                let keep = match self.locate(mid, sub(b, a), other) {
                    Location::Inside => true,
                    Location::SharedSameDirection => keep_shared,
                    Location::SharedOppositeDirection | Location::Outside => false,
                };
                if keep {
                    acc += edge_term(u, v);
                }
            }
        }
        acc
    }
}

/// Area of the boolean intersection of two simple polygons.
pub fn polygon_intersection_area(p: &[Vec2], q: &[Vec2]) -> Intersection {
    let degenerate = Intersection {
        area: 0.0,
        degenerate: true,
    };
    if p.len() < 3 || q.len() < 3 || signed_area(p) == 0.0 || signed_area(q) == 0.0 {
        return degenerate;
    }
    let p = positively_oriented(p);
    let q = dedup_ring(snap_onto(&positively_oriented(q), &p));
    if q.len() < 3 || signed_area(&q) == 0.0 {
        return degenerate;
    }
    let extent = p
        .iter()
        .chain(&q)
        .flat_map(|v| v.iter())
        .fold(0.0f64, |m, c| m.max(c.abs()));
    let clipper = Clipper {
        tol: 1e-9 * extent.max(1.0),
    };
    let acc = clipper.boundary_terms(&p, &q, true) + clipper.boundary_terms(&q, &p, false);
    Intersection {
        area: (0.5 * acc).max(0.0),
        degenerate: false,
    }
}
