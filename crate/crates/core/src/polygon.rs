//! Planar primitives on the horizontal `(x, z)` plane.
//!
//! Points are `[x, z]` pairs in meters. Orientation follows longitude: a
//! polygon is counter-clockwise (seen from above, vertical axis up) when its
//! vertices advance in the direction of increasing longitude, i.e. from `+z`
//! toward `+x`. [`signed_area`] is positive for such polygons.

/// A point on the horizontal plane, `[x, z]`.
pub type Vec2 = [f64; 2];

#[inline]
pub(crate) fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Standard `x·z' − z·x'` cross product.
#[inline]
pub(crate) fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub(crate) fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

/// Signed area, positive for counter-clockwise (increasing-longitude) order.
pub fn signed_area(poly: &[Vec2]) -> f64 {
    // vertical component of p_i × p_{i+1} in the right-handed (x, up, z) frame
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        acc += a[1] * b[0] - a[0] * b[1];
    }
    0.5 * acc
}

/// Crossing-number point-in-polygon test. Points on the boundary may land on
/// either side.
pub fn contains_point(poly: &[Vec2], p: Vec2) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Euclidean distance from `p` to the closed segment `a`–`b`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return norm(sub(p, a));
    }
    let t = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    norm(sub(p, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}

/// Smallest distance from `p` to any edge of `poly`.
pub fn boundary_distance(poly: &[Vec2], p: Vec2) -> f64 {
    edges(poly)
        .map(|(a, b)| point_segment_distance(p, a, b))
        .fold(f64::INFINITY, f64::min)
}

/// Iterates the closed edge loop `(v_i, v_{i+1})`.
pub fn edges(poly: &[Vec2]) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
    let n = poly.len();
    (0..n).map(move |i| (poly[i], poly[(i + 1) % n]))
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    cross(sub(b, a), sub(c, a))
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Closed-segment intersection test, touching and collinear overlap included.
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Pairwise simplicity check. Adjacent edges may only share their common
/// vertex; non-adjacent edges may not touch at all.
pub fn is_simple(poly: &[Vec2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if a == b {
            return false;
        }
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // shared vertex is expected; a fold-back onto the other edge is not
                let (shared, other_end, mine) = if j == i + 1 { (b, d, a) } else { (a, c, b) };
                if orient(mine, shared, other_end) == 0.0 && dot(sub(mine, shared), sub(other_end, shared)) > 0.0 {
                    return false;
                }
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Distance along the ray `t·dir` (t > 0) to the segment `a`–`b`, if hit.
/// Vertex hits count. Segments parallel to the ray are skipped; their
/// endpoints are reached through the neighbouring edges.
pub fn ray_segment_hit(dir: Vec2, a: Vec2, b: Vec2) -> Option<f64> {
    let s = sub(b, a);
    let denom = cross(dir, s);
    let scale = norm(dir) * norm(s);
    if denom.abs() <= 1e-14 * scale {
        return None;
    }
    let t = cross(a, s) / denom;
    let u = cross(a, dir) / denom;
    const EPS: f64 = 1e-12;
    if t > 0.0 && (-EPS..=1.0 + EPS).contains(&u) {
        Some(t)
    } else {
        None
    }
}

/// Nearest boundary hit along the unit direction `dir` from the origin.
pub fn nearest_ray_hit(poly: &[Vec2], dir: Vec2) -> Option<f64> {
    edges(poly)
        .filter_map(|(a, b)| ray_segment_hit(dir, a, b))
        .fold(None, |best: Option<f64>, t| Some(best.map_or(t, |b| b.min(t))))
}
