//! Acceptance suite. Every criterion prints one `PASS`/`FAIL` line; the
//! process exits non-zero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use layoutforge::avg::{adain_transfer, channel_stats, ChannelStats, FeatureSequence};
use layoutforge::csmix::{sample_mix_spec, splice, splice_sample, LayoutSample, MixSpec};
use layoutforge::geometry::{
    horizon_depth, point_from_depth, sample_longitudes, visible_boundary, DepthSequence, HeightSequence,
    LayoutAnnotation, PoseLabel,
};
use layoutforge::io::{parse_prediction, prediction_to_json};
use layoutforge::metrics::{
    iou2d, pixel_latitude, pixel_longitude, polygon_intersection_area, render_depth_map, RoomGeometry,
};
use layoutforge::objectives::{layout_objective, normal_loss, wall_normals, NormalSequence};
use layoutforge::polygon::{is_simple, Vec2};
use layoutforge::synthgen::{gen_rectilinear_room, GenConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BIN: &str = env!("CARGO_BIN_EXE_layoutforge");

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;
type ArgBuilder<'a> = Box<dyn Fn(&Path) -> Vec<String> + 'a>;

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed < Duration::from_secs(limit_secs)
}

// ---------------------------------------------------------------- 1

fn geometry_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let theta = rng.random_range(-PI..PI);
        let d = rng.random_range(0.05..50.0);
        let v = rng.random_range(-3.0..3.0);
        let back = horizon_depth(point_from_depth(theta, d, v).unwrap()).unwrap();
        worst = worst.max((back - d).abs() / d);
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-12 && within(elapsed, 1),
        format!("max rel err {worst:.2e} (< 1e-12), {elapsed:.2?} (< 1 s)"),
    )
}

// ---------------------------------------------------------------- 2

/// Nearest wall along `(sin θ, cos θ)` by solving the ray/line equations of
/// every wall.
fn dense_hit(poly: &[Vec2], theta: f64) -> f64 {
    let (dx, dz) = (theta.sin(), theta.cos());
    let n = poly.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let (ex, ez) = (b[0] - a[0], b[1] - a[1]);
        // t·(dx, dz) = a + s·(ex, ez)
        let det = ez * dx - ex * dz;
        if det.abs() < 1e-15 {
            continue;
        }
        let t = (ez * a[0] - ex * a[1]) / det;
        let s = (dz * a[0] - dx * a[1]) / det;
        if t > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
            best = best.min(t);
        }
    }
    best
}

fn occlusion_oracle() -> Outcome {
    const N: usize = 256;
    // 391 dense rays per grid step: 100 096 rays, grid angles are members
    const PER_STEP: usize = 391;
    let m = N * PER_STEP;
    let cfg = GenConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let grid = sample_longitudes(N).unwrap();
    let dense = sample_longitudes(m).unwrap();
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut occluded_rooms = 0;
    for r in 0..500 {
        let k = if r % 2 == 0 { 6 } else { 8 };
        let room = gen_rectilinear_room("room", k, &cfg, PoseLabel::Secondary, &mut rng).unwrap();
        let (depths, _) = visible_boundary(&room, &grid).unwrap();
        let hits: Vec<f64> = dense.thetas().iter().map(|&t| dense_hit(room.vertices(), t)).collect();
        for (i, d) in depths.values().iter().enumerate() {
            let j = PER_STEP * i + PER_STEP - 1;
            assert_eq!(dense.thetas()[j], grid.thetas()[i]);
            worst = worst.max((hits[j] - d).abs());
        }
        // a vertex farther than the dense hit toward it is hidden
        let hidden = room.vertices().iter().any(|v| {
            let t = v[0].atan2(v[1]);
            dense_hit(room.vertices(), t) < v[0].hypot(v[1]) * (1.0 - 1e-9)
        });
        occluded_rooms += usize::from(hidden);
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-9 && within(elapsed, 30),
        format!(
            "500 rooms ({occluded_rooms} with hidden walls) vs {m}-ray oracle: max abs err {worst:.2e} (< 1e-9), {elapsed:.2?} (< 30 s)"
        ),
    )
}

// ---------------------------------------------------------------- 3

fn loss_identity_and_derivatives() -> Outcome {
    let n = 256;
    let grid = sample_longitudes(n).unwrap();
    let cfg = GenConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut nonzero = 0;
    for k in [4, 6, 8, 10] {
        let room = gen_rectilinear_room("r", k, &cfg, PoseLabel::Primary, &mut rng).unwrap();
        let (d, h) = visible_boundary(&room, &grid).unwrap();
        let l = layout_objective(&d, &d, h.values(), h.values(), &grid, room.floor_v()).unwrap();
        if [l.depth, l.height, l.normal, l.gradient, l.total] != [0.0; 5] {
            nonzero += 1;
        }
    }

    let gt: Vec<f64> = (0..n).map(|_| rng.random_range(2.0..5.0)).collect();
    let pred: Vec<f64> = gt
        .iter()
        .map(|g| g + if rng.random_bool(0.5) { 0.25 } else { -0.25 })
        .collect();
    let heights = vec![2.8; n];
    let gt_seq = DepthSequence::new(gt.clone()).unwrap();
    let l_d = |p: &[f64]| {
        layout_objective(
            &gt_seq,
            &DepthSequence::new(p.to_vec()).unwrap(),
            &heights,
            &heights,
            &grid,
            -1.6,
        )
        .unwrap()
        .depth
    };
    let step = 1e-6;
    let mut fd_worst = 0.0f64;
    for j in 0..n {
        let (mut up, mut down) = (pred.clone(), pred.clone());
        up[j] += step;
        down[j] -= step;
        let fd = (l_d(&up) - l_d(&down)) / (2.0 * step);
        fd_worst = fd_worst.max((fd - (pred[j] - gt[j]).signum() / n as f64).abs());
    }

    let rooms: Vec<LayoutAnnotation> = (0..2)
        .map(|_| gen_rectilinear_room("r", 6, &cfg, PoseLabel::Primary, &mut rng).unwrap())
        .collect();
    let normals: Vec<NormalSequence> = rooms
        .iter()
        .map(|r| wall_normals(&visible_boundary(r, &grid).unwrap().0, &grid, r.floor_v()).unwrap())
        .collect();
    let base = normal_loss(&normals[0], &normals[1]).unwrap();
    let rotate = |ns: &NormalSequence, a: f64| {
        let (s, c) = a.sin_cos();
        NormalSequence::new(
            ns.values()
                .iter()
                .map(|v| [c * v[0] + s * v[2], 0.0, -s * v[0] + c * v[2]])
                .collect(),
        )
        .unwrap()
    };
    let mut rot_worst = 0.0f64;
    for _ in 0..1000 {
        let a = rng.random_range(-PI..PI);
        let l = normal_loss(&rotate(&normals[0], a), &rotate(&normals[1], a)).unwrap();
        rot_worst = rot_worst.max((l - base).abs());
    }
    outcome(
        nonzero == 0 && fd_worst < 1e-5 && rot_worst < 1e-9,
        format!(
            "identity losses exactly 0 in {}/4 rooms; dL_d/dd max err {fd_worst:.2e} (< 1e-5); rotation drift {rot_worst:.2e} (< 1e-9)",
            4 - nonzero
        ),
    )
}

// ---------------------------------------------------------------- 4

fn adain_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut stat_worst = 0.0f64;
    let mut back_worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(2..64);
        let d = rng.random_range(1..16);
        let scale = rng.random_range(0.1..10.0);
        let offset = rng.random_range(-5.0..5.0);
        let data: Vec<f64> = (0..n * d)
            .map(|_| offset + scale * rng.random_range(-1.0..1.0))
            .collect();
        let content = FeatureSequence::new(n, d, data).unwrap();
        let style = ChannelStats::new(
            (0..d).map(|_| rng.random_range(-3.0..3.0)).collect(),
            (0..d).map(|_| rng.random_range(0.05..4.0)).collect(),
        )
        .unwrap();
        let out = adain_transfer(&content, &style).unwrap();
        let got = channel_stats(&out);
        for c in 0..d {
            stat_worst = stat_worst
                .max((got.mean[c] - style.mean[c]).abs())
                .max((got.std[c] - style.std[c]).abs());
        }
        let back = adain_transfer(&out, &channel_stats(&content)).unwrap();
        for (a, b) in back.data().iter().zip(content.data()) {
            back_worst = back_worst.max((a - b).abs());
        }
    }
    outcome(
        stat_worst < 1e-6 && back_worst < 1e-6,
        format!("1000 pairs: stats err {stat_worst:.2e}, back-transfer err {back_worst:.2e} (both < 1e-6)"),
    )
}

// ---------------------------------------------------------------- 5

fn splice_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    for trial in 0..10_000u64 {
        let n = rng.random_range(2..48);
        let mut spec = sample_mix_spec(n, trial).unwrap();
        let a: Vec<(u8, usize)> = (0..n).map(|i| (0, i)).collect();
        let b: Vec<(u8, usize)> = (0..n).map(|i| (1, i)).collect();
        let (ma, mb) = splice(&a, &b, spec).unwrap();
        if ma.len() != n || mb.len() != n {
            failures.push(format!("length at trial {trial}"));
        }
        spec.c_b = spec.c_a;
        let (ma, mb) = splice(&a, &b, spec).unwrap();
        let mut before: Vec<_> = a.iter().chain(&b).copied().collect();
        let mut after: Vec<_> = ma.iter().chain(&mb).copied().collect();
        before.sort();
        after.sort();
        if before != after {
            failures.push(format!("conservation at trial {trial}"));
        }
        let (fa, fb) = splice(&a, &b, MixSpec { c_a: 0, c_b: 0, w: n }).unwrap();
        if fa != b || fb != a {
            failures.push(format!("full swap at trial {trial}"));
        }

        // features tag (sample, column); depths carry the same tag
        let spec = sample_mix_spec(n, trial ^ 0xABCD).unwrap();
        let sample = |s: f64| {
            let f = FeatureSequence::new(n, 2, (0..n).flat_map(|i| [s, i as f64]).collect()).unwrap();
            let d = DepthSequence::new((0..n).map(|i| 1.0 + 1000.0 * s + i as f64).collect()).unwrap();
            let h = HeightSequence::new((0..n).map(|i| 2.0 + 1000.0 * s + i as f64).collect()).unwrap();
            LayoutSample::new(f, d, h).unwrap()
        };
        let (oa, ob) = splice_sample(&sample(0.0), &sample(1.0), spec).unwrap();
        for out in [&oa, &ob] {
            for c in 0..n {
                let col = out.features.column(c);
                let tag = 1000.0 * col[0] + col[1];
                if out.depths.values()[c] != 1.0 + tag || out.heights.values()[c] != 2.0 + tag {
                    failures.push(format!("provenance at trial {trial}, column {c}"));
                }
            }
        }
    }
    let first = failures.first().cloned().unwrap_or_default();
    outcome(
        failures.is_empty(),
        format!("10000 specs: {} violations {first}", failures.len()),
    )
}

// ---------------------------------------------------------------- 6

fn star(rng: &mut ChaCha8Rng, center: Vec2, k: usize) -> Vec<Vec2> {
    (0..k)
        .map(|i| {
            let a = 2.0 * PI * (i as f64 + rng.random_range(0.0..0.8)) / k as f64;
            let r = rng.random_range(0.4..1.0);
            [center[0] + r * a.cos(), center[1] + r * a.sin()]
        })
        .collect()
}

fn has_reflex_vertex(poly: &[Vec2]) -> bool {
    let n = poly.len();
    let turns: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b, c) = (poly[(i + n - 1) % n], poly[i], poly[(i + 1) % n]);
            (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        })
        .collect();
    turns.iter().any(|t| *t > 0.0) && turns.iter().any(|t| *t < 0.0)
}

fn row_spans(poly: &[Vec2], z: f64) -> Vec<(f64, f64)> {
    let mut xs = Vec::new();
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        if (a[1] <= z) != (b[1] <= z) {
            xs.push(a[0] + (z - a[1]) / (b[1] - a[1]) * (b[0] - a[0]));
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.chunks(2).map(|c| (c[0], c[1])).collect()
}

fn bbox(poly: &[Vec2]) -> ([f64; 2], [f64; 2]) {
    let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
    for v in poly {
        for k in 0..2 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    (lo, hi)
}

/// Area of `P ∩ Q` from the pixel centers of a `res × res` grid over the
/// overlap of both bounding boxes that fall inside both polygons (even-odd
/// rule).
fn raster_intersection(p: &[Vec2], q: &[Vec2], res: usize) -> f64 {
    let ((lo_p, hi_p), (lo_q, hi_q)) = (bbox(p), bbox(q));
    let lo = [lo_p[0].max(lo_q[0]), lo_p[1].max(lo_q[1])];
    let hi = [hi_p[0].min(hi_q[0]), hi_p[1].min(hi_q[1])];
    let (sx, sz) = ((hi[0] - lo[0]) / res as f64, (hi[1] - lo[1]) / res as f64);
    let mut count = 0i64;
    for row in 0..res {
        let z = lo[1] + (row as f64 + 0.5) * sz;
        let (a, b) = (row_spans(p, z), row_spans(q, z));
        for &(a0, a1) in &a {
            for &(b0, b1) in &b {
                let (l, r) = (a0.max(b0), a1.min(b1));
                if r > l {
                    let first = ((l - lo[0]) / sx - 0.5).floor() as i64 + 1;
                    let last = ((r - lo[0]) / sx - 0.5).ceil() as i64 - 1;
                    count += (last - first + 1).max(0);
                }
            }
        }
    }
    count as f64 * sx * sz
}

fn polygon_iou_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = GenConfig::default();
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut identity_worst = 0.0f64;
    let mut non_convex = 0;
    for pair in 0..300 {
        let (p, q) = if pair < 200 {
            let k1 = rng.random_range(4..14);
            let k2 = rng.random_range(4..14);
            let p = star(&mut rng, [0.0, 0.0], k1);
            let c = [rng.random_range(-0.15..0.15), rng.random_range(-0.15..0.15)];
            (p, star(&mut rng, c, k2))
        } else {
            // rectilinear rooms against shifted, rescaled copies of other rooms
            let k1 = [6, 8, 10][pair % 3];
            let a = gen_rectilinear_room("a", k1, &cfg, PoseLabel::Primary, &mut rng).unwrap();
            let b = gen_rectilinear_room("b", 6, &cfg, PoseLabel::Primary, &mut rng).unwrap();
            let (s, dx, dz) = (
                rng.random_range(0.7..1.2),
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
            );
            let q: Vec<Vec2> = b.vertices().iter().map(|v| [s * v[0] + dx, s * v[1] + dz]).collect();
            // a shared rotation keeps the overlap but stops walls from lining
            // up with raster rows, where the pixel error would not average out
            let (sin, cos) = rng.random_range(0.1..1.4f64).sin_cos();
            let rot = |poly: &[Vec2]| -> Vec<Vec2> {
                poly.iter()
                    .map(|v| [cos * v[0] - sin * v[1], sin * v[0] + cos * v[1]])
                    .collect()
            };
            (rot(a.vertices()), rot(&q))
        };
        assert!(is_simple(&p) && is_simple(&q));
        non_convex += usize::from(has_reflex_vertex(&p) || has_reflex_vertex(&q));
        let exact = polygon_intersection_area(&p, &q).area;
        let raster = raster_intersection(&p, &q, 2048);
        worst = worst.max((exact - raster).abs() / exact);
        identity_worst = identity_worst.max((iou2d(&p, &p).unwrap() - 1.0).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-3 && identity_worst < 1e-9 && within(elapsed, 60),
        format!(
            "300 pairs ({non_convex} non-convex): max rel err {worst:.2e} (< 1e-3), identical IoU err {identity_worst:.1e} (< 1e-9), {elapsed:.2?} (< 60 s)"
        ),
    )
}

// ---------------------------------------------------------------- 7

fn render_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (h, w) = (512, 1024);
    let mut worst = 0.0f64;
    let mut nadir_ok = true;
    for _ in 0..5 {
        let (x0, x1) = (-rng.random_range(0.5..4.0), rng.random_range(0.5..4.0));
        let (z0, z1) = (-rng.random_range(0.5..4.0), rng.random_range(0.5..4.0));
        let ceiling = rng.random_range(2.2..3.5);
        let cam = 1.6;
        let room = LayoutAnnotation::new(
            "box",
            vec![[x0, z0], [x0, z1], [x1, z1], [x1, z0]],
            cam,
            ceiling,
            PoseLabel::Primary,
        )
        .unwrap();
        let geometry = RoomGeometry::from_layout(&room);
        let map = render_depth_map(&geometry, h, w, cam).unwrap();
        let (lo, hi) = ([x0, -cam, z0], [x1, ceiling - cam, z1]);
        for row in 0..h {
            let phi = pixel_latitude(row, h);
            for col in 0..w {
                let theta = pixel_longitude(col, w);
                let dir = [phi.cos() * theta.sin(), phi.sin(), phi.cos() * theta.cos()];
                let want = (0..3)
                    .filter(|&k| dir[k] != 0.0)
                    .map(|k| if dir[k] > 0.0 { hi[k] / dir[k] } else { lo[k] / dir[k] })
                    .fold(f64::INFINITY, f64::min);
                worst = worst.max((map.get(row, col) - want).abs());
            }
        }
        for k in 0..8 {
            let theta = -PI + k as f64 * PI / 4.0;
            nadir_ok &= geometry.ray_distance(theta, -PI / 2.0, cam) == Some(1.6);
        }
    }
    outcome(
        worst < 1e-6 && nadir_ok,
        format!("5 cuboids at 512x1024: max err {worst:.2e} (< 1e-6); nadir = 1.6 exactly: {nadir_ok}"),
    )
}

// ---------------------------------------------------------------- CLI helpers

fn layoutforge(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> Result<(), String> {
    let out = layoutforge(args);
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "`layoutforge {}` exited {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Report rows `(group, [iou2d, iou3d, rmse, delta1])` of `report_<g>.csv`.
fn report_rows(dir: &Path, grouping: &str) -> Vec<(String, [f64; 4])> {
    let text = fs::read_to_string(dir.join(format!("report_{grouping}.csv"))).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let v: Vec<f64> = f[2..].iter().map(|x| x.parse().unwrap()).collect();
            (f[0].to_string(), [v[0], v[1], v[2], v[3]])
        })
        .collect()
}

const GROUPINGS: [&str; 3] = ["corners", "room_type", "pose"];

// ---------------------------------------------------------------- 8

fn perfect_predictor(work: &Path) -> Outcome {
    let start = Instant::now();
    let data = work.join("gen200");
    let eval = work.join("eval200");
    let steps = run_ok(&[
        "gen",
        "--count",
        "200",
        "--uniform-corners",
        "--non-manhattan-fraction",
        "0.3",
        "--seed",
        "8",
        "--out",
        s(&data),
    ])
    .and_then(|_| {
        run_ok(&[
            "eval",
            "--annotations",
            s(&data.join("rooms")),
            "--predictions",
            s(&data.join("labels")),
            "--out",
            s(&eval),
        ])
    });
    if let Err(e) = steps {
        return outcome(false, e);
    }
    let mut groups = 0;
    let mut bad = Vec::new();
    let mut missing = Vec::new();
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(data.join("manifest.json")).unwrap()).unwrap();
    for dim in ["corners", "room_type"] {
        for bin in manifest["distribution"][dim].as_array().unwrap() {
            if bin["count"] == 0 {
                missing.push(bin["key"].to_string());
            }
        }
    }
    for g in GROUPINGS {
        for (group, v) in report_rows(&eval, g) {
            groups += 1;
            if v != [1.0, 1.0, 0.0, 1.0] {
                bad.push(format!("{g}/{group}: {v:?}"));
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        bad.is_empty() && missing.is_empty() && within(elapsed, 120),
        format!(
            "{groups} report rows (incl. macro) exact; deviating: {bad:?}; empty buckets/classes: {missing:?}; {elapsed:.2?} (< 2 min)"
        ),
    )
}

// ---------------------------------------------------------------- 9

fn degradation(work: &Path) -> Outcome {
    let data = work.join("gen200");
    let labels = data.join("labels");
    let factors = [1.05, 1.15, 1.30];
    let mut per_factor: Vec<BTreeMap<(String, String), [f64; 4]>> = Vec::new();
    for f in factors {
        let pred_dir = work.join(format!("scaled_{f}"));
        fs::create_dir_all(&pred_dir).unwrap();
        for entry in fs::read_dir(&labels).unwrap() {
            let path = entry.unwrap().path();
            let mut p = parse_prediction(&fs::read_to_string(&path).unwrap(), true)
                .unwrap()
                .value;
            p.depths.iter_mut().for_each(|d| *d *= f);
            fs::write(pred_dir.join(path.file_name().unwrap()), prediction_to_json(&p)).unwrap();
        }
        let out = work.join(format!("eval_scaled_{f}"));
        if let Err(e) = run_ok(&[
            "eval",
            "--annotations",
            s(&data.join("rooms")),
            "--predictions",
            s(&pred_dir),
            "--out",
            s(&out),
        ]) {
            return outcome(false, e);
        }
        let mut rows = BTreeMap::new();
        for g in GROUPINGS {
            for (group, v) in report_rows(&out, g) {
                rows.insert((g.to_string(), group), v);
            }
        }
        per_factor.push(rows);
    }
    let mut violations: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for (key, first) in &per_factor[0] {
        let series: Vec<[f64; 4]> = std::iter::once(*first)
            .chain(per_factor[1..].iter().map(|m| m[key]))
            .collect();
        let checks = [("iou2d", 0, true), ("delta1", 3, true), ("rmse", 2, false)];
        for (name, idx, decreasing) in checks {
            let ok = series.windows(2).all(|w| {
                if decreasing {
                    w[1][idx] < w[0][idx]
                } else {
                    w[1][idx] > w[0][idx]
                }
            });
            if !ok {
                let values: Vec<String> = series.iter().map(|v| format!("{:.4}", v[idx])).collect();
                violations
                    .entry(name)
                    .or_default()
                    .push(format!("{}/{}: {}", key.0, key.1, values.join(" -> ")));
            }
        }
    }
    let groups = per_factor[0].len();
    let summary: Vec<String> = ["iou2d", "rmse", "delta1"]
        .iter()
        .map(|m| match violations.get(m) {
            None => format!("{m} strict in {groups}/{groups} groups"),
            Some(v) => format!("{m} not strict in {}/{groups} groups, e.g. {}", v.len(), v[0]),
        })
        .collect();
    outcome(violations.is_empty(), summary.join("; "))
}

// ---------------------------------------------------------------- 10

fn tree_bytes(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism(work: &Path) -> Outcome {
    let data = work.join("gen200");
    let rooms = data.join("rooms");
    let labels = data.join("labels");
    let features = work.join("features");
    fs::create_dir_all(&features).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for name in ["a", "b"] {
        let f = FeatureSequence::new(256, 8, (0..256 * 8).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
        layoutforge::io::write_lfsq_file(&features.join(format!("{name}.lfsq")), &f).unwrap();
    }
    let fa = features.join("a.lfsq");
    let fb = features.join("b.lfsq");
    let la = labels.join("room_00000.json");
    let lb = labels.join("room_00001.json");
    let ann = rooms.join("room_00002.json");
    let metrics = work.join("eval200").join("metrics.csv");

    let commands: Vec<(&str, ArgBuilder)> = vec![
        (
            "gen",
            Box::new(|o: &Path| {
                vec![
                    "gen".into(),
                    "--count".into(),
                    "40".into(),
                    "--seed".into(),
                    "3".into(),
                    "--out".into(),
                    s(o).into(),
                ]
            }),
        ),
        (
            "eval",
            Box::new(|o: &Path| {
                vec![
                    "eval".into(),
                    "--annotations".into(),
                    s(&rooms).into(),
                    "--predictions".into(),
                    s(&labels).into(),
                    "--out".into(),
                    s(o).into(),
                ]
            }),
        ),
        (
            "report",
            Box::new(|o: &Path| {
                vec![
                    "report".into(),
                    "--metrics".into(),
                    s(&metrics).into(),
                    "--annotations".into(),
                    s(&rooms).into(),
                    "--grouping".into(),
                    "room_type".into(),
                    "--out".into(),
                    s(o).into(),
                ]
            }),
        ),
        (
            "augment avg",
            Box::new(|o: &Path| {
                vec![
                    "augment".into(),
                    "--mode".into(),
                    "avg".into(),
                    "--features".into(),
                    s(&fa).into(),
                    "--labels".into(),
                    s(&la).into(),
                    "--seed".into(),
                    "5".into(),
                    "--out".into(),
                    s(o).into(),
                ]
            }),
        ),
        (
            "augment csmix",
            Box::new(|o: &Path| {
                vec![
                    "augment".into(),
                    "--mode".into(),
                    "csmix".into(),
                    "--features".into(),
                    s(&fa).into(),
                    "--features".into(),
                    s(&fb).into(),
                    "--labels".into(),
                    s(&la).into(),
                    "--labels".into(),
                    s(&lb).into(),
                    "--seed".into(),
                    "5".into(),
                    "--out".into(),
                    s(o).into(),
                ]
            }),
        ),
        (
            "render-depth",
            Box::new(|o: &Path| {
                fs::create_dir_all(o).unwrap();
                vec![
                    "render-depth".into(),
                    "--annotation".into(),
                    s(&ann).into(),
                    "--resolution".into(),
                    "128x256".into(),
                    "--out".into(),
                    s(&o.join("map.ldpm")).into(),
                ]
            }),
        ),
    ];
    let mut differing = Vec::new();
    for (name, build) in &commands {
        let mut trees = Vec::new();
        for run in 0..2 {
            let out = work.join(format!("det_{}_{run}", name.replace(' ', "_")));
            let args = build(&out);
            let argv: Vec<&str> = args.iter().map(String::as_str).collect();
            if let Err(e) = run_ok(&argv) {
                return outcome(false, e);
            }
            trees.push(tree_bytes(&out));
        }
        if trees[0] != trees[1] || trees[0].is_empty() {
            differing.push(*name);
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{} commands run twice; differing outputs: {differing:?}",
            commands.len()
        ),
    )
}

fn main() {
    let work = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<(&str, Criterion)> = vec![
        ("geometry round-trip", Box::new(geometry_round_trip)),
        ("occlusion oracle", Box::new(occlusion_oracle)),
        (
            "loss identity and finite differences",
            Box::new(loss_identity_and_derivatives),
        ),
        ("AdaIN statistics contract", Box::new(adain_contract)),
        ("column splice contract", Box::new(splice_contract)),
        ("polygon IoU oracle", Box::new(polygon_iou_oracle)),
        ("depth rendering oracle", Box::new(render_oracle)),
        (
            "perfect predictor end-to-end",
            Box::new(|| perfect_predictor(work.path())),
        ),
        ("degradation monotonicity", Box::new(|| degradation(work.path()))),
        ("determinism", Box::new(|| determinism(work.path()))),
    ];
    let mut failed = BTreeSet::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed.insert(i + 1);
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed.len(),
        criteria.len()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
