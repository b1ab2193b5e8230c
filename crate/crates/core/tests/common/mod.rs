#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use argus_core::geometry::{OrientedBox, Point2, Pose2};
use argus_core::mitigator::OccupancyMap;
use argus_core::prediction::{kbm_step, ControlEstimate, KbmState};
use argus_core::scenario::{ActorKind, RoadMap};
use argus_core::trajectory::{Trajectory, TrajectorySource};
use argus_core::world::{BevSnapshot, Participant, EGO_ID};
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn golden_manifest() -> PathBuf {
    workspace_root().join("scenarios/suite.json")
}

pub fn random_box<R: Rng>(r: &mut R, span: f64) -> OrientedBox {
    OrientedBox {
        center: Pose2::new(r.random_range(-span..span), r.random_range(-span..span), r.random_range(-PI..PI)),
        length: r.random_range(0.5..6.0),
        width: r.random_range(0.5..3.0),
        speed: 0.0,
    }
}

// ---------------------------------------------------------------------------
// Polygon oracles that never project onto axes.

fn local(b: &OrientedBox, p: &Point2) -> (f64, f64) {
    let d = p - b.position();
    let (s, c) = b.center.theta.sin_cos();
    (c * d.x + s * d.y, -s * d.x + c * d.y)
}

/// Closed containment in the box interior.
pub fn inside(b: &OrientedBox, p: &Point2) -> bool {
    let (x, y) = local(b, p);
    x.abs() <= b.length / 2.0 && y.abs() <= b.width / 2.0
}

/// Distance from an inside point to the nearest edge.
fn depth_inside(b: &OrientedBox, p: &Point2) -> f64 {
    let (x, y) = local(b, p);
    (b.length / 2.0 - x.abs()).min(b.width / 2.0 - y.abs())
}

fn segment_distance(p: &Point2, a: &Point2, b: &Point2) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn edges(b: &OrientedBox) -> Vec<(Point2, Point2)> {
    let c = b.corners();
    (0..4).map(|i| (c[i], c[(i + 1) % 4])).collect()
}

/// Distance between two disjoint boxes.
pub fn polygon_gap(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let one_way = |p: &OrientedBox, q: &OrientedBox| {
        p.corners()
            .iter()
            .flat_map(|v| edges(q).into_iter().map(move |(s, e)| segment_distance(v, &s, &e)))
            .fold(f64::INFINITY, f64::min)
    };
    one_way(a, b).min(one_way(b, a))
}

fn perimeter_samples(b: &OrientedBox, spacing: f64) -> Vec<Point2> {
    edges(b)
        .into_iter()
        .flat_map(|(s, e)| {
            let n = ((e - s).norm() / spacing).ceil() as usize;
            (0..n).map(move |k| s + (e - s) * (k as f64 / n as f64))
        })
        .collect()
}

/// Intersection by perimeter sampling. Returns `None` when the pair lies
/// within `band` of touching, where sampling cannot decide reliably.
pub fn sampled_intersection(a: &OrientedBox, b: &OrientedBox, spacing: f64, band: f64) -> Option<bool> {
    let mut deepest = f64::NEG_INFINITY;
    for (p, q) in [(a, b), (b, a)] {
        for s in perimeter_samples(p, spacing) {
            if inside(q, &s) {
                deepest = deepest.max(depth_inside(q, &s));
            }
        }
    }
    if deepest >= 0.0 {
        return (deepest >= band).then_some(true);
    }
    (polygon_gap(a, b) >= band).then_some(false)
}

fn orient(a: &Point2, b: &Point2, c: &Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_cross(p1: &Point2, p2: &Point2, q1: &Point2, q2: &Point2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

/// Closed intersection by edge crossings and vertex containment.
pub fn polygons_intersect(a: &OrientedBox, b: &OrientedBox) -> bool {
    a.corners().iter().any(|v| inside(b, v))
        || b.corners().iter().any(|v| inside(a, v))
        || edges(a)
            .iter()
            .any(|(s, e)| edges(b).iter().any(|(t, f)| segments_cross(s, e, t, f)))
}

// ---------------------------------------------------------------------------
// Kinematic bicycle reference.

/// Rolls the model for `seconds` at step `dt` with fixed controls.
pub fn kbm_rollout(start: KbmState, c: ControlEstimate, wheelbase: f64, dt: f64, seconds: f64) -> KbmState {
    let steps = (seconds / dt).round() as usize;
    (0..steps).fold(start, |s, _| kbm_step(&s, &c, wheelbase, dt))
}

// ---------------------------------------------------------------------------
// Grid shortest path reference.

/// Shortest 8-connected path length between two free cells, diagonal moves
/// only past two free orthogonal neighbours; `None` when disconnected.
pub fn reference_shortest(map: &OccupancyMap, start: (usize, usize), goal: (usize, usize)) -> Option<f64> {
    let dim = map.dim;
    let mut g: UnGraph<(usize, usize), f64> = UnGraph::new_undirected();
    let mut ids: HashMap<(usize, usize), NodeIndex> = HashMap::new();
    let free = |c: i64, r: i64| c >= 0 && r >= 0 && (c as usize) < dim && (r as usize) < dim && !map.is_blocked((c as usize, r as usize));
    for r in 0..dim {
        for c in 0..dim {
            if free(c as i64, r as i64) {
                ids.insert((c, r), g.add_node((c, r)));
            }
        }
    }
    let cs = map.cell_size;
    for (&(c, r), &n) in &ids {
        let (ci, ri) = (c as i64, r as i64);
        for (dc, dr) in [(1i64, 0i64), (0, 1), (1, 1), (1, -1)] {
            let (nc, nr) = (ci + dc, ri + dr);
            if !free(nc, nr) {
                continue;
            }
            let diagonal = dc != 0 && dr != 0;
            if diagonal && !(free(ci + dc, ri) && free(ci, ri + dr)) {
                continue;
            }
            let w = if diagonal { cs * 2f64.sqrt() } else { cs };
            g.add_edge(n, ids[&(nc as usize, nr as usize)], w);
        }
    }
    let (s, t) = (*ids.get(&start)?, *ids.get(&goal)?);
    dijkstra(&g, s, Some(t), |e| *e.weight()).get(&t).copied()
}

// ---------------------------------------------------------------------------
// Snapshots.

pub fn participant(id: &str, kind: ActorKind, pose: Pose2, length: f64, width: f64, speed: f64) -> Participant {
    Participant {
        id: id.into(),
        kind,
        bbox: OrientedBox {
            center: pose,
            length,
            width,
            speed,
        },
        behavior: None,
    }
}

pub fn snapshot(frame: u64, ego: Participant, others: Vec<Participant>) -> BevSnapshot {
    BevSnapshot {
        frame,
        time: frame as f64 * 0.05,
        dt: 0.05,
        ego,
        ego_wheelbase: 2.7,
        others,
        signals: vec![],
        map: Arc::new(RoadMap {
            lanes: vec![],
            boundaries: vec![],
        }),
    }
}

pub fn straight_plan(speed: f64) -> Trajectory {
    Trajectory::new(
        (1..=40).map(|i| Point2::new(i as f64, 0.0)).collect(),
        speed,
        TrajectorySource::Ads,
    )
    .expect("valid plan")
}

pub fn ego(speed: f64) -> Participant {
    participant(EGO_ID, ActorKind::EgoVehicle, Pose2::new(0.0, 0.0, 0.0), 4.5, 2.0, speed)
}
