use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use super::occupancy::{Cell, OccupancyMap};
use crate::error::{ArgusError, Result};
use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AStarWeights {
    /// Cost per meter of distance from the nearest dense waypoint.
    pub w_dev: f64,
    /// Cost per radian of heading change between consecutive steps.
    pub w_turn: f64,
}

impl Default for AStarWeights {
    fn default() -> Self {
        Self { w_dev: 1.0, w_turn: 0.5 }
    }
}

impl AStarWeights {
    pub const ZERO: Self = Self { w_dev: 0.0, w_turn: 0.0 };

    pub fn validate(&self) -> Result<()> {
        if !(self.w_dev.is_finite() && self.w_dev >= 0.0 && self.w_turn.is_finite() && self.w_turn >= 0.0) {
            return Err(ArgusError::InvalidArgument(format!(
                "A* penalty weights must be >= 0, got w_dev={} w_turn={}",
                self.w_dev, self.w_turn
            )));
        }
        Ok(())
    }
}

/// Neighbour offsets counter-clockwise from +x; index k has heading k·π/4.
const DIRS: [(i64, i64); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
const NO_DIR: usize = 8;

/// Neighbours reachable in one 8-connected step. Diagonal steps need both
/// adjacent orthogonal cells free so paths never cut a blocked corner.
pub fn neighbours(map: &OccupancyMap, cell: Cell) -> impl Iterator<Item = (usize, Cell)> + '_ {
    let dim = map.dim as i64;
    let free = move |c: i64, r: i64| c >= 0 && r >= 0 && c < dim && r < dim && !map.is_blocked((c as usize, r as usize));
    DIRS.iter().enumerate().filter_map(move |(k, &(dc, dr))| {
        let (c, r) = (cell.0 as i64 + dc, cell.1 as i64 + dr);
        let ok = free(c, r) && (dc == 0 || dr == 0 || (free(cell.0 as i64 + dc, cell.1 as i64) && free(cell.0 as i64, cell.1 as i64 + dr)));
        ok.then_some((k, (c as usize, r as usize)))
    })
}

fn step_length(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        std::f64::consts::SQRT_2
    }
}

fn turn_angle(from: usize, to: usize) -> f64 {
    if from == NO_DIR {
        return 0.0;
    }
    let d = (from as i64 - to as i64).rem_euclid(8);
    d.min(8 - d) as f64 * FRAC_PI_4
}

fn octile(a: Cell, b: Cell) -> f64 {
    let dx = a.0.abs_diff(b.0) as f64;
    let dy = a.1.abs_diff(b.1) as f64;
    dx.max(dy) + (std::f64::consts::SQRT_2 - 1.0) * dx.min(dy)
}

#[derive(Debug, Clone, Copy)]
struct Open {
    f: f64,
    dev: f64,
    index: usize,
    dir: usize,
    g: f64,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    // Reversed so the max-heap pops the smallest key.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(other.dev.total_cmp(&self.dev))
            .then(other.index.cmp(&self.index))
            .then(other.dir.cmp(&self.dir))
    }
}

/// Cost-penalised 8-connected A* from `start` to `goal`; returns the cell
/// path including both ends. The start cell may itself be blocked.
pub fn astar(map: &OccupancyMap, start: Cell, goal: Cell, dense: &[Point2], weights: &AStarWeights) -> Result<Vec<Cell>> {
    if map.is_blocked(goal) {
        return Err(ArgusError::UnreachableGoal(format!("goal cell {goal:?} is blocked")));
    }
    let cs = map.cell_size;
    let n = map.dim * map.dim;
    let mut dev_cache = vec![f64::NAN; n];
    let mut deviation = |cell: Cell| {
        let i = map.index(cell);
        if dev_cache[i].is_nan() {
            let c = map.cell_center(cell);
            dev_cache[i] = dense.iter().map(|p| (p - c).norm()).fold(f64::INFINITY, f64::min);
            if !dev_cache[i].is_finite() {
                dev_cache[i] = 0.0;
            }
        }
        weights.w_dev * dev_cache[i]
    };
    let state = |index: usize, dir: usize| index * 9 + dir;
    let mut best = vec![f64::INFINITY; n * 9];
    let mut parent = vec![usize::MAX; n * 9];
    let mut closed = vec![false; n * 9];
    let mut heap = BinaryHeap::new();
    let s0 = state(map.index(start), NO_DIR);
    best[s0] = 0.0;
    heap.push(Open {
        f: octile(start, goal) * cs,
        dev: deviation(start),
        index: map.index(start),
        dir: NO_DIR,
        g: 0.0,
    });
    while let Some(cur) = heap.pop() {
        let sid = state(cur.index, cur.dir);
        if closed[sid] {
            continue;
        }
        closed[sid] = true;
        let cell = (cur.index % map.dim, cur.index / map.dim);
        if cell == goal {
            let mut path = vec![cell];
            let mut s = sid;
            while parent[s] != usize::MAX {
                s = parent[s];
                let idx = s / 9;
                path.push((idx % map.dim, idx / map.dim));
            }
            path.reverse();
            return Ok(path);
        }
        let nbrs: Vec<(usize, Cell)> = neighbours(map, cell).collect();
        for (k, next) in nbrs {
            let dev = deviation(next);
            let g = cur.g + step_length(k) * cs + dev + weights.w_turn * turn_angle(cur.dir, k);
            let ni = map.index(next);
            let nid = state(ni, k);
            if closed[nid] || g >= best[nid] {
                continue;
            }
            best[nid] = g;
            parent[nid] = sid;
            heap.push(Open {
                f: g + octile(next, goal) * cs,
                dev,
                index: ni,
                dir: k,
                g,
            });
        }
    }
    Err(ArgusError::UnreachableGoal(format!(
        "no path from cell {start:?} to cell {goal:?}"
    )))
}

/// Euclidean length of a cell path measured between cell centres.
pub fn path_length(map: &OccupancyMap, path: &[Cell]) -> f64 {
    path.windows(2)
        .map(|w| (map.cell_center(w[1]) - map.cell_center(w[0])).norm())
        .sum()
}

/// Corner-cutting averaging with fixed endpoints; a move that would land in
/// a blocked cell is rejected.
pub fn smooth(points: &[Point2], map: &OccupancyMap, passes: usize) -> Vec<Point2> {
    let mut pts = points.to_vec();
    for _ in 0..passes {
        let prev = pts.clone();
        for k in 1..prev.len().saturating_sub(1) {
            let cand = prev[k - 1] * 0.25 + prev[k] * 0.5 + prev[k + 1] * 0.25;
            if map.is_traversable_point(&cand) {
                pts[k] = cand;
            }
        }
    }
    pts
}

/// Free cells connected to `start` under the A* move rules.
fn reachable_from(map: &OccupancyMap, start: Cell) -> Vec<bool> {
    let mut seen = vec![false; map.dim * map.dim];
    let mut stack = vec![start];
    seen[map.index(start)] = true;
    while let Some(cell) = stack.pop() {
        for (_, next) in neighbours(map, cell) {
            let i = map.index(next);
            if !seen[i] {
                seen[i] = true;
                stack.push(next);
            }
        }
    }
    seen
}

/// Keeps traversable dense waypoints and replaces each blocked run with an
/// A* detour from the last kept waypoint to the next traversable one.
pub fn reroute(dense: &[Point2], map: &OccupancyMap, weights: &AStarWeights, smoothing_passes: usize) -> Result<Vec<Point2>> {
    let Some(&first) = dense.first() else {
        return Err(ArgusError::InvalidArgument("no dense waypoints".into()));
    };
    let mut rw = vec![first];
    let mut i = 1;
    while i < dense.len() {
        let wp = dense[i];
        if map.is_traversable_point(&wp) {
            rw.push(wp);
            i += 1;
            continue;
        }
        let last = *rw.last().expect("non-empty");
        let start = map
            .cell_of(&last)
            .ok_or_else(|| ArgusError::UnreachableGoal("detour start lies outside the map".into()))?;
        // Resume at the first traversable waypoint the detour can reach; ones
        // sealed off in pockets are skipped.
        let reach = reachable_from(map, start);
        let Some((j, goal)) = (i + 1..dense.len()).find_map(|j| {
            map.cell_of(&dense[j])
                .filter(|&c| reach[map.index(c)])
                .map(|c| (j, c))
        }) else {
            return Err(ArgusError::UnreachableGoal(
                "no reachable traversable waypoint beyond the blocked stretch".into(),
            ));
        };
        let path = astar(map, start, goal, dense, weights)?;
        for &cell in path.iter().skip(1).take(path.len().saturating_sub(2)) {
            rw.push(map.cell_center(cell));
        }
        rw.push(dense[j]);
        i = j + 1;
    }
    rw.dedup_by(|a, b| (*a - *b).norm() < 1e-9);
    Ok(smooth(&rw, map, smoothing_passes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{OrientedBox, Polyline, Pose2};
    use crate::mitigator::occupancy::build_occupancy;

    fn line(n: usize) -> Vec<Point2> {
        (0..n).map(|i| Point2::new(i as f64 * 0.5, 0.25)).collect()
    }

    fn road_with_block() -> OccupancyMap {
        let bounds = vec![
            Polyline::new(vec![Point2::new(-50.0, -4.0), Point2::new(50.0, -4.0)]).unwrap(),
            Polyline::new(vec![Point2::new(-50.0, 8.0), Point2::new(50.0, 8.0)]).unwrap(),
        ];
        let ob = OrientedBox {
            center: Pose2::new(12.0, -1.0, 0.0),
            length: 4.0,
            width: 2.0,
            speed: 0.0,
        };
        build_occupancy(&Pose2::new(0.0, 0.0, 0.0), 40.0, 1.0, &[ob], &bounds, 4.0)
    }

    #[test]
    fn free_path_passes_through() {
        let map = OccupancyMap::new(Pose2::new(0.0, 0.0, 0.0), 40.0, 1.0);
        let dense = line(61);
        let out = reroute(&dense, &map, &AStarWeights::default(), 3).unwrap();
        assert_eq!(out.len(), dense.len());
        for (a, b) in out.iter().zip(&dense) {
            approx::assert_relative_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn blocked_lane_forces_a_detour() {
        let map = road_with_block();
        let dense = line(61);
        let out = reroute(&dense, &map, &AStarWeights::default(), 3).unwrap();
        assert_eq!(out[0], dense[0]);
        assert!(out.iter().all(|p| map.is_traversable_point(p)));
        assert!(out.iter().any(|p| p.y > 2.0), "path never left the lane");
        let len: f64 = out.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        assert!(len >= (dense[60] - dense[0]).norm());
    }

    #[test]
    fn walled_goal_is_unreachable() {
        let mut map = OccupancyMap::new(Pose2::new(0.0, 0.0, 0.0), 10.0, 1.0);
        // Wall across the whole grid at column 15.
        for row in 0..map.dim {
            map.set_blocked((15, row));
        }
        let dense: Vec<Point2> = (0..17).map(|i| Point2::new(i as f64, 0.5)).collect();
        let err = reroute(&dense, &map, &AStarWeights::default(), 3).unwrap_err();
        assert!(matches!(err, ArgusError::UnreachableGoal(_)));
    }

    #[test]
    fn sealed_pocket_after_a_wall_is_skipped() {
        // Cell (c, r) covers [c, c+1] × [r, r+1].
        let mut map = OccupancyMap::new(Pose2::new(15.0, 15.0, 0.0), 15.0, 1.0);
        for row in 13..=17 {
            map.set_blocked((10, row));
        }
        for col in 11..=13 {
            for row in 14..=16 {
                if (col, row) != (12, 15) {
                    map.set_blocked((col, row));
                }
            }
        }
        let dense: Vec<Point2> = (0..30).map(|i| Point2::new(i as f64 + 0.5, 15.5)).collect();
        let out = reroute(&dense, &map, &AStarWeights::default(), 0).unwrap();
        assert!(out.iter().all(|p| map.is_traversable_point(p)));
        assert!(!out.contains(&Point2::new(12.5, 15.5)));
        assert_eq!(out.last(), dense.last());
    }

    #[test]
    fn zero_weight_path_on_open_grid_is_octile() {
        let map = OccupancyMap::new(Pose2::new(0.0, 0.0, 0.0), 10.0, 1.0);
        let path = astar(&map, (2, 3), (15, 7), &[], &AStarWeights::ZERO).unwrap();
        approx::assert_relative_eq!(path_length(&map, &path), 9.0 + 4.0 * std::f64::consts::SQRT_2, epsilon = 1e-9);
    }

    #[test]
    fn astar_is_deterministic() {
        let map = road_with_block();
        let dense = line(61);
        let a = astar(&map, (40, 40), (70, 40), &dense, &AStarWeights::default()).unwrap();
        let b = astar(&map, (40, 40), (70, 40), &dense, &AStarWeights::default()).unwrap();
        assert_eq!(a, b);
    }
}
