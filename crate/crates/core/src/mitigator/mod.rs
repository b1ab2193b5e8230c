//! Takeover trajectory generation: waypoint rerouting around static
//! obstacles and road boundaries, and IDM speed selection over the leading
//! actors along the rerouted path.

mod astar;
mod dense;
mod idm;
mod leading;
mod occupancy;

use serde::{Deserialize, Serialize};

pub use astar::{astar, neighbours, path_length, reroute, smooth, AStarWeights};
pub use dense::{bezier_controls, dense_waypoints};
pub use idm::{idm_accel, IdmParams, LeadingActor, MIN_NET_GAP};
pub use leading::augment_leading_actors;
pub use occupancy::{boundary_bands, build_occupancy, inflate, Cell, OccupancyMap, BOUNDARY_HALF_WIDTH};

use crate::error::{ArgusError, Result};
use crate::geometry::{Point2, Polyline, Pose2};
use crate::monitor::HazardReport;
use crate::scenario::ActorKind;
use crate::trajectory::{Trajectory, TrajectorySource};
use crate::world::BevSnapshot;

/// Desired speed used when the ego is on no lane.
const FALLBACK_SPEED_LIMIT: f64 = 13.89;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MitigatorConfig {
    /// Occupancy half extent and navigation reach, m.
    pub perception: f64,
    pub cell_size: f64,
    /// Spacing of the dense Bézier samples, m.
    pub dense_spacing: f64,
    pub astar: AStarWeights,
    pub smoothing_passes: usize,
    /// Extra lateral margin of the leading-actor corridor beyond half the ego width, m.
    pub corridor_margin: f64,
    /// Navigation point distance as a fraction of the perception range.
    pub nav_fraction: f64,
    /// How far ahead colliding actors are extrapolated against the corridor, s.
    pub lookahead_s: f64,
    /// IDM parameters; `v0` is replaced by the lane-derived desired speed.
    pub idm: IdmParams,
    pub speed_limit_factor: f64,
}

impl Default for MitigatorConfig {
    fn default() -> Self {
        Self {
            perception: 40.0,
            cell_size: 1.0,
            dense_spacing: 0.5,
            astar: AStarWeights::default(),
            smoothing_passes: 3,
            corridor_margin: 0.5,
            nav_fraction: 0.9,
            lookahead_s: 3.0,
            idm: IdmParams::default(),
            speed_limit_factor: IdmParams::SPEED_LIMIT_FACTOR,
        }
    }
}

impl MitigatorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("perception", self.perception),
            ("cell size", self.cell_size),
            ("dense spacing", self.dense_spacing),
            ("speed limit factor", self.speed_limit_factor),
            ("lookahead", self.lookahead_s),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ArgusError::InvalidArgument(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.nav_fraction > 0.0 && self.nav_fraction <= 1.0) {
            return Err(ArgusError::InvalidArgument(format!(
                "navigation fraction must lie in (0, 1], got {}",
                self.nav_fraction
            )));
        }
        if self.corridor_margin < 0.0 || !self.corridor_margin.is_finite() {
            return Err(ArgusError::InvalidArgument("corridor margin must be >= 0".into()));
        }
        self.astar.validate()?;
        self.idm.validate()
    }

    /// IDM parameters for the lane the ego is on.
    pub fn idm_for(&self, snapshot: &BevSnapshot) -> IdmParams {
        let limit = snapshot.ego_speed_limit().unwrap_or(FALLBACK_SPEED_LIMIT);
        IdmParams {
            v0: self.speed_limit_factor * limit,
            ..self.idm
        }
    }
}

/// Route pose a fixed arc length ahead of the ego's projection onto the
/// route; extrapolates past the route end so it never collapses onto the ego.
pub fn navigation_point(route: &Polyline, ego: &Point2, reach: f64) -> Pose2 {
    let station = route.project(ego).station.max(0.0);
    route.pose_at(station + reach)
}

/// Navigation point moved off blocked cells: the nominal point if free,
/// else the nearest free route point further ahead inside the grid, else the
/// nearest one back towards the ego. Keeps the nominal point when none is free.
pub fn free_navigation_point(route: &Polyline, ego: &Point2, reach: f64, map: &OccupancyMap) -> Pose2 {
    let station = route.project(ego).station.max(0.0);
    let nominal = route.pose_at(station + reach);
    let free = |p: &Pose2| map.cell_of(&p.position()).is_some_and(|c| !map.is_blocked(c));
    if free(&nominal) {
        return nominal;
    }
    let step = map.cell_size;
    let ahead = (1..)
        .map(|k| route.pose_at(station + reach + k as f64 * step))
        .take_while(|p| map.cell_of(&p.position()).is_some());
    let behind = (1..)
        .map(|k| station + reach - k as f64 * step)
        .take_while(|&s| s > station + step)
        .map(|s| route.pose_at(s));
    ahead.chain(behind).find(free).unwrap_or(nominal)
}

/// Occupancy grid the mitigator plans on for this snapshot.
pub fn occupancy_for(snapshot: &BevSnapshot, cfg: &MitigatorConfig) -> OccupancyMap {
    let ego = &snapshot.ego.bbox;
    let obstacles: Vec<_> = snapshot
        .others
        .iter()
        .filter(|p| p.kind == ActorKind::StaticObstacle)
        .map(|p| p.bbox)
        .collect();
    build_occupancy(
        &ego.center,
        cfg.perception,
        cfg.cell_size,
        &obstacles,
        snapshot.boundaries(),
        ego.length,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mitigation {
    pub trajectory: Trajectory,
    pub leading: Vec<LeadingActor>,
    pub blocked_cells: usize,
    /// False when no detour exists and the ego is held.
    pub rerouted: bool,
}

/// One frame of takeover planning.
pub fn mitigate(
    snapshot: &BevSnapshot,
    nav: &Pose2,
    report: &HazardReport,
    cfg: &MitigatorConfig,
) -> Result<Mitigation> {
    mitigate_on(snapshot, nav, &occupancy_for(snapshot, cfg), report, cfg)
}

/// As [`mitigate`], on a prebuilt occupancy grid.
pub fn mitigate_on(
    snapshot: &BevSnapshot,
    nav: &Pose2,
    map: &OccupancyMap,
    report: &HazardReport,
    cfg: &MitigatorConfig,
) -> Result<Mitigation> {
    let ego = &snapshot.ego.bbox;
    let pose = ego.center;
    let idm = cfg.idm_for(snapshot);
    let chord = (nav.position() - pose.position()).norm();
    let n = ((chord / cfg.dense_spacing).ceil() as usize + 1).max(2);
    let dense = dense_waypoints(&pose, nav, &snapshot.map, n)?;
    let blocked_cells = map.blocked_count();
    let routed = reroute(&dense, map, &cfg.astar, cfg.smoothing_passes)
        .and_then(|wps| Trajectory::new(wps, 0.0, TrajectorySource::Mitigator));
    match routed {
        Ok(mut trajectory) => {
            let leading =
                augment_leading_actors(
                snapshot,
                report,
                &trajectory.waypoints,
                cfg.corridor_margin,
                idm.s0,
                cfg.lookahead_s,
            );
            let accel = leading
                .iter()
                .map(|l| idm_accel(ego.speed, Some(l), &idm))
                .fold(idm_accel(ego.speed, None, &idm), f64::min);
            trajectory.desired_speed = (ego.speed + snapshot.dt * accel).clamp(0.0, idm.v0);
            Ok(Mitigation {
                trajectory,
                leading,
                blocked_cells,
                rerouted: true,
            })
        }
        Err(ArgusError::UnreachableGoal(_)) | Err(ArgusError::InvalidTrajectory(_)) => {
            let ahead = pose.position() + pose.heading();
            let trajectory = Trajectory::new(
                vec![pose.position(), ahead],
                (ego.speed - idm.b_comf * snapshot.dt).max(0.0),
                TrajectorySource::Mitigator,
            )?;
            Ok(Mitigation {
                trajectory,
                leading: Vec::new(),
                blocked_cells,
                rerouted: false,
            })
        }
        Err(e) => Err(e),
    }
}
