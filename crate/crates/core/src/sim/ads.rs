//! Scripted driving stacks, each with one characteristic failure.

use crate::error::Result;
use crate::geometry::{Point2, Polyline};
use crate::scenario::{ActorKind, AdsSpec};
use crate::trajectory::{Trajectory, TrajectorySource};
use crate::world::{BevSnapshot, Participant};

/// Waypoints span this far along the route, m.
const PLAN_REACH: f64 = 30.0;
const PLAN_SPACING: f64 = 1.0;
/// Extra lateral clearance when deciding whether something is in the way, m.
const PATH_MARGIN: f64 = 0.3;
/// Below this a participant counts as stationary, m/s.
const STATIONARY: f64 = 0.5;
/// Car-following: desired bumper gap at standstill and per m/s, and gain.
const FOLLOW_GAP: f64 = 5.0;
const FOLLOW_HEADWAY: f64 = 1.2;
const FOLLOW_GAIN: f64 = 0.5;
const FOLLOW_RANGE: f64 = 40.0;

#[derive(Debug, Clone)]
pub struct AdsStub {
    spec: AdsSpec,
    route: Polyline,
}

/// A participant in the ego's straight-ahead path.
struct Blocker {
    gap: f64,
    speed_along: f64,
}

fn blocker(snap: &BevSnapshot, p: &Participant) -> Option<Blocker> {
    let ego = &snap.ego.bbox;
    let local = ego.center.to_local(&p.bbox.position());
    if local.x <= 0.0 {
        return None;
    }
    let [fwd, left] = ego.axes();
    let reach = ego.width / 2.0 + p.bbox.half_extent_along(&left) + PATH_MARGIN;
    if local.y.abs() > reach {
        return None;
    }
    Some(Blocker {
        gap: local.x - ego.length / 2.0 - p.bbox.half_extent_along(&fwd),
        speed_along: p.bbox.speed * (p.bbox.center.theta - ego.center.theta).cos(),
    })
}

impl AdsStub {
    pub fn new(spec: AdsSpec, route: Polyline) -> Self {
        Self { spec, route }
    }

    pub fn name(&self) -> &'static str {
        self.spec.name()
    }

    fn cruise_speed(&self) -> f64 {
        match self.spec {
            AdsSpec::ObliviousFollower { cruise_speed }
            | AdsSpec::SignalIgnorer { cruise_speed }
            | AdsSpec::Freezer { cruise_speed, .. }
            | AdsSpec::Swerver { cruise_speed, .. } => cruise_speed,
        }
    }

    /// Route waypoints ahead of the ego's projection, shifted left by `offset`.
    fn route_waypoints(&self, snap: &BevSnapshot, offset: f64) -> Vec<Point2> {
        let s = self.route.project(&snap.ego.bbox.position()).station;
        let n = (PLAN_REACH / PLAN_SPACING) as usize;
        (1..=n)
            .map(|k| {
                let pose = self.route.pose_at(s + k as f64 * PLAN_SPACING);
                pose.position() + Point2::new(-pose.theta.sin(), pose.theta.cos()) * offset
            })
            .collect()
    }

    pub fn plan(&self, snap: &BevSnapshot) -> Result<Trajectory> {
        let cruise = self.cruise_speed();
        let (offset, speed) = match self.spec {
            AdsSpec::ObliviousFollower { .. } => (0.0, cruise),
            AdsSpec::Swerver {
                swerve_frame, offset, ..
            } => (if snap.frame >= swerve_frame { offset } else { 0.0 }, cruise),
            AdsSpec::SignalIgnorer { .. } => {
                let lead = snap
                    .others
                    .iter()
                    .filter(|p| p.kind == ActorKind::Vehicle)
                    .filter_map(|p| blocker(snap, p))
                    .filter(|b| b.gap <= FOLLOW_RANGE)
                    .min_by(|a, b| a.gap.total_cmp(&b.gap));
                let speed = match lead {
                    Some(b) => {
                        let v = snap.ego.bbox.speed;
                        let wanted = FOLLOW_GAP + FOLLOW_HEADWAY * v;
                        (b.speed_along.max(0.0) + FOLLOW_GAIN * (b.gap - wanted)).clamp(0.0, cruise)
                    }
                    None => cruise,
                };
                (0.0, speed)
            }
            AdsSpec::Freezer { stop_distance, .. } => {
                let frozen = snap
                    .others
                    .iter()
                    .filter(|p| p.kind == ActorKind::StaticObstacle || p.bbox.speed < STATIONARY)
                    .filter_map(|p| blocker(snap, p))
                    .any(|b| b.gap <= stop_distance);
                (0.0, if frozen { 0.0 } else { cruise })
            }
        };
        Trajectory::new(self.route_waypoints(snap, offset), speed, TrajectorySource::Ads)
    }
}
