//! Short-horizon trajectories and the pure-pursuit steering law shared by the
//! ego-control parser and the vehicle controller.

use serde::{Deserialize, Serialize};

use crate::error::{ArgusError, Result};
use crate::geometry::{Point2, Pose2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TrajectorySource {
    Ads,
    Mitigator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub waypoints: Vec<Point2>,
    pub desired_speed: f64,
    pub source: TrajectorySource,
}

impl Trajectory {
    /// Builds a trajectory, dropping consecutive duplicate waypoints.
    pub fn new(waypoints: Vec<Point2>, desired_speed: f64, source: TrajectorySource) -> Result<Self> {
        let mut pts: Vec<Point2> = Vec::with_capacity(waypoints.len());
        for p in waypoints {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(ArgusError::InvalidTrajectory("non-finite waypoint".into()));
            }
            if pts.last().is_none_or(|q| (p - q).norm() > 1e-9) {
                pts.push(p);
            }
        }
        if pts.len() < 2 {
            return Err(ArgusError::InvalidTrajectory(format!(
                "need at least 2 distinct waypoints, got {}",
                pts.len()
            )));
        }
        if !(desired_speed.is_finite() && desired_speed >= 0.0) {
            return Err(ArgusError::InvalidTrajectory(format!(
                "desired speed must be >= 0, got {desired_speed}"
            )));
        }
        Ok(Self {
            waypoints: pts,
            desired_speed,
            source,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.waypoints.len() < 2 {
            return Err(ArgusError::InvalidTrajectory(format!(
                "need at least 2 waypoints, got {}",
                self.waypoints.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurePursuit {
    /// Lookahead never shrinks below this, meters.
    pub min_lookahead: f64,
    /// Lookahead growth with speed, seconds.
    pub lookahead_gain: f64,
    /// Front-wheel angle bound, radians.
    pub max_steer: f64,
}

impl Default for PurePursuit {
    fn default() -> Self {
        Self {
            min_lookahead: 4.0,
            lookahead_gain: 0.6,
            max_steer: std::f64::consts::FRAC_PI_3,
        }
    }
}

impl PurePursuit {
    pub fn lookahead(&self, speed: f64) -> f64 {
        self.min_lookahead.max(self.lookahead_gain * speed)
    }

    /// First waypoint ahead of the vehicle at least one lookahead away, else
    /// the farthest waypoint ahead, else the last waypoint.
    pub fn target(&self, pose: &Pose2, speed: f64, waypoints: &[Point2]) -> Option<Point2> {
        let ld = self.lookahead(speed);
        let mut fallback = None;
        for wp in waypoints {
            let local = pose.to_local(wp);
            if local.x <= 0.0 {
                continue;
            }
            if local.norm() >= ld {
                return Some(*wp);
            }
            fallback = Some(*wp);
        }
        fallback.or_else(|| waypoints.last().copied())
    }

    /// Curvature of the arc through the vehicle tangent to its heading and
    /// through `target`: κ = 2·y / d².
    pub fn curvature(pose: &Pose2, target: &Point2) -> f64 {
        let local = pose.to_local(target);
        let d2 = local.norm_squared();
        if d2 < 1e-12 {
            return 0.0;
        }
        2.0 * local.y / d2
    }

    pub fn steer(&self, pose: &Pose2, speed: f64, waypoints: &[Point2], wheelbase: f64) -> f64 {
        match self.target(pose, speed, waypoints) {
            Some(t) => (Self::curvature(pose, &t) * wheelbase)
                .atan()
                .clamp(-self.max_steer, self.max_steer),
            None => 0.0,
        }
    }
}
