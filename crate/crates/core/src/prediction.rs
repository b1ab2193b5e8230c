//! Short-horizon motion prediction: kinematic bicycle rollouts for vehicles,
//! constant velocity for pedestrians, static extrapolation for obstacles and
//! virtual boxes for stop signals. Predicted boxes grow with the horizon to
//! absorb rollout error.

use serde::{Deserialize, Serialize};

use crate::error::{ArgusError, Result};
use crate::geometry::{enlarge_box, normalize_angle, OrientedBox, Pose2};
use crate::scenario::ActorKind;
use crate::trajectory::{PurePursuit, Trajectory};
use crate::world::{signal_faces, BevSnapshot, StopSignal, EGO_ID};

/// Physical bound applied to estimated and parsed accelerations, m/s².
pub const ACCEL_BOUND: f64 = 20.0;
/// Physical bound on front-wheel angle, radians.
pub const STEER_BOUND: f64 = std::f64::consts::FRAC_PI_3;
/// Below this speed the yaw-rate relation is too ill-conditioned to invert.
pub const MIN_SPEED_FOR_STEER: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KbmState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
}

impl KbmState {
    pub fn from_box(b: &OrientedBox) -> Self {
        Self {
            x: b.center.x,
            y: b.center.y,
            theta: b.center.theta,
            v: b.speed,
        }
    }

    pub fn pose(&self) -> Pose2 {
        Pose2::new(self.x, self.y, self.theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlEstimate {
    pub accel: f64,
    pub steer: f64,
}

impl ControlEstimate {
    pub fn clamped(accel: f64, steer: f64) -> Self {
        Self {
            accel: accel.clamp(-ACCEL_BOUND, ACCEL_BOUND),
            steer: steer.clamp(-STEER_BOUND, STEER_BOUND),
        }
    }
}

/// One forward-Euler step of the kinematic bicycle model. Speed is clamped at
/// zero (no reversing) and the heading is re-normalized.
pub fn kbm_step(s: &KbmState, c: &ControlEstimate, wheelbase: f64, dt: f64) -> KbmState {
    let (sin, cos) = s.theta.sin_cos();
    KbmState {
        x: s.x + s.v * cos * dt,
        y: s.y + s.v * sin * dt,
        theta: normalize_angle(s.theta + s.v * c.steer.tan() / wheelbase * dt),
        v: (s.v + c.accel * dt).max(0.0),
    }
}

/// Finite-difference controls of a surrounding actor between two frames.
/// An actor absent from either frame is assumed to coast.
pub fn estimate_controls(
    curr: &BevSnapshot,
    prev: &BevSnapshot,
    actor_id: &str,
    wheelbase: f64,
) -> ControlEstimate {
    let (Some(now), Some(before)) = (curr.participant(actor_id), prev.participant(actor_id)) else {
        return ControlEstimate::default();
    };
    let dt = curr.time - prev.time;
    if dt <= 0.0 {
        return ControlEstimate::default();
    }
    let v = now.bbox.speed;
    let accel = (v - before.bbox.speed) / dt;
    let steer = if v < MIN_SPEED_FOR_STEER {
        0.0
    } else {
        let yaw_rate = normalize_angle(now.bbox.center.theta - before.bbox.center.theta) / dt;
        (yaw_rate * wheelbase / v).atan()
    };
    ControlEstimate::clamped(accel, steer)
}

/// Parses (a, δ) for the ego from a planned trajectory: acceleration closes
/// the speed gap over one plan step, steering is the pure-pursuit angle to
/// the lookahead waypoint.
pub fn ego_controls_from_trajectory(
    traj: &Trajectory,
    ego: &KbmState,
    wheelbase: f64,
    plan_step: f64,
    pursuit: &PurePursuit,
) -> Result<ControlEstimate> {
    if traj.waypoints.len() < 2 {
        return Err(ArgusError::InvalidTrajectory(format!(
            "need at least 2 waypoints, got {}",
            traj.waypoints.len()
        )));
    }
    let accel = (traj.desired_speed - ego.v) / plan_step;
    let steer = pursuit.steer(&ego.pose(), ego.v, &traj.waypoints, wheelbase);
    Ok(ControlEstimate::clamped(accel, steer))
}

/// The 3×3 influence region of an active signal, if it binds traffic moving
/// along `ego_heading`.
pub fn stop_signal_region(sig: &StopSignal, ego_heading: f64) -> Option<OrientedBox> {
    (sig.active && signal_faces(sig.pose.theta, ego_heading)).then(|| sig.region())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnlargementCaps {
    pub ego: f64,
    pub vehicle: f64,
    pub pedestrian: f64,
}

impl Default for EnlargementCaps {
    fn default() -> Self {
        Self {
            ego: 1.3,
            vehicle: 2.0,
            pedestrian: 1.5,
        }
    }
}

impl EnlargementCaps {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("ego", self.ego), ("vehicle", self.vehicle), ("pedestrian", self.pedestrian)] {
            if !(v.is_finite() && v >= 1.0) {
                return Err(ArgusError::InvalidArgument(format!(
                    "{name} enlargement cap must be >= 1, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Linear growth from 1.0 at offset 0 to `cap` at offset `horizon`.
pub fn linear_scale(cap: f64, offset: usize, horizon: usize) -> f64 {
    if offset >= horizon {
        cap
    } else {
        1.0 + (cap - 1.0) * offset as f64 / horizon as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionSettings {
    pub horizon: usize,
    pub caps: EnlargementCaps,
    /// Time over which a trajectory's desired speed is reached, seconds.
    pub plan_step: f64,
    pub pursuit: PurePursuit,
}

impl Default for PredictionSettings {
    fn default() -> Self {
        Self {
            horizon: 60,
            caps: EnlargementCaps::default(),
            plan_step: 1.0,
            pursuit: PurePursuit::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrackKind {
    Ego,
    Vehicle,
    Pedestrian,
    StaticObstacle,
    StopRegion,
}

impl From<ActorKind> for TrackKind {
    fn from(kind: ActorKind) -> Self {
        match kind {
            ActorKind::EgoVehicle => TrackKind::Ego,
            ActorKind::Vehicle => TrackKind::Vehicle,
            ActorKind::Pedestrian => TrackKind::Pedestrian,
            ActorKind::StaticObstacle => TrackKind::StaticObstacle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictedTrack {
    pub id: String,
    pub kind: TrackKind,
    /// Indexed by frame offset 0..=horizon.
    pub boxes: Vec<OrientedBox>,
    pub scales: Vec<f64>,
}

/// Predicted boxes of the ego and every participant over [t, t+H].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictedBoxSet {
    pub horizon_start: u64,
    pub horizon_len: usize,
    pub ego: PredictedTrack,
    pub actors: Vec<PredictedTrack>,
    pub regions: Vec<PredictedTrack>,
}

fn scaled_track(
    id: &str,
    kind: TrackKind,
    states: impl Iterator<Item = OrientedBox>,
    scale: impl Fn(usize) -> f64,
) -> PredictedTrack {
    let mut boxes = Vec::new();
    let mut scales = Vec::new();
    for (i, b) in states.enumerate() {
        let f = scale(i);
        boxes.push(enlarge_box(&b, f).expect("scales are >= 1"));
        scales.push(f);
    }
    PredictedTrack {
        id: id.to_string(),
        kind,
        boxes,
        scales,
    }
}

fn kbm_rollout(
    start: KbmState,
    controls: ControlEstimate,
    wheelbase: f64,
    dt: f64,
    template: &OrientedBox,
    horizon: usize,
) -> impl Iterator<Item = OrientedBox> + '_ {
    std::iter::successors(Some(start), move |s| Some(kbm_step(s, &controls, wheelbase, dt)))
        .take(horizon + 1)
        .map(move |s| OrientedBox {
            center: s.pose(),
            length: template.length,
            width: template.width,
            speed: s.v,
        })
}

/// Rolls the ego (controls parsed from `ego_traj`) and every surrounding
/// participant forward over `settings.horizon` frames of `curr.dt`.
pub fn predict(
    curr: &BevSnapshot,
    prev: &BevSnapshot,
    ego_traj: &Trajectory,
    settings: &PredictionSettings,
) -> Result<PredictedBoxSet> {
    let horizon = settings.horizon;
    if horizon == 0 {
        return Err(ArgusError::InvalidArgument("prediction horizon must be >= 1".into()));
    }
    let dt = curr.dt;
    let caps = settings.caps;

    let ego_state = curr.ego_state();
    let ego_controls = ego_controls_from_trajectory(
        ego_traj,
        &ego_state,
        curr.ego_wheelbase,
        settings.plan_step,
        &settings.pursuit,
    )?;
    let ego = scaled_track(
        EGO_ID,
        TrackKind::Ego,
        kbm_rollout(ego_state, ego_controls, curr.ego_wheelbase, dt, &curr.ego.bbox, horizon),
        |i| linear_scale(caps.ego, i, horizon),
    );

    let actors = curr
        .others
        .iter()
        .map(|p| {
            let kind = TrackKind::from(p.kind);
            match kind {
                TrackKind::Vehicle => {
                    let wheelbase = p.bbox.length;
                    let controls = estimate_controls(curr, prev, &p.id, wheelbase);
                    scaled_track(
                        &p.id,
                        kind,
                        kbm_rollout(KbmState::from_box(&p.bbox), controls, wheelbase, dt, &p.bbox, horizon),
                        |i| linear_scale(caps.vehicle, i, horizon),
                    )
                }
                TrackKind::Pedestrian => {
                    let b = p.bbox;
                    let step = b.center.heading() * (b.speed * dt);
                    scaled_track(
                        &p.id,
                        kind,
                        (0..=horizon).map(move |i| {
                            let c = b.position() + step * i as f64;
                            OrientedBox {
                                center: Pose2::new(c.x, c.y, b.center.theta),
                                ..b
                            }
                        }),
                        |_| caps.pedestrian,
                    )
                }
                _ => {
                    let b = OrientedBox { speed: 0.0, ..p.bbox };
                    scaled_track(&p.id, kind, std::iter::repeat_n(b, horizon + 1), |_| 1.0)
                }
            }
        })
        .collect();

    let heading = curr.ego.bbox.center.theta;
    let regions = curr
        .signals
        .iter()
        .filter_map(|sig| {
            stop_signal_region(sig, heading).map(|b| {
                scaled_track(&sig.id, TrackKind::StopRegion, std::iter::repeat_n(b, horizon + 1), |_| 1.0)
            })
        })
        .collect();

    Ok(PredictedBoxSet {
        horizon_start: curr.frame,
        horizon_len: horizon,
        ego,
        actors,
        regions,
    })
}
