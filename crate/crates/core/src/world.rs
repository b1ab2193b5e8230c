//! Ground-truth world state, scripted participant motion and BEV snapshot
//! production.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geometry::{normalize_angle, sat_intersects, OrientedBox, Point2, Polyline, Pose2};
use crate::prediction::{kbm_step, ControlEstimate, KbmState};
use crate::scenario::{ActorKind, BehaviorSpec, NoiseParams, RoadMap, Scenario, SignalKind};

/// Side of the square influence region placed on the lane at a stop line.
pub const STOP_REGION_SIZE: f64 = 3.0;

/// Ground-truth speed under which the ego counts as stopped.
pub const FULL_STOP_SPEED: f64 = 0.1;

pub const EGO_ID: &str = "ego";

/// Whether a signal oriented along `signal_heading` governs traffic heading
/// along `ego_heading`.
pub fn signal_faces(signal_heading: f64, ego_heading: f64) -> bool {
    normalize_angle(ego_heading - signal_heading).abs() < std::f64::consts::FRAC_PI_2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Participant {
    pub id: String,
    pub kind: ActorKind,
    #[serde(rename = "box")]
    pub bbox: OrientedBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behavior: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopSignal {
    pub id: String,
    pub kind: SignalKind,
    pub pose: Pose2,
    pub lane: String,
    pub active: bool,
}

impl StopSignal {
    pub fn region(&self) -> OrientedBox {
        OrientedBox {
            center: self.pose,
            length: STOP_REGION_SIZE,
            width: STOP_REGION_SIZE,
            speed: 0.0,
        }
    }
}

/// One frame's bird's-eye view of the scene.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BevSnapshot {
    pub frame: u64,
    pub time: f64,
    pub dt: f64,
    pub ego: Participant,
    pub ego_wheelbase: f64,
    pub others: Vec<Participant>,
    pub signals: Vec<StopSignal>,
    #[serde(skip)]
    pub map: Arc<RoadMap>,
}

impl BevSnapshot {
    pub fn boundaries(&self) -> &[Polyline] {
        &self.map.boundaries
    }

    pub fn participant(&self, id: &str) -> Option<&Participant> {
        if id == EGO_ID {
            return Some(&self.ego);
        }
        self.others.iter().find(|p| p.id == id)
    }

    pub fn ego_state(&self) -> KbmState {
        KbmState::from_box(&self.ego.bbox)
    }

    /// Speed limit of the lane nearest the ego.
    pub fn ego_speed_limit(&self) -> Option<f64> {
        self.map
            .nearest_lane(&self.ego.bbox.position())
            .map(|lane| lane.speed_limit)
    }

    /// Active influence regions that bind the ego at its current heading.
    pub fn active_regions(&self) -> impl Iterator<Item = (&StopSignal, OrientedBox)> {
        let heading = self.ego.bbox.center.theta;
        self.signals
            .iter()
            .filter(move |s| s.active && signal_faces(s.pose.theta, heading))
            .map(|s| (s, s.region()))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Motion {
    Static,
    Straight {
        target: f64,
        start_frame: u64,
        accel: Option<f64>,
    },
    Path {
        path: Arc<Polyline>,
        station: f64,
        lateral: f64,
        target: f64,
        start_frame: u64,
        accel: Option<f64>,
    },
}

impl Motion {
    fn schedule(&self) -> Option<(f64, u64, Option<f64>)> {
        match *self {
            Motion::Static => None,
            Motion::Straight {
                target,
                start_frame,
                accel,
            }
            | Motion::Path {
                target,
                start_frame,
                accel,
                ..
            } => Some((target, start_frame, accel)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActorState {
    pub id: String,
    pub kind: ActorKind,
    #[serde(rename = "box")]
    pub bbox: OrientedBox,
    pub behavior: String,
    #[serde(skip)]
    motion: Motion,
}

impl ActorState {
    fn advance(&mut self, frame: u64, dt: f64) {
        let Some((target, start_frame, accel)) = self.motion.schedule() else {
            return;
        };
        if frame < start_frame {
            return;
        }
        let v = self.bbox.speed;
        match &mut self.motion {
            Motion::Static => {}
            Motion::Straight { .. } => {
                let h = self.bbox.center.heading();
                let p = self.bbox.position() + h * (v * dt);
                self.bbox.center = Pose2::new(p.x, p.y, self.bbox.center.theta);
            }
            Motion::Path {
                path,
                station,
                lateral,
                ..
            } => {
                *station += v * dt;
                self.bbox.center = offset_pose(path, *station, *lateral);
            }
        }
        // Speed for the next frame.
        self.bbox.speed = match accel {
            None => target,
            Some(a) if v < target => (v + a * dt).min(target),
            Some(a) => (v - a * dt).max(target),
        };
    }
}

fn offset_pose(path: &Polyline, station: f64, lateral: f64) -> Pose2 {
    let base = path.pose_at(station);
    let normal = Point2::new(-base.theta.sin(), base.theta.cos());
    let p = base.position() + normal * lateral;
    Pose2::new(p.x, p.y, base.theta)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalState {
    pub id: String,
    pub kind: SignalKind,
    pub pose: Pose2,
    pub lane: String,
    pub active: bool,
    pub green_at_frame: Option<u64>,
}

impl SignalState {
    pub fn view(&self) -> StopSignal {
        StopSignal {
            id: self.id.clone(),
            kind: self.kind,
            pose: self.pose,
            lane: self.lane.clone(),
            active: self.active,
        }
    }

    pub fn region(&self) -> OrientedBox {
        self.view().region()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EgoState {
    pub state: KbmState,
    pub length: f64,
    pub width: f64,
    pub wheelbase: f64,
}

impl EgoState {
    pub fn bbox(&self) -> OrientedBox {
        OrientedBox {
            center: Pose2::new(self.state.x, self.state.y, self.state.theta),
            length: self.length,
            width: self.width,
            speed: self.state.v,
        }
    }
}

/// Single-owner simulation state; only the run loop mutates it.
#[derive(Debug, Clone, Serialize)]
pub struct WorldState {
    pub frame: u64,
    pub dt: f64,
    pub ego: EgoState,
    pub actors: Vec<ActorState>,
    pub signals: Vec<SignalState>,
    #[serde(skip)]
    pub map: Arc<RoadMap>,
}

impl WorldState {
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let map = Arc::new(scenario.map.clone());
        let ego = EgoState {
            state: KbmState {
                x: scenario.ego.pose.x,
                y: scenario.ego.pose.y,
                theta: scenario.ego.pose.theta,
                v: scenario.ego.speed,
            },
            length: scenario.ego.length,
            width: scenario.ego.width,
            wheelbase: scenario.ego.wheelbase,
        };
        let actors = scenario
            .actors
            .iter()
            .map(|spec| {
                let behavior = &scenario.behaviors[&spec.behavior];
                let (motion, initial_speed) = resolve_motion(behavior, &spec.pose, &map);
                let center = match &motion {
                    Motion::Path {
                        path,
                        station,
                        lateral,
                        ..
                    } => offset_pose(path, *station, *lateral),
                    _ => spec.pose,
                };
                ActorState {
                    id: spec.id.clone(),
                    kind: spec.kind,
                    bbox: OrientedBox {
                        center,
                        length: spec.length,
                        width: spec.width,
                        speed: initial_speed,
                    },
                    behavior: spec.behavior.clone(),
                    motion,
                }
            })
            .collect();
        let signals = scenario
            .signals
            .iter()
            .map(|s| SignalState {
                id: s.id.clone(),
                kind: s.kind,
                pose: s.pose,
                lane: s.lane.clone(),
                active: s.green_at_frame.is_none_or(|g| g > 0),
                green_at_frame: s.green_at_frame,
            })
            .collect();
        Self {
            frame: 0,
            dt: scenario.dt(),
            ego,
            actors,
            signals,
            map,
        }
    }

    pub fn time(&self) -> f64 {
        self.frame as f64 * self.dt
    }

    pub fn ego_box(&self) -> OrientedBox {
        self.ego.bbox()
    }

    /// Moves every scripted participant by one step of `dt`.
    pub fn advance_participants(&mut self, dt: f64) {
        let frame = self.frame;
        for actor in &mut self.actors {
            actor.advance(frame, dt);
        }
    }

    /// Integrates the ego with the same kinematic step used for prediction.
    pub fn apply_ego_command(&mut self, cmd: ControlEstimate, dt: f64) {
        self.ego.state = kbm_step(&self.ego.state, &cmd, self.ego.wheelbase, dt);
    }

    /// Closes the current frame: advances the frame counter and updates
    /// signal activity (light timing, stop-sign release after a full stop).
    pub fn end_frame(&mut self) {
        self.frame += 1;
        let ego_box = self.ego_box();
        let stopped = self.ego.state.v < FULL_STOP_SPEED;
        for sig in &mut self.signals {
            match sig.kind {
                SignalKind::RedLight => {
                    if sig.green_at_frame.is_some_and(|g| self.frame >= g) {
                        sig.active = false;
                    }
                }
                SignalKind::StopSign => {
                    if sig.active
                        && stopped
                        && signal_faces(sig.pose.theta, ego_box.center.theta)
                        && sat_intersects(&ego_box, &sig.region())
                    {
                        sig.active = false;
                    }
                }
            }
        }
    }

    /// Produces the BEV for the current frame. Without noise the snapshot is
    /// an exact projection of the world. With noise every non-ego participant
    /// is first subject to dropout, then to independent Gaussian perturbation
    /// of position, heading and speed; the ego is never perturbed.
    pub fn snapshot<R: Rng + ?Sized>(&self, noise: Option<&NoiseParams>, rng: &mut R) -> BevSnapshot {
        let others = self
            .actors
            .iter()
            .filter_map(|actor| {
                let mut bbox = actor.bbox;
                if let Some(n) = noise {
                    if rng.random::<f64>() < n.drop_probability {
                        return None;
                    }
                    bbox.center = Pose2::new(
                        bbox.center.x + gaussian(rng, n.position_sigma),
                        bbox.center.y + gaussian(rng, n.position_sigma),
                        bbox.center.theta + gaussian(rng, n.heading_sigma),
                    );
                    bbox.speed = (bbox.speed + gaussian(rng, n.speed_sigma)).max(0.0);
                }
                Some(Participant {
                    id: actor.id.clone(),
                    kind: actor.kind,
                    bbox,
                    behavior: Some(actor.behavior.clone()),
                })
            })
            .collect();
        BevSnapshot {
            frame: self.frame,
            time: self.time(),
            dt: self.dt,
            ego: Participant {
                id: EGO_ID.to_string(),
                kind: ActorKind::EgoVehicle,
                bbox: self.ego_box(),
                behavior: None,
            },
            ego_wheelbase: self.ego.wheelbase,
            others,
            signals: self.signals.iter().map(SignalState::view).collect(),
            map: Arc::clone(&self.map),
        }
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    if sigma == 0.0 {
        // Still consume a draw so the stream layout does not depend on which
        // sigmas are zero.
        let _ = rng.random::<f64>();
        return 0.0;
    }
    Normal::new(0.0, sigma)
        .expect("sigma validated non-negative")
        .sample(rng)
}

fn resolve_motion(behavior: &BehaviorSpec, pose: &Pose2, map: &RoadMap) -> (Motion, f64) {
    let initial = |target: f64, start_frame: u64, accel: Option<f64>| {
        if start_frame == 0 && accel.is_none() {
            target
        } else {
            0.0
        }
    };
    match behavior {
        BehaviorSpec::Static => (Motion::Static, 0.0),
        BehaviorSpec::ConstantVelocity {
            speed,
            start_frame,
            accel,
        } => (
            Motion::Straight {
                target: *speed,
                start_frame: *start_frame,
                accel: *accel,
            },
            initial(*speed, *start_frame, *accel),
        ),
        BehaviorSpec::PathFollow {
            path,
            speed,
            start_frame,
            accel,
        } => path_motion(Arc::new(path.clone()), pose, *speed, *start_frame, *accel, initial),
        BehaviorSpec::LaneFollow {
            lane,
            speed,
            start_frame,
            accel,
        } => {
            let line = map
                .lane(lane)
                .expect("lane references are validated at load")
                .centerline
                .clone();
            path_motion(Arc::new(line), pose, *speed, *start_frame, *accel, initial)
        }
    }
}

fn path_motion(
    path: Arc<Polyline>,
    pose: &Pose2,
    target: f64,
    start_frame: u64,
    accel: Option<f64>,
    initial: impl Fn(f64, u64, Option<f64>) -> f64,
) -> (Motion, f64) {
    let proj = path.project(&pose.position());
    (
        Motion::Path {
            path,
            station: proj.station,
            lateral: proj.lateral,
            target,
            start_frame,
            accel,
        },
        initial(target, start_frame, accel),
    )
}
