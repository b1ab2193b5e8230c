//! Ground-truth infraction detection, shared by the live loop and replay.

use std::collections::BTreeSet;

use crate::geometry::{sat_intersects, OrientedBox};
use crate::scenario::{ActorKind, SignalKind};
use crate::world::{signal_faces, Participant, StopSignal};

use super::metrics::{Penalties, ViolationEvent, ViolationKind};

#[derive(Debug, Clone)]
pub struct ViolationDetector {
    penalties: Penalties,
    epsilon: f64,
    stall_limit: u64,
    stalled: u64,
    /// Active regions the ego currently overlaps.
    inside: BTreeSet<String>,
    /// Signals already charged once.
    charged: BTreeSet<String>,
}

impl ViolationDetector {
    pub fn new(penalties: Penalties, epsilon: f64, stall_timeout_s: f64, dt: f64) -> Self {
        Self {
            penalties,
            epsilon,
            stall_limit: (stall_timeout_s / dt).round().max(1.0) as u64,
            stalled: 0,
            inside: BTreeSet::new(),
            charged: BTreeSet::new(),
        }
    }

    fn event(&self, frame: u64, kind: ViolationKind, subject: Option<String>) -> ViolationEvent {
        ViolationEvent {
            frame,
            kind,
            penalty: self.penalties.of(kind),
            subject,
        }
    }

    /// Infractions at `frame` given the ground-truth state after the step.
    /// A signal is run when the ego leaves its region while it is still
    /// active; a stall times out after the configured span below epsilon
    /// outside every active region.
    pub fn observe(
        &mut self,
        frame: u64,
        ego: &OrientedBox,
        actors: &[Participant],
        signals: &[StopSignal],
    ) -> Vec<ViolationEvent> {
        let mut out = Vec::new();
        for a in actors.iter().filter(|a| sat_intersects(ego, &a.bbox)) {
            let kind = match a.kind {
                ActorKind::Pedestrian => ViolationKind::CollisionPedestrian,
                ActorKind::StaticObstacle => ViolationKind::CollisionStatic,
                ActorKind::Vehicle | ActorKind::EgoVehicle => ViolationKind::CollisionVehicle,
            };
            out.push(self.event(frame, kind, Some(a.id.clone())));
        }

        let mut in_active_region = false;
        for s in signals.iter().filter(|s| signal_faces(s.pose.theta, ego.center.theta)) {
            let overlapping = sat_intersects(ego, &s.region());
            if overlapping && s.active {
                in_active_region = true;
                self.inside.insert(s.id.clone());
            } else if !overlapping && self.inside.remove(&s.id) && s.active && self.charged.insert(s.id.clone()) {
                let kind = match s.kind {
                    SignalKind::StopSign => ViolationKind::StopSign,
                    SignalKind::RedLight => ViolationKind::RedLight,
                };
                out.push(self.event(frame, kind, Some(s.id.clone())));
            }
        }

        if ego.speed < self.epsilon && !in_active_region {
            self.stalled += 1;
            if self.stalled == self.stall_limit {
                out.push(self.event(frame, ViolationKind::StallTimeout, None));
            }
        } else {
            self.stalled = 0;
        }
        out
    }
}
