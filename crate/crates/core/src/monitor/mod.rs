//! Hazard evaluation over predicted box sets and maintenance of the takeover
//! and recovery buffers.

mod buffers;
mod scoring;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use buffers::HazardQueue;
pub use scoring::{f_beta, score_takeovers, TakeoverLabels, TakeoverScore, F_BETA};

use crate::error::{ArgusError, Result};
use crate::geometry::sat_intersects;
use crate::prediction::{EnlargementCaps, PredictedBoxSet, PredictionSettings};
use crate::scenario::SignalKind;
use crate::trajectory::PurePursuit;
use crate::world::BevSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonitorConfig {
    /// Collision and signal queue length.
    #[serde(rename = "M")]
    pub m: usize,
    /// Stall queue length.
    #[serde(rename = "N")]
    pub n: usize,
    /// Recovery queue length.
    #[serde(rename = "R")]
    pub r: usize,
    /// Takeover threshold on the collision and signal queues.
    pub l: usize,
    /// Prediction horizon in frames.
    #[serde(rename = "H")]
    pub horizon: usize,
    /// Near-stop speed threshold, m/s.
    pub epsilon: f64,
    pub caps: EnlargementCaps,
    pub plan_step: f64,
    pub pursuit: PurePursuit,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            m: 5,
            n: 20,
            r: 20,
            l: 4,
            horizon: 60,
            epsilon: 0.1,
            caps: EnlargementCaps::default(),
            plan_step: 1.0,
            pursuit: PurePursuit::default(),
        }
    }
}

impl MonitorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ArgusError::InvalidArgument(msg));
        if self.m == 0 || self.n == 0 || self.r == 0 || self.horizon == 0 {
            return bad("M, N, R and H must all be >= 1".into());
        }
        if self.l == 0 || self.l > self.m {
            return bad(format!("threshold l must satisfy 1 <= l <= M (l={}, M={})", self.l, self.m));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if !(self.plan_step.is_finite() && self.plan_step > 0.0) {
            return bad(format!("plan step must be > 0, got {}", self.plan_step));
        }
        self.caps.validate()
    }

    pub fn prediction(&self) -> PredictionSettings {
        PredictionSettings {
            horizon: self.horizon,
            caps: self.caps,
            plan_step: self.plan_step,
            pursuit: self.pursuit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HazardReport {
    pub frame: u64,
    /// Earliest absolute frame at which the ego is predicted to intersect a
    /// participant.
    pub min_collision_frame: Option<u64>,
    pub collision_flag: bool,
    pub sigvio_flag: bool,
    pub stalling_flag: bool,
    pub colliding_actors: BTreeSet<String>,
}

impl HazardReport {
    pub fn any(&self) -> bool {
        self.collision_flag || self.sigvio_flag || self.stalling_flag
    }
}

/// The three takeover queues, the recovery queue and the previous minimum
/// collision frame. Written only by the monitor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BufferBank {
    pub collision: HazardQueue,
    pub signal: HazardQueue,
    pub stall: HazardQueue,
    pub recovery: HazardQueue,
    pub prev_c: Option<u64>,
    pub last_frame: Option<u64>,
}

impl BufferBank {
    pub fn new(cfg: &MonitorConfig) -> Self {
        Self {
            collision: HazardQueue::new(cfg.m),
            signal: HazardQueue::new(cfg.m),
            stall: HazardQueue::new(cfg.n),
            recovery: HazardQueue::new(cfg.r),
            prev_c: None,
            last_frame: None,
        }
    }

    pub fn reset_recovery(&mut self) {
        self.recovery.reset();
    }
}

/// Earliest predicted frame in [t, t+H] at which the ego box intersects any
/// participant box. Stop regions are not participants.
pub fn min_collision_frame(boxes: &PredictedBoxSet) -> Option<u64> {
    (0..=boxes.horizon_len)
        .find(|&i| {
            let ego = &boxes.ego.boxes[i];
            boxes.actors.iter().any(|a| sat_intersects(ego, &a.boxes[i]))
        })
        .map(|i| boxes.horizon_start + i as u64)
}

fn colliding_actors(boxes: &PredictedBoxSet) -> BTreeSet<String> {
    boxes
        .actors
        .iter()
        .filter(|a| {
            a.boxes
                .iter()
                .zip(&boxes.ego.boxes)
                .any(|(b, e)| sat_intersects(e, b))
        })
        .map(|a| a.id.clone())
        .collect()
}

/// Signal violation: some active region is overlapped by the predicted ego
/// and the predicted ego speed exceeds epsilon at every overlapping frame.
/// A stop does not release a red light, so leaving an active red-light
/// region within the horizon also counts.
fn signal_violation(boxes: &PredictedBoxSet, snapshot: &BevSnapshot, epsilon: f64) -> bool {
    boxes.regions.iter().any(|region| {
        let overlaps: Vec<(bool, f64)> = region
            .boxes
            .iter()
            .zip(&boxes.ego.boxes)
            .map(|(r, e)| (sat_intersects(e, r), e.speed))
            .collect();
        let mut overlapping = overlaps.iter().filter(|(hit, _)| *hit).peekable();
        if overlapping.peek().is_some() && overlapping.all(|&(_, v)| v > epsilon) {
            return true;
        }
        let red = snapshot
            .signals
            .iter()
            .any(|s| s.id == region.id && s.kind == SignalKind::RedLight);
        red && overlaps.windows(2).any(|w| w[0].0 && !w[1].0)
    })
}

/// Ego inside any active, binding influence region at the current frame.
pub fn valid_stop(snapshot: &BevSnapshot) -> bool {
    let ego = snapshot.ego.bbox;
    snapshot
        .active_regions()
        .any(|(_, region)| sat_intersects(&ego, &region))
}

/// Evaluates the three hazards for one frame. The bank is only read (for the
/// previous minimum collision frame); `update_buffers` writes it.
pub fn evaluate(
    boxes: &PredictedBoxSet,
    snapshot: &BevSnapshot,
    bank: &BufferBank,
    cfg: &MonitorConfig,
) -> HazardReport {
    let c_t = min_collision_frame(boxes);
    let collision_flag = match (c_t, bank.prev_c) {
        (Some(now), Some(before)) => now <= before,
        // First detection after a clear frame always alarms.
        (Some(_), None) => true,
        (None, _) => false,
    };
    let stalling_flag = snapshot.ego.bbox.speed < cfg.epsilon && !valid_stop(snapshot);
    HazardReport {
        frame: snapshot.frame,
        min_collision_frame: c_t,
        collision_flag,
        sigvio_flag: signal_violation(boxes, snapshot, cfg.epsilon),
        stalling_flag,
        colliding_actors: if c_t.is_some() {
            colliding_actors(boxes)
        } else {
            BTreeSet::new()
        },
    }
}

/// Writes one frame of flags into the queues; during a takeover also writes
/// the recovery entry as the OR of the three fresh entries.
pub fn update_buffers(
    report: &HazardReport,
    bank: &mut BufferBank,
    in_takeover: bool,
    _cfg: &MonitorConfig,
) -> Result<()> {
    if let Some(last) = bank.last_frame {
        if report.frame <= last {
            return Err(ArgusError::Sequencing {
                frame: report.frame,
                last,
            });
        }
    }
    let t = report.frame;
    bank.collision.write(t, report.collision_flag);
    bank.signal.write(t, report.sigvio_flag);
    bank.stall.write(t, report.stalling_flag);
    if in_takeover {
        let any = bank.collision.get(t) == 1 || bank.signal.get(t) == 1 || bank.stall.get(t) == 1;
        bank.recovery.write(t, any);
    }
    bank.prev_c = report.min_collision_frame;
    bank.last_frame = Some(t);
    Ok(())
}
