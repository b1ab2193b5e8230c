use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ArgusError, Result};
use crate::gate::Cause;
use crate::monitor::TakeoverLabels;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    CollisionVehicle,
    CollisionPedestrian,
    CollisionStatic,
    StopSign,
    RedLight,
    StallTimeout,
}

impl ViolationKind {
    pub const ALL: [ViolationKind; 6] = [
        ViolationKind::CollisionVehicle,
        ViolationKind::CollisionPedestrian,
        ViolationKind::CollisionStatic,
        ViolationKind::StopSign,
        ViolationKind::RedLight,
        ViolationKind::StallTimeout,
    ];

    pub fn is_collision(self) -> bool {
        matches!(
            self,
            ViolationKind::CollisionVehicle | ViolationKind::CollisionPedestrian | ViolationKind::CollisionStatic
        )
    }

    pub fn is_signal(self) -> bool {
        matches!(self, ViolationKind::StopSign | ViolationKind::RedLight)
    }

    /// Collisions and stall-timeouts end the route.
    pub fn is_terminal(self) -> bool {
        self.is_collision() || self == ViolationKind::StallTimeout
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::CollisionVehicle => "collision-vehicle",
            ViolationKind::CollisionPedestrian => "collision-pedestrian",
            ViolationKind::CollisionStatic => "collision-static",
            ViolationKind::StopSign => "stop-sign",
            ViolationKind::RedLight => "red-light",
            ViolationKind::StallTimeout => "stall-timeout",
        }
    }
}

/// Multiplicative infraction penalties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Penalties {
    pub collision_pedestrian: f64,
    pub collision_vehicle: f64,
    pub collision_static: f64,
    pub red_light: f64,
    pub stop_sign: f64,
    pub stall_timeout: f64,
}

impl Default for Penalties {
    fn default() -> Self {
        Self {
            collision_pedestrian: 0.50,
            collision_vehicle: 0.60,
            collision_static: 0.65,
            red_light: 0.70,
            stop_sign: 0.80,
            stall_timeout: 0.70,
        }
    }
}

impl Penalties {
    pub fn of(&self, kind: ViolationKind) -> f64 {
        match kind {
            ViolationKind::CollisionVehicle => self.collision_vehicle,
            ViolationKind::CollisionPedestrian => self.collision_pedestrian,
            ViolationKind::CollisionStatic => self.collision_static,
            ViolationKind::StopSign => self.stop_sign,
            ViolationKind::RedLight => self.red_light,
            ViolationKind::StallTimeout => self.stall_timeout,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for kind in ViolationKind::ALL {
            let p = self.of(kind);
            if !(p > 0.0 && p <= 1.0) {
                return Err(ArgusError::InvalidArgument(format!(
                    "penalty for {} must lie in (0, 1], got {p}",
                    kind.as_str()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationEvent {
    pub frame: u64,
    pub kind: ViolationKind,
    pub penalty: f64,
    /// Actor or signal involved, when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TakeoverEvent {
    pub frame: u64,
    pub cause: Cause,
    pub return_frame: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndReason {
    RouteCompleted,
    Collision,
    StallTimeout,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub ads: String,
    pub argus: bool,
    /// Percent of the route covered.
    pub route_completion: f64,
    /// Product of penalties, 1.0 when clean.
    pub infraction_score: f64,
    /// Percent; route completion times infraction score.
    pub driving_score: f64,
    pub success: bool,
    pub violations: Vec<ViolationEvent>,
    pub distance_km: f64,
    pub takeovers: Vec<TakeoverEvent>,
    pub eq8_violations: usize,
    pub frames: u64,
    pub end_reason: EndReason,
}

impl RunReport {
    pub fn count(&self, pred: impl Fn(ViolationKind) -> bool) -> usize {
        self.violations.iter().filter(|v| pred(v.kind)).count()
    }
}

/// Takeover times from a monitored run against violation times from the
/// unmonitored run of the same scenario, shifted by `offset` seconds.
pub fn takeover_labels(monitored: &RunReport, unmonitored: &RunReport, dt: f64, offset: f64) -> TakeoverLabels {
    TakeoverLabels {
        takeovers: monitored.takeovers.iter().map(|t| offset + t.frame as f64 * dt).collect(),
        violations: unmonitored.violations.iter().map(|v| offset + v.frame as f64 * dt).collect(),
    }
}

pub fn infraction_score(violations: &[ViolationEvent]) -> f64 {
    violations.iter().map(|v| v.penalty).product()
}

/// Completion, score and success from the raw run outcome.
pub fn score_run(route_completion: f64, violations: &[ViolationEvent]) -> (f64, f64, bool) {
    let is = infraction_score(violations);
    let ds = route_completion * is;
    (is, ds, violations.is_empty() && route_completion >= 100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub runs: usize,
    pub success_rate: f64,
    pub route_completion: f64,
    pub driving_score: f64,
    pub total_km: f64,
    /// Events per kilometre by kind; absent when no distance was driven.
    pub per_km: BTreeMap<ViolationKind, Option<f64>>,
    pub collisions_per_km: Option<f64>,
    pub stop_per_km: Option<f64>,
    pub stall_per_km: Option<f64>,
    pub takeovers: usize,
    pub eq8_violations: usize,
}

pub fn aggregate(reports: &[RunReport]) -> Result<BenchmarkSummary> {
    if reports.is_empty() {
        return Err(ArgusError::InvalidArgument("cannot aggregate zero runs".into()));
    }
    let n = reports.len() as f64;
    let total_km: f64 = reports.iter().map(|r| r.distance_km).sum();
    let rate = |count: usize| (total_km > 0.0).then(|| count as f64 / total_km);
    let count = |pred: &dyn Fn(ViolationKind) -> bool| reports.iter().map(|r| r.count(pred)).sum::<usize>();
    let per_km = ViolationKind::ALL
        .iter()
        .map(|&k| (k, rate(count(&|x| x == k))))
        .collect();
    Ok(BenchmarkSummary {
        runs: reports.len(),
        success_rate: 100.0 * reports.iter().filter(|r| r.success).count() as f64 / n,
        route_completion: reports.iter().map(|r| r.route_completion).sum::<f64>() / n,
        driving_score: reports.iter().map(|r| r.route_completion * r.infraction_score).sum::<f64>() / n,
        total_km,
        per_km,
        collisions_per_km: rate(count(&ViolationKind::is_collision)),
        stop_per_km: rate(count(&ViolationKind::is_signal)),
        stall_per_km: rate(count(&|k| k == ViolationKind::StallTimeout)),
        takeovers: reports.iter().map(|r| r.takeovers.len()).sum(),
        eq8_violations: reports.iter().map(|r| r.eq8_violations).sum(),
    })
}
