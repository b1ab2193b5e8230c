//! Closed-loop runner: scripted ADS stubs, vehicle controller, per-frame
//! monitor → gate → (ADS | mitigator) → controller → world orchestration,
//! metrics, traces and replay.

mod ads;
mod async_monitor;
mod controller;
mod eq8;
mod metrics;
mod plot;
mod runner;
mod trace;
mod violations;

use serde::{Deserialize, Serialize};

pub use ads::AdsStub;
pub use async_monitor::{AsyncMonitor, MonitorJob};
pub use controller::{vehicle_controller, ControllerConfig};
pub use eq8::check_eq8;
pub use metrics::{
    aggregate, infraction_score, score_run, takeover_labels, BenchmarkSummary, EndReason, Penalties, RunReport, TakeoverEvent,
    ViolationEvent, ViolationKind,
};
pub use plot::{overhead_svg, timeseries_svg};
pub use runner::{run_scenario, summarize};
pub use trace::{
    read_trace, verify_trace, write_trace, FrameRecord, MitigationSummary, ReplayOutcome, RunOptions, RunTrace,
    TraceFooter, TraceHeader, TRACE_SCHEMA_VERSION,
};
pub use violations::ViolationDetector;

use crate::error::{ArgusError, Result};
use crate::mitigator::MitigatorConfig;
use crate::monitor::MonitorConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonitorMode {
    /// The monitor finishes within the frame; runs are reproducible.
    #[default]
    Sync,
    /// The monitor runs on its own thread and the gate reads the latest
    /// completed bank.
    Async,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub monitor: MonitorConfig,
    pub mitigator: MitigatorConfig,
    pub controller: ControllerConfig,
    pub penalties: Penalties,
    pub limits: RunLimits,
    pub mode: MonitorMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunLimits {
    /// Continuous time below epsilon outside stop regions that ends a run, s.
    pub stall_timeout_s: f64,
    /// Distance short of the route end that still counts as completed, m.
    pub completion_tolerance: f64,
}

impl Default for RunLimits {
    fn default() -> Self {
        Self {
            stall_timeout_s: 60.0,
            completion_tolerance: 1.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.monitor.validate()?;
        self.mitigator.validate()?;
        self.controller.validate()?;
        self.penalties.validate()?;
        if !(self.limits.stall_timeout_s.is_finite() && self.limits.stall_timeout_s > 0.0) {
            return Err(ArgusError::InvalidArgument("stall timeout must be > 0".into()));
        }
        if !(self.limits.completion_tolerance.is_finite() && self.limits.completion_tolerance >= 0.0) {
            return Err(ArgusError::InvalidArgument("completion tolerance must be >= 0".into()));
        }
        Ok(())
    }
}
