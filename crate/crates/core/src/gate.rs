//! Control-ownership state machine between the ADS and the mitigator.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::monitor::{BufferBank, MonitorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Owner {
    Ads,
    Mitigator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cause {
    Collision,
    Signal,
    Stall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlOwner {
    pub owner: Owner,
    pub since_frame: u64,
    pub takeover_cause: Option<Cause>,
}

impl ControlOwner {
    pub fn ads(since_frame: u64) -> Self {
        Self {
            owner: Owner::Ads,
            since_frame,
            takeover_cause: None,
        }
    }
}

impl Default for ControlOwner {
    fn default() -> Self {
        Self::ads(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateDecision {
    pub dispatch_ads_trajectory: bool,
    pub activate_mitigator: bool,
    pub control_returned: bool,
    /// Set on the frame ownership moves to the mitigator; the monitor resets
    /// the recovery queue in response.
    pub takeover_triggered: bool,
}

impl GateDecision {
    fn ads() -> Self {
        Self {
            dispatch_ads_trajectory: true,
            activate_mitigator: false,
            control_returned: false,
            takeover_triggered: false,
        }
    }

    fn mitigator() -> Self {
        Self {
            dispatch_ads_trajectory: false,
            activate_mitigator: true,
            control_returned: false,
            takeover_triggered: false,
        }
    }
}

/// Highest-priority takeover condition currently met, if any.
pub fn takeover_cause(bank: &BufferBank, cfg: &MonitorConfig) -> Option<Cause> {
    if bank.collision.popcount() >= cfg.l {
        Some(Cause::Collision)
    } else if bank.signal.popcount() >= cfg.l {
        Some(Cause::Signal)
    } else if bank.stall.all_ones() {
        Some(Cause::Stall)
    } else {
        None
    }
}

pub fn decide(bank: &BufferBank, state: &ControlOwner, cfg: &MonitorConfig) -> (GateDecision, ControlOwner) {
    let frame = bank.last_frame.unwrap_or(0);
    match state.owner {
        Owner::Ads => match takeover_cause(bank, cfg) {
            Some(cause) => (
                GateDecision {
                    takeover_triggered: true,
                    ..GateDecision::mitigator()
                },
                ControlOwner {
                    owner: Owner::Mitigator,
                    since_frame: frame,
                    takeover_cause: Some(cause),
                },
            ),
            None => (GateDecision::ads(), *state),
        },
        Owner::Mitigator => {
            if bank.recovery.all_zeros() {
                (
                    GateDecision {
                        control_returned: true,
                        ..GateDecision::ads()
                    },
                    ControlOwner::ads(frame),
                )
            } else {
                (GateDecision::mitigator(), *state)
            }
        }
    }
}

/// Wall time of a single `decide` call on a default-configured bank that is
/// one entry short of a collision takeover.
pub fn gate_latency_probe() -> Duration {
    let cfg = MonitorConfig::default();
    let mut bank = BufferBank::new(&cfg);
    for t in 0..cfg.m as u64 {
        bank.collision.write(t, t + 1 < cfg.l as u64);
    }
    bank.last_frame = Some(cfg.m as u64 - 1);
    let state = ControlOwner::default();
    let start = Instant::now();
    let out = decide(std::hint::black_box(&bank), std::hint::black_box(&state), &cfg);
    let elapsed = start.elapsed();
    std::hint::black_box(out);
    elapsed
}
