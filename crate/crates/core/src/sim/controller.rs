use serde::{Deserialize, Serialize};

use crate::error::{ArgusError, Result};
use crate::prediction::{ControlEstimate, KbmState};
use crate::trajectory::{PurePursuit, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    /// Throttle saturation, m/s².
    pub a_max: f64,
    /// Brake saturation, m/s².
    pub b_comf: f64,
    pub pursuit: PurePursuit,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            a_max: 11.0,
            b_comf: 20.0,
            pursuit: PurePursuit::default(),
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.a_max > 0.0 && self.b_comf > 0.0) {
            return Err(ArgusError::InvalidArgument("controller limits must be > 0".into()));
        }
        Ok(())
    }
}

/// Speed error closed within one step, saturated at the actuator limits;
/// pure-pursuit steering. A degenerate trajectory brakes fully.
pub fn vehicle_controller(
    state: &KbmState,
    traj: &Trajectory,
    dt: f64,
    wheelbase: f64,
    cfg: &ControllerConfig,
) -> ControlEstimate {
    if traj.validate().is_err() || !traj.desired_speed.is_finite() {
        return ControlEstimate {
            accel: -cfg.b_comf,
            steer: 0.0,
        };
    }
    let accel = ((traj.desired_speed - state.v) / dt).clamp(-cfg.b_comf, cfg.a_max);
    let steer = cfg.pursuit.steer(&state.pose(), state.v, &traj.waypoints, wheelbase);
    ControlEstimate { accel, steer }
}
