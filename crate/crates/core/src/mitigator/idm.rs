use serde::{Deserialize, Serialize};

use crate::error::{ArgusError, Result};

/// Net gaps below this are treated as this value.
pub const MIN_NET_GAP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdmParams {
    /// Desired speed, m/s.
    pub v0: f64,
    /// Standstill gap, m.
    pub s0: f64,
    /// Time headway, s.
    #[serde(rename = "T")]
    pub t_headway: f64,
    /// Maximum acceleration, m/s².
    pub a_max: f64,
    /// Comfortable braking deceleration, m/s².
    pub b_comf: f64,
    pub sigma: f64,
}

impl IdmParams {
    pub const SPEED_LIMIT_FACTOR: f64 = 0.72;

    /// Defaults with the desired speed derived from a lane speed limit.
    pub fn for_speed_limit(speed_limit: f64) -> Self {
        Self {
            v0: Self::SPEED_LIMIT_FACTOR * speed_limit,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("v0", self.v0),
            ("s0", self.s0),
            ("T", self.t_headway),
            ("a_max", self.a_max),
            ("b_comf", self.b_comf),
            ("sigma", self.sigma),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(ArgusError::InvalidArgument(format!("IDM {name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Desired dynamic gap s*, floored at zero.
    pub fn desired_gap(&self, v: f64, rel_speed: f64) -> f64 {
        let s = self.s0 + v * self.t_headway + v * rel_speed / (2.0 * (self.a_max * self.b_comf).sqrt());
        s.max(0.0)
    }
}

impl Default for IdmParams {
    fn default() -> Self {
        Self {
            v0: Self::SPEED_LIMIT_FACTOR * 13.89,
            s0: 4.0,
            t_headway: 0.25,
            a_max: 11.0,
            b_comf: 20.0,
            sigma: 4.0,
        }
    }
}

/// Real or virtual actor ahead of the ego that constrains its speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadingActor {
    pub id: String,
    /// Bumper-to-bumper distance along the path, m, never negative.
    pub net_gap: f64,
    /// Ego speed minus the leader's along-path speed, m/s.
    pub rel_speed: f64,
}

/// IDM acceleration; free-road term only when there is no leader.
pub fn idm_accel(v: f64, lead: Option<&LeadingActor>, p: &IdmParams) -> f64 {
    let free = 1.0 - (v / p.v0).powf(p.sigma);
    let interaction = match lead {
        Some(l) => {
            let s = l.net_gap.max(MIN_NET_GAP);
            let ratio = p.desired_gap(v, l.rel_speed) / s;
            ratio * ratio
        }
        None => 0.0,
    };
    p.a_max * (free - interaction)
}
