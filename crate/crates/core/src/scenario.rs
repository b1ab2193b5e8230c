//! Scenario files: road map, route, ego, scripted actors, signals and the
//! optional perception-noise model. JSON, versioned by `schema_version`.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ArgusError, Result};
use crate::geometry::{Point2, Polyline, Pose2};

pub const SCENARIO_SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActorKind {
    EgoVehicle,
    Vehicle,
    Pedestrian,
    StaticObstacle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalKind {
    StopSign,
    RedLight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lane {
    pub id: String,
    pub centerline: Polyline,
    pub width: f64,
    /// Meters per second.
    pub speed_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadMap {
    pub lanes: Vec<Lane>,
    #[serde(default)]
    pub boundaries: Vec<Polyline>,
}

impl RoadMap {
    pub fn lane(&self, id: &str) -> Option<&Lane> {
        self.lanes.iter().find(|l| l.id == id)
    }

    /// Lane whose centerline is laterally closest to `p`.
    pub fn nearest_lane(&self, p: &Point2) -> Option<&Lane> {
        self.lanes.iter().min_by(|a, b| {
            let da = a.centerline.distance_to(p);
            let db = b.centerline.distance_to(p);
            da.total_cmp(&db)
        })
    }

    /// Whether `p` lies on the strip of any lane.
    pub fn is_drivable(&self, p: &Point2) -> bool {
        self.lanes.iter().any(|lane| {
            let proj = lane.centerline.project(p);
            proj.lateral.abs() <= lane.width / 2.0
                && proj.station >= 0.0
                && proj.station <= lane.centerline.length()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoSpec {
    pub pose: Pose2,
    #[serde(default)]
    pub speed: f64,
    pub length: f64,
    pub width: f64,
    pub wheelbase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BehaviorSpec {
    Static,
    /// Straight-line motion along the actor's initial heading.
    ConstantVelocity {
        speed: f64,
        #[serde(default)]
        start_frame: u64,
        #[serde(default)]
        accel: Option<f64>,
    },
    PathFollow {
        path: Polyline,
        speed: f64,
        #[serde(default)]
        start_frame: u64,
        #[serde(default)]
        accel: Option<f64>,
    },
    LaneFollow {
        lane: String,
        speed: f64,
        #[serde(default)]
        start_frame: u64,
        #[serde(default)]
        accel: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActorSpec {
    pub id: String,
    pub kind: ActorKind,
    pub pose: Pose2,
    pub length: f64,
    pub width: f64,
    pub behavior: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    pub id: String,
    pub kind: SignalKind,
    /// Stop-line centre on the lane, heading along the lane's travel direction.
    pub pose: Pose2,
    pub lane: String,
    /// Red lights only: frame at which the light turns green. Never, if absent.
    #[serde(default)]
    pub green_at_frame: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    #[serde(default)]
    pub position_sigma: f64,
    #[serde(default)]
    pub heading_sigma: f64,
    #[serde(default)]
    pub speed_sigma: f64,
    #[serde(default)]
    pub drop_probability: f64,
}

impl NoiseParams {
    /// Perception noise used when noise is switched on and the scenario
    /// carries no parameters of its own.
    pub const STANDARD: NoiseParams = NoiseParams {
        position_sigma: 0.2,
        heading_sigma: 0.02,
        speed_sigma: 0.2,
        drop_probability: 0.02,
    };
}

/// Scripted stand-in for an end-to-end driving stack. Each kind reproduces
/// one characteristic failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AdsSpec {
    /// Follows the route at cruise speed and reacts to nothing.
    ObliviousFollower { cruise_speed: f64 },
    /// Keeps distance to vehicles ahead on the route but ignores signals.
    SignalIgnorer { cruise_speed: f64 },
    /// Stops for any obstacle blocking the route ahead and never recovers.
    Freezer {
        cruise_speed: f64,
        #[serde(default = "default_freeze_distance")]
        stop_distance: f64,
    },
    /// Follows the route but shifts laterally by `offset` from `swerve_frame`.
    Swerver {
        cruise_speed: f64,
        swerve_frame: u64,
        offset: f64,
    },
}

fn default_freeze_distance() -> f64 {
    12.0
}

impl AdsSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AdsSpec::ObliviousFollower { .. } => "oblivious-follower",
            AdsSpec::SignalIgnorer { .. } => "signal-ignorer",
            AdsSpec::Freezer { .. } => "freezer",
            AdsSpec::Swerver { .. } => "swerver",
        }
    }
}

fn default_frame_rate() -> f64 {
    20.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u64,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub seed: u64,
    #[serde(default = "default_frame_rate")]
    pub frame_rate: f64,
    pub time_limit_s: f64,
    pub map: RoadMap,
    pub route: Polyline,
    pub ego: EgoSpec,
    pub ads: AdsSpec,
    #[serde(default)]
    pub behaviors: BTreeMap<String, BehaviorSpec>,
    #[serde(default)]
    pub actors: Vec<ActorSpec>,
    #[serde(default)]
    pub signals: Vec<SignalSpec>,
    #[serde(default)]
    pub noise: Option<NoiseParams>,
}

impl Scenario {
    pub fn route_length(&self) -> f64 {
        self.route.length()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.frame_rate
    }

    pub fn max_frames(&self) -> u64 {
        (self.time_limit_s * self.frame_rate).ceil() as u64
    }

    pub fn from_json_str(text: &str, origin: &Path) -> Result<Self> {
        let parse_err = |e: serde_json::Error| ArgusError::Parse {
            path: origin.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        };
        let raw: serde_json::Value = serde_json::from_str(text).map_err(parse_err)?;
        match raw.get("schema_version").and_then(|v| v.as_u64()) {
            Some(SCENARIO_SCHEMA_VERSION) => {}
            Some(found) => {
                return Err(ArgusError::UnsupportedVersion {
                    found,
                    supported: SCENARIO_SCHEMA_VERSION,
                })
            }
            None => {
                return Err(ArgusError::Schema {
                    path: origin.to_path_buf(),
                    location: "schema_version".into(),
                    message: "missing or not an unsigned integer".into(),
                })
            }
        }
        // Re-parse from text so structural errors keep line/column positions.
        let scenario: Scenario = serde_json::from_str(text).map_err(parse_err)?;
        scenario.validate(origin)?;
        Ok(scenario)
    }

    pub fn validate(&self, origin: &Path) -> Result<()> {
        let schema = |location: String, message: &str| ArgusError::Schema {
            path: origin.to_path_buf(),
            location,
            message: message.to_string(),
        };
        let dangling = |location: String, what: &'static str, name: &str| {
            ArgusError::DanglingReference {
                path: origin.to_path_buf(),
                location,
                what,
                name: name.to_string(),
            }
        };
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let non_negative = |v: f64| v.is_finite() && v >= 0.0;

        if self.name.trim().is_empty() {
            return Err(schema("name".into(), "must not be empty"));
        }
        if !positive(self.frame_rate) {
            return Err(schema("frame_rate".into(), "must be > 0"));
        }
        if !positive(self.time_limit_s) {
            return Err(schema("time_limit_s".into(), "must be > 0"));
        }
        if self.map.lanes.is_empty() {
            return Err(schema("map.lanes".into(), "at least one lane is required"));
        }
        let mut lane_ids = HashSet::new();
        for (i, lane) in self.map.lanes.iter().enumerate() {
            if !lane_ids.insert(lane.id.as_str()) {
                return Err(schema(format!("map.lanes[{i}].id"), "duplicate lane id"));
            }
            if !positive(lane.width) {
                return Err(schema(format!("map.lanes[{i}].width"), "must be > 0"));
            }
            if !positive(lane.speed_limit) {
                return Err(schema(format!("map.lanes[{i}].speed_limit"), "must be > 0"));
            }
        }
        let ego = &self.ego;
        for (field, v) in [
            ("length", ego.length),
            ("width", ego.width),
            ("wheelbase", ego.wheelbase),
        ] {
            if !positive(v) {
                return Err(schema(format!("ego.{field}"), "must be > 0"));
            }
        }
        if !non_negative(ego.speed) {
            return Err(schema("ego.speed".into(), "must be >= 0"));
        }
        let cruise = match &self.ads {
            AdsSpec::ObliviousFollower { cruise_speed }
            | AdsSpec::SignalIgnorer { cruise_speed }
            | AdsSpec::Freezer { cruise_speed, .. }
            | AdsSpec::Swerver { cruise_speed, .. } => *cruise_speed,
        };
        if !non_negative(cruise) {
            return Err(schema("ads.cruise_speed".into(), "must be >= 0"));
        }

        for (name, behavior) in &self.behaviors {
            let loc = |field: &str| format!("behaviors.{name}.{field}");
            match behavior {
                BehaviorSpec::Static => {}
                BehaviorSpec::ConstantVelocity { speed, accel, .. }
                | BehaviorSpec::PathFollow { speed, accel, .. }
                | BehaviorSpec::LaneFollow { speed, accel, .. } => {
                    if !non_negative(*speed) {
                        return Err(schema(loc("speed"), "must be >= 0"));
                    }
                    if accel.is_some_and(|a| !positive(a)) {
                        return Err(schema(loc("accel"), "must be > 0"));
                    }
                }
            }
            if let BehaviorSpec::LaneFollow { lane, .. } = behavior {
                if self.map.lane(lane).is_none() {
                    return Err(dangling(loc("lane"), "lane", lane));
                }
            }
        }

        let mut actor_ids = HashSet::new();
        for (i, actor) in self.actors.iter().enumerate() {
            let loc = |field: &str| format!("actors[{i}].{field}");
            if actor.id == "ego" || !actor_ids.insert(actor.id.as_str()) {
                return Err(schema(loc("id"), "duplicate or reserved actor id"));
            }
            if actor.kind == ActorKind::EgoVehicle {
                return Err(schema(loc("kind"), "the ego is declared under `ego`, not `actors`"));
            }
            if !positive(actor.length) || !positive(actor.width) {
                return Err(schema(loc("length"), "actor dimensions must be > 0"));
            }
            let behavior = self
                .behaviors
                .get(&actor.behavior)
                .ok_or_else(|| dangling(loc("behavior"), "behavior", &actor.behavior))?;
            if actor.kind == ActorKind::StaticObstacle && *behavior != BehaviorSpec::Static {
                return Err(schema(
                    loc("behavior"),
                    "static obstacles must use a `static` behavior",
                ));
            }
        }

        let mut signal_ids = HashSet::new();
        for (i, sig) in self.signals.iter().enumerate() {
            if !signal_ids.insert(sig.id.as_str()) {
                return Err(schema(format!("signals[{i}].id"), "duplicate signal id"));
            }
            if self.map.lane(&sig.lane).is_none() {
                return Err(dangling(format!("signals[{i}].lane"), "lane", &sig.lane));
            }
            if sig.kind == SignalKind::StopSign && sig.green_at_frame.is_some() {
                return Err(schema(
                    format!("signals[{i}].green_at_frame"),
                    "only red lights carry a timing",
                ));
            }
        }

        if let Some(noise) = &self.noise {
            for (field, v) in [
                ("position_sigma", noise.position_sigma),
                ("heading_sigma", noise.heading_sigma),
                ("speed_sigma", noise.speed_sigma),
            ] {
                if !non_negative(v) {
                    return Err(schema(format!("noise.{field}"), "must be >= 0"));
                }
            }
            if !(0.0..=1.0).contains(&noise.drop_probability) {
                return Err(schema("noise.drop_probability".into(), "must be in [0, 1]"));
            }
        }
        Ok(())
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ArgusError::io(path, e))?;
    Scenario::from_json_str(&text, path)
}

/// A named list of scenario files, paths relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteManifest {
    pub schema_version: u64,
    pub name: String,
    pub scenarios: Vec<PathBuf>,
    /// Scenarios whose hazard is resolved by driving around it.
    #[serde(default)]
    pub rerouting: Vec<String>,
}

/// Loads a manifest and every scenario it lists, in manifest order.
pub fn load_suite(path: impl AsRef<Path>) -> Result<(SuiteManifest, Vec<(PathBuf, Scenario)>)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ArgusError::io(path, e))?;
    let manifest: SuiteManifest = serde_json::from_str(&text).map_err(|e| ArgusError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if manifest.schema_version != SCENARIO_SCHEMA_VERSION {
        return Err(ArgusError::UnsupportedVersion {
            found: manifest.schema_version,
            supported: SCENARIO_SCHEMA_VERSION,
        });
    }
    if manifest.scenarios.is_empty() {
        return Err(ArgusError::Schema {
            path: path.to_path_buf(),
            location: "scenarios".into(),
            message: "at least one scenario is required".into(),
        });
    }
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let scenarios = manifest
        .scenarios
        .iter()
        .map(|rel| {
            let full = base.join(rel);
            load_scenario(&full).map(|s| (full, s))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, scenarios))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "name": "minimal",
        "seed": 1,
        "time_limit_s": 10,
        "map": { "lanes": [ { "id": "main", "centerline": [[0, 0], [100, 0]], "width": 3.5, "speed_limit": 10 } ] },
        "route": [[0, 0], [50, 0]],
        "ego": { "pose": { "x": 0, "y": 0, "theta": 0 }, "length": 4.5, "width": 2.0, "wheelbase": 2.7 },
        "ads": { "kind": "oblivious-follower", "cruise_speed": 8 }
    }"#;

    fn parse(text: &str) -> Result<Scenario> {
        Scenario::from_json_str(text, Path::new("inline.json"))
    }

    #[test]
    fn minimal_scenario_without_actors_is_valid() {
        let s = parse(MINIMAL).unwrap();
        assert!(s.actors.is_empty());
        assert_eq!(s.frame_rate, 20.0);
        assert_eq!(s.route_length(), 50.0);
        assert_eq!(s.max_frames(), 200);
    }

    #[test]
    fn unknown_behavior_is_a_dangling_reference() {
        let text = MINIMAL.replace(
            r#""ads""#,
            r#""actors": [ { "id": "a", "kind": "vehicle", "pose": { "x": 5, "y": 0, "theta": 0 },
                "length": 4, "width": 2, "behavior": "teleport" } ],
               "ads""#,
        );
        let err = parse(&text).unwrap_err();
        match err {
            ArgusError::DanglingReference { location, name, .. } => {
                assert_eq!(location, "actors[0].behavior");
                assert_eq!(name, "teleport");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_lane_on_signal_is_dangling() {
        let text = MINIMAL.replace(
            r#""ads""#,
            r#""signals": [ { "id": "s", "kind": "stop-sign", "pose": { "x": 20, "y": 0, "theta": 0 }, "lane": "nope" } ],
               "ads""#,
        );
        assert!(matches!(parse(&text), Err(ArgusError::DanglingReference { .. })));
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse("{\n  \"schema_version\": 1,\n  oops }").unwrap_err();
        match err {
            ArgusError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn newer_schema_version_is_unsupported() {
        let text = MINIMAL.replace(r#""schema_version": 1"#, r#""schema_version": 7"#);
        assert!(matches!(
            parse(&text),
            Err(ArgusError::UnsupportedVersion { found: 7, supported: 1 })
        ));
    }

    #[test]
    fn non_positive_frame_rate_is_rejected() {
        let text = MINIMAL.replace(r#""seed": 1,"#, r#""seed": 1, "frame_rate": 0,"#);
        match parse(&text).unwrap_err() {
            ArgusError::Schema { location, .. } => assert_eq!(location, "frame_rate"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn degenerate_route_is_rejected() {
        let text = MINIMAL.replace(r#""route": [[0, 0], [50, 0]]"#, r#""route": [[1, 1], [1, 1]]"#);
        assert!(matches!(parse(&text), Err(ArgusError::Parse { .. })));
    }
}
