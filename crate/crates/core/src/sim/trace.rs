//! JSON Lines run traces: one header, one record per frame, one footer.
//! The footer digest chains the header and every frame line.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ArgusError, Result};
use crate::gate::{Cause, GateDecision, Owner};
use crate::geometry::{OrientedBox, Pose2};
use crate::mitigator::LeadingActor;
use crate::monitor::{BufferBank, HazardReport};
use crate::prediction::ControlEstimate;
use crate::scenario::{NoiseParams, Scenario};
use crate::trajectory::Trajectory;
use crate::world::{Participant, StopSignal};

use super::eq8::check_eq8;
use super::metrics::{RunReport, ViolationEvent};
use super::runner::{run_scenario, summarize};
use super::violations::ViolationDetector;
use super::{MonitorMode, SimConfig};

pub const TRACE_SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunOptions {
    pub argus: bool,
    /// Perception noise; `None` gives exact snapshots.
    #[serde(default)]
    pub noise: Option<NoiseParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub schema_version: u64,
    pub scenario: Scenario,
    pub options: RunOptions,
    pub config: SimConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigationSummary {
    pub navigation_point: Pose2,
    pub blocked_cells: usize,
    pub rerouted: bool,
    pub leading: Vec<LeadingActor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: u64,
    pub time: f64,
    pub snapshot_digest: String,
    /// Digest of the world after the frame closed.
    pub world_digest: String,
    #[serde(default)]
    pub report: Option<HazardReport>,
    #[serde(default)]
    pub buffers: Option<BufferBank>,
    #[serde(default)]
    pub decision: Option<GateDecision>,
    /// Who drove this frame, and why the mitigator holds control.
    pub owner: Owner,
    #[serde(default)]
    pub cause: Option<Cause>,
    pub trajectory: Trajectory,
    #[serde(default)]
    pub mitigation: Option<MitigationSummary>,
    pub command: ControlEstimate,
    /// Ground truth after the step.
    pub ego: OrientedBox,
    pub actors: Vec<Participant>,
    pub signals: Vec<StopSignal>,
    pub route_station: f64,
    pub odometer_m: f64,
    pub violations: Vec<ViolationEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFooter {
    pub report: RunReport,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub header: TraceHeader,
    pub frames: Vec<FrameRecord>,
    pub footer: TraceFooter,
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
enum LineRef<'a> {
    Header(&'a TraceHeader),
    Frame(&'a FrameRecord),
    Footer(&'a TraceFooter),
}

#[derive(Deserialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
enum Line {
    Header(Box<TraceHeader>),
    Frame(Box<FrameRecord>),
    Footer(Box<TraceFooter>),
}

/// Incremental hash over the serialized header and frame lines.
pub(crate) struct TraceHasher(Sha256);

impl TraceHasher {
    pub(crate) fn new(header: &TraceHeader) -> Result<Self> {
        let mut h = Self(Sha256::new());
        h.push_line(&serde_json::to_string(&LineRef::Header(header))?);
        Ok(h)
    }

    pub(crate) fn push_frame(&mut self, f: &FrameRecord) -> Result<()> {
        self.push_line(&serde_json::to_string(&LineRef::Frame(f))?);
        Ok(())
    }

    fn push_line(&mut self, line: &str) {
        self.0.update(line.as_bytes());
        self.0.update(b"\n");
    }

    pub(crate) fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

pub(crate) fn digest_of<T: Serialize>(value: &T) -> Result<String> {
    Ok(hex::encode(Sha256::digest(serde_json::to_vec(value)?)))
}

impl RunTrace {
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = serde_json::to_string(&LineRef::Header(&self.header))?;
        out.push('\n');
        for f in &self.frames {
            out.push_str(&serde_json::to_string(&LineRef::Frame(f))?);
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(&LineRef::Footer(&self.footer))?);
        out.push('\n');
        Ok(out)
    }
}

pub fn write_trace(trace: &RunTrace, path: &Path) -> Result<()> {
    let text = trace.to_jsonl()?;
    let mut file = fs::File::create(path).map_err(|e| ArgusError::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| ArgusError::io(path, e))
}

/// Parses a trace file and returns it with the digest of its raw header
/// and frame lines.
pub fn read_trace(path: &Path) -> Result<(RunTrace, String)> {
    let text = fs::read_to_string(path).map_err(|e| ArgusError::io(path, e))?;
    let schema = |line: usize, message: &str| ArgusError::Schema {
        path: path.to_path_buf(),
        location: format!("line {line}"),
        message: message.to_string(),
    };
    let parse = |line: usize, e: serde_json::Error| ArgusError::Parse {
        path: path.to_path_buf(),
        line,
        column: e.column(),
        message: e.to_string(),
    };

    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| schema(1, "empty trace"))?;
    let raw: serde_json::Value = serde_json::from_str(first).map_err(|e| parse(1, e))?;
    match raw.get("schema_version").and_then(|v| v.as_u64()) {
        Some(TRACE_SCHEMA_VERSION) => {}
        Some(found) => {
            return Err(ArgusError::UnsupportedVersion {
                found,
                supported: TRACE_SCHEMA_VERSION,
            })
        }
        None => return Err(schema(1, "header lacks schema_version")),
    }
    let Line::Header(header) = serde_json::from_str(first).map_err(|e| parse(1, e))? else {
        return Err(schema(1, "first record must be the header"));
    };

    let mut hasher = Sha256::new();
    hasher.update(first.as_bytes());
    hasher.update(b"\n");
    let mut frames = Vec::new();
    let mut footer = None;
    for (i, line) in lines {
        if footer.is_some() {
            return Err(schema(i + 1, "record after footer"));
        }
        match serde_json::from_str(line).map_err(|e| parse(i + 1, e))? {
            Line::Frame(f) => {
                hasher.update(line.as_bytes());
                hasher.update(b"\n");
                frames.push(*f);
            }
            Line::Footer(f) => footer = Some(*f),
            Line::Header(_) => return Err(schema(i + 1, "duplicate header")),
        }
    }
    let footer = footer.ok_or_else(|| schema(text.lines().count(), "missing footer"))?;
    Ok((
        RunTrace {
            header: *header,
            frames,
            footer,
        },
        hex::encode(hasher.finalize()),
    ))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReplayOutcome {
    pub mismatches: Vec<String>,
}

impl ReplayOutcome {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Checks a stored trace: the chained digest, every violation against the
/// recorded ground truth, the report against the frame records, the safety
/// invariant count and, for synchronous runs, a full re-simulation.
pub fn verify_trace(path: &Path) -> Result<ReplayOutcome> {
    let (trace, digest) = read_trace(path)?;
    let mut out = ReplayOutcome::default();
    let stored = &trace.footer.report;
    if digest != trace.footer.digest {
        out.mismatches
            .push(format!("trace digest {digest} differs from recorded {}", trace.footer.digest));
    }

    let header = &trace.header;
    let cfg = &header.config;
    let mut detector = ViolationDetector::new(
        cfg.penalties,
        cfg.monitor.epsilon,
        cfg.limits.stall_timeout_s,
        header.scenario.dt(),
    );
    for f in &trace.frames {
        let expected = detector.observe(f.frame, &f.ego, &f.actors, &f.signals);
        if expected != f.violations {
            out.mismatches.push(format!(
                "frame {}: recorded violations {:?} but ground truth gives {:?}",
                f.frame, f.violations, expected
            ));
        }
    }

    let recomputed = summarize(&header.scenario, &header.options, cfg, &trace.frames);
    if &recomputed != stored {
        out.mismatches
            .push("stored report differs from the report recomputed from frame records".into());
    }
    let eq8 = check_eq8(&trace.frames);
    if eq8 != stored.eq8_violations {
        out.mismatches.push(format!(
            "safety invariant breaches: recomputed {eq8}, stored {}",
            stored.eq8_violations
        ));
    }

    if cfg.mode == MonitorMode::Sync {
        let (_, rerun) = run_scenario(&header.scenario, &header.options, cfg)?;
        if rerun.footer.digest != trace.footer.digest {
            out.mismatches.push(format!(
                "re-simulation digest {} differs from recorded {}",
                rerun.footer.digest, trace.footer.digest
            ));
        }
    }
    Ok(out)
}
