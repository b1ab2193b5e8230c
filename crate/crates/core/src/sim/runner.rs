use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::gate::{decide, ControlOwner, Owner};
use crate::mitigator::{free_navigation_point, mitigate_on, occupancy_for};
use crate::monitor::{evaluate, update_buffers, BufferBank, HazardReport};
use crate::prediction::predict;
use crate::scenario::Scenario;
use crate::world::{BevSnapshot, Participant, WorldState};

use super::ads::AdsStub;
use super::async_monitor::{AsyncMonitor, MonitorJob};
use super::controller::vehicle_controller;
use super::eq8::check_eq8;
use super::metrics::{score_run, EndReason, RunReport, TakeoverEvent};
use super::trace::{
    digest_of, FrameRecord, MitigationSummary, RunOptions, RunTrace, TraceFooter, TraceHasher, TraceHeader,
    TRACE_SCHEMA_VERSION,
};
use super::violations::ViolationDetector;
use super::{MonitorMode, SimConfig};

/// Either monitor flavour behind one interface.
enum Monitor {
    Sync(BufferBank),
    Async(AsyncMonitor),
}

fn quiet_report(frame: u64) -> HazardReport {
    HazardReport {
        frame,
        min_collision_frame: None,
        collision_flag: false,
        sigvio_flag: false,
        stalling_flag: false,
        colliding_actors: Default::default(),
    }
}

/// Runs a scenario to route completion, a terminal infraction or the time
/// limit. Synchronous runs are reproducible bit for bit from the seed.
pub fn run_scenario(scenario: &Scenario, options: &RunOptions, cfg: &SimConfig) -> Result<(RunReport, RunTrace)> {
    cfg.validate()?;
    let header = TraceHeader {
        schema_version: TRACE_SCHEMA_VERSION,
        scenario: scenario.clone(),
        options: options.clone(),
        config: cfg.clone(),
    };
    let mut hasher = TraceHasher::new(&header)?;

    let ads = AdsStub::new(scenario.ads.clone(), scenario.route.clone());
    let mut world = WorldState::from_scenario(scenario);
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let dt = scenario.dt();
    let settings = cfg.monitor.prediction();
    let nav_reach = cfg.mitigator.nav_fraction * cfg.mitigator.perception;
    let mut monitor = match cfg.mode {
        MonitorMode::Sync => Monitor::Sync(BufferBank::new(&cfg.monitor)),
        MonitorMode::Async => Monitor::Async(AsyncMonitor::spawn(cfg.monitor)),
    };
    let mut detector = ViolationDetector::new(cfg.penalties, cfg.monitor.epsilon, cfg.limits.stall_timeout_s, dt);
    let mut owner = ControlOwner::default();
    let mut prev: Option<BevSnapshot> = None;
    let mut odometer = 0.0;
    let mut frames = Vec::new();
    let route_len = scenario.route_length();

    for _ in 0..scenario.max_frames() {
        let frame = world.frame;
        let snap = world.snapshot(options.noise.as_ref(), &mut rng);
        let ads_traj = ads.plan(&snap)?;
        let prev_snap = prev.as_ref().unwrap_or(&snap);

        let mut report = None;
        let mut buffers = None;
        let mut decision = None;
        let mut mitigation = None;
        let mut dispatched = ads_traj.clone();
        if options.argus {
            let in_takeover = owner.owner == Owner::Mitigator;
            let (bank, latest) = match &mut monitor {
                Monitor::Sync(bank) => {
                    let boxes = predict(&snap, prev_snap, &ads_traj, &settings)?;
                    let r = evaluate(&boxes, &snap, bank, &cfg.monitor);
                    update_buffers(&r, bank, in_takeover, &cfg.monitor)?;
                    (bank.clone(), Some(r))
                }
                Monitor::Async(m) => {
                    m.submit(MonitorJob {
                        curr: snap.clone(),
                        prev: prev_snap.clone(),
                        trajectory: ads_traj.clone(),
                        in_takeover,
                    });
                    m.latest(frame, Duration::from_secs_f64(dt))
                }
            };
            let (d, next) = decide(&bank, &owner, &cfg.monitor);
            if d.takeover_triggered {
                match &mut monitor {
                    Monitor::Sync(bank) => bank.reset_recovery(),
                    Monitor::Async(m) => m.reset_recovery(),
                }
            }
            owner = next;
            if d.activate_mitigator {
                let map = occupancy_for(&snap, &cfg.mitigator);
                let nav = free_navigation_point(&scenario.route, &snap.ego.bbox.position(), nav_reach, &map);
                let r = latest.clone().unwrap_or_else(|| quiet_report(frame));
                let m = mitigate_on(&snap, &nav, &map, &r, &cfg.mitigator)?;
                mitigation = Some(MitigationSummary {
                    navigation_point: nav,
                    blocked_cells: m.blocked_cells,
                    rerouted: m.rerouted,
                    leading: m.leading,
                });
                dispatched = m.trajectory;
            }
            report = latest;
            buffers = Some(bank);
            decision = Some(d);
        }

        let command = vehicle_controller(&world.ego.state, &dispatched, dt, world.ego.wheelbase, &cfg.controller);
        let before = world.ego_box().position();
        world.apply_ego_command(command, dt);
        world.advance_participants(dt);
        let ego = world.ego_box();
        odometer += (ego.position() - before).norm();

        let actors: Vec<Participant> = world
            .actors
            .iter()
            .map(|a| Participant {
                id: a.id.clone(),
                kind: a.kind,
                bbox: a.bbox,
                behavior: None,
            })
            .collect();
        let signals: Vec<_> = world.signals.iter().map(|s| s.view()).collect();
        let violations = detector.observe(frame, &ego, &actors, &signals);
        let route_station = scenario.route.project(&ego.position()).station;
        world.end_frame();

        let record = FrameRecord {
            frame,
            time: snap.time,
            snapshot_digest: digest_of(&snap)?,
            world_digest: digest_of(&world)?,
            report,
            buffers,
            decision,
            owner: owner.owner,
            cause: owner.takeover_cause,
            trajectory: dispatched,
            mitigation,
            command,
            ego,
            actors,
            signals,
            route_station,
            odometer_m: odometer,
            violations,
        };
        hasher.push_frame(&record)?;
        let terminal = record.violations.iter().any(|v| v.kind.is_terminal());
        frames.push(record);
        prev = Some(snap);
        if terminal || route_station >= route_len - cfg.limits.completion_tolerance {
            break;
        }
    }

    let report = summarize(scenario, options, cfg, &frames);
    let trace = RunTrace {
        header,
        frames,
        footer: TraceFooter {
            report: report.clone(),
            digest: hasher.finish(),
        },
    };
    Ok((report, trace))
}

/// Rebuilds the run report from frame records alone.
pub fn summarize(scenario: &Scenario, options: &RunOptions, cfg: &SimConfig, frames: &[FrameRecord]) -> RunReport {
    let route_len = scenario.route_length();
    let best = frames.iter().map(|f| f.route_station).fold(0.0, f64::max);
    let completed = best >= route_len - cfg.limits.completion_tolerance;
    let route_completion = if completed {
        100.0
    } else {
        (100.0 * best / route_len).clamp(0.0, 100.0)
    };
    let violations: Vec<_> = frames.iter().flat_map(|f| f.violations.iter().cloned()).collect();

    let mut takeovers: Vec<TakeoverEvent> = Vec::new();
    for f in frames {
        let Some(d) = f.decision else { continue };
        if d.takeover_triggered {
            if let Some(cause) = f.cause {
                takeovers.push(TakeoverEvent {
                    frame: f.frame,
                    cause,
                    return_frame: None,
                });
            }
        }
        if d.control_returned {
            if let Some(last) = takeovers.last_mut() {
                last.return_frame = Some(f.frame);
            }
        }
    }

    let last = frames.last();
    let end_reason = match last {
        Some(f) if f.violations.iter().any(|v| v.kind.is_collision()) => EndReason::Collision,
        Some(f) if f.violations.iter().any(|v| v.kind.is_terminal()) => EndReason::StallTimeout,
        _ if completed => EndReason::RouteCompleted,
        _ => EndReason::TimeLimit,
    };
    let (infraction_score, driving_score, success) = score_run(route_completion, &violations);
    RunReport {
        scenario: scenario.name.clone(),
        ads: scenario.ads.name().to_string(),
        argus: options.argus,
        route_completion,
        infraction_score,
        driving_score,
        success,
        violations,
        distance_km: last.map_or(0.0, |f| f.odometer_m / 1000.0),
        takeovers,
        eq8_violations: check_eq8(frames),
        frames: frames.len() as u64,
        end_reason,
    }
}
