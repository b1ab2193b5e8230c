//! `argus`: run scenarios and suites with and without runtime hazard
//! monitoring, score takeovers, replay traces and export plots.
//!
//! Exit status: 0 ok, 1 verification mismatch, 2 usage, 3 input or runtime error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use argus_core::gate::Owner;
use argus_core::mitigator::{AStarWeights, IdmParams, MitigatorConfig};
use argus_core::monitor::{score_takeovers, MonitorConfig, TakeoverLabels, TakeoverScore};
use argus_core::prediction::EnlargementCaps;
use argus_core::scenario::{load_scenario, load_suite, NoiseParams, Scenario};
use argus_core::sim::{
    aggregate, overhead_svg, read_trace, run_scenario, timeseries_svg, verify_trace, write_trace, BenchmarkSummary,
    takeover_labels, MonitorMode, Penalties, RunLimits, RunOptions, RunReport, RunTrace, SimConfig,
};
use argus_core::ArgusError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

/// Seconds between scenarios when pooling takeover labels from several runs,
/// far beyond any scoring window.
const POOL_GAP_S: f64 = 1.0e6;

#[derive(Parser)]
#[command(name = "argus", version, about = "Runtime hazard monitoring and mitigation for scripted driving stacks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run(RunArgs),
    /// Run every scenario of a manifest with the monitor off and on.
    Suite(SuiteArgs),
    /// Takeover precision, recall and F3.
    Score(ScoreArgs),
    /// Verify a trace against its own records and a re-simulation.
    Replay(ReplayArgs),
    /// Export SVG plots from a trace.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn is_on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sync,
    Async,
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    #[arg(long, value_enum, default_value = "on")]
    argus: Switch,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SuiteArgs {
    manifest: PathBuf,
    /// Run the whole suite this many times and report per-metric means.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    repeat: u32,
    /// Worker threads; 1 runs single-threaded. Defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write every run's trace.
    #[arg(long)]
    traces: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "off")]
    noise: Switch,
    #[arg(long = "noise.position-sigma")]
    noise_position_sigma: Option<f64>,
    #[arg(long = "noise.heading-sigma")]
    noise_heading_sigma: Option<f64>,
    #[arg(long = "noise.speed-sigma")]
    noise_speed_sigma: Option<f64>,
    #[arg(long = "noise.drop")]
    noise_drop: Option<f64>,
    /// Replace every scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "ARGUS_OUT_DIR", default_value = "argus-out")]
    out: PathBuf,
    /// Write overhead and time-series SVGs next to each report.
    #[arg(long)]
    plots: bool,
    #[command(flatten)]
    params: Params,
}

#[derive(Args)]
struct Params {
    /// Collision and signal queue length.
    #[arg(long = "gate.M", default_value_t = 5)]
    gate_m: usize,
    /// Takeover threshold on the collision and signal queues.
    #[arg(long = "gate.l", default_value_t = 4)]
    gate_l: usize,
    /// Recovery queue length.
    #[arg(long = "gate.R", default_value_t = 20)]
    gate_r: usize,
    /// Stall queue length.
    #[arg(long = "monitor.N", default_value_t = 20)]
    monitor_n: usize,
    /// Prediction horizon, frames.
    #[arg(long = "monitor.H", default_value_t = 60)]
    monitor_h: usize,
    #[arg(long = "monitor.epsilon", default_value_t = 0.1)]
    monitor_epsilon: f64,
    #[arg(long = "caps.ego", default_value_t = 1.3)]
    caps_ego: f64,
    #[arg(long = "caps.vehicle", default_value_t = 2.0)]
    caps_vehicle: f64,
    #[arg(long = "caps.pedestrian", default_value_t = 1.5)]
    caps_pedestrian: f64,
    #[arg(long = "idm.s0", default_value_t = 4.0)]
    idm_s0: f64,
    #[arg(long = "idm.T", default_value_t = 0.25)]
    idm_t: f64,
    #[arg(long = "idm.a", default_value_t = 11.0)]
    idm_a: f64,
    #[arg(long = "idm.b", default_value_t = 20.0)]
    idm_b: f64,
    #[arg(long = "idm.sigma", default_value_t = 4.0)]
    idm_sigma: f64,
    /// Desired speed as a fraction of the lane speed limit.
    #[arg(long = "idm.speed-factor", default_value_t = 0.72)]
    idm_speed_factor: f64,
    #[arg(long = "astar.w-dev", default_value_t = 1.0)]
    astar_w_dev: f64,
    #[arg(long = "astar.w-turn", default_value_t = 0.5)]
    astar_w_turn: f64,
    #[arg(long = "penalty.collision-pedestrian", default_value_t = 0.5)]
    penalty_pedestrian: f64,
    #[arg(long = "penalty.collision-vehicle", default_value_t = 0.6)]
    penalty_vehicle: f64,
    #[arg(long = "penalty.collision-static", default_value_t = 0.65)]
    penalty_static: f64,
    #[arg(long = "penalty.red-light", default_value_t = 0.7)]
    penalty_red: f64,
    #[arg(long = "penalty.stop-sign", default_value_t = 0.8)]
    penalty_stop: f64,
    #[arg(long = "penalty.stall-timeout", default_value_t = 0.7)]
    penalty_stall: f64,
    /// Seconds below epsilon outside stop regions that end a run.
    #[arg(long = "stall-timeout", default_value_t = 60.0)]
    stall_timeout: f64,
    /// Monitor execution: in-frame, or on its own thread.
    #[arg(long, value_enum, default_value = "sync")]
    mode: Mode,
}

#[derive(Args)]
struct ScoreArgs {
    /// Trace of the monitored run; supplies takeover times.
    #[arg(long, requires = "off", conflicts_with = "labels")]
    on: Option<PathBuf>,
    /// Trace of the unmonitored run; supplies violation times.
    #[arg(long, requires = "on")]
    off: Option<PathBuf>,
    /// JSON file with `takeovers` and `violations` in seconds.
    #[arg(long, required_unless_present = "on")]
    labels: Option<PathBuf>,
    /// Matching window, s.
    #[arg(long, default_value_t = 3.0)]
    window: f64,
}

#[derive(Args)]
struct ReplayArgs {
    trace: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    trace: PathBuf,
    /// Output directory; defaults to the trace's directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Mismatch(String),
    Usage(String),
    Input(String),
}

impl From<ArgusError> for Failure {
    fn from(e: ArgusError) -> Self {
        match e {
            ArgusError::InvalidArgument(_) => Failure::Usage(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

impl Params {
    fn config(&self) -> CliResult<SimConfig> {
        let monitor = MonitorConfig {
            m: self.gate_m,
            n: self.monitor_n,
            r: self.gate_r,
            l: self.gate_l,
            horizon: self.monitor_h,
            epsilon: self.monitor_epsilon,
            caps: EnlargementCaps {
                ego: self.caps_ego,
                vehicle: self.caps_vehicle,
                pedestrian: self.caps_pedestrian,
            },
            ..MonitorConfig::default()
        };
        let mitigator = MitigatorConfig {
            astar: AStarWeights {
                w_dev: self.astar_w_dev,
                w_turn: self.astar_w_turn,
            },
            idm: IdmParams {
                s0: self.idm_s0,
                t_headway: self.idm_t,
                a_max: self.idm_a,
                b_comf: self.idm_b,
                sigma: self.idm_sigma,
                ..IdmParams::default()
            },
            speed_limit_factor: self.idm_speed_factor,
            ..MitigatorConfig::default()
        };
        let cfg = SimConfig {
            monitor,
            mitigator,
            penalties: Penalties {
                collision_pedestrian: self.penalty_pedestrian,
                collision_vehicle: self.penalty_vehicle,
                collision_static: self.penalty_static,
                red_light: self.penalty_red,
                stop_sign: self.penalty_stop,
                stall_timeout: self.penalty_stall,
            },
            limits: RunLimits {
                stall_timeout_s: self.stall_timeout,
                ..RunLimits::default()
            },
            mode: match self.mode {
                Mode::Sync => MonitorMode::Sync,
                Mode::Async => MonitorMode::Async,
            },
            ..SimConfig::default()
        };
        cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

impl Common {
    fn noise_for(&self, scenario: &Scenario) -> CliResult<Option<NoiseParams>> {
        if !self.noise.is_on() {
            return Ok(None);
        }
        let base = scenario.noise.unwrap_or(NoiseParams::STANDARD);
        let n = NoiseParams {
            position_sigma: self.noise_position_sigma.unwrap_or(base.position_sigma),
            heading_sigma: self.noise_heading_sigma.unwrap_or(base.heading_sigma),
            speed_sigma: self.noise_speed_sigma.unwrap_or(base.speed_sigma),
            drop_probability: self.noise_drop.unwrap_or(base.drop_probability),
        };
        let sigmas_ok = [n.position_sigma, n.heading_sigma, n.speed_sigma]
            .iter()
            .all(|s| s.is_finite() && *s >= 0.0);
        if !sigmas_ok || !(0.0..=1.0).contains(&n.drop_probability) {
            return Err(Failure::Usage("noise sigmas must be >= 0 and dropout within [0, 1]".into()));
        }
        Ok(Some(n))
    }

    fn prepare(&self, mut scenario: Scenario) -> Scenario {
        if let Some(seed) = self.seed {
            scenario.seed = seed;
        }
        scenario
    }
}

fn arm(argus: bool) -> &'static str {
    if argus {
        "on"
    } else {
        "off"
    }
}

fn ensure_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Input(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_plots(trace: &RunTrace, dir: &Path, stem: &str) -> CliResult {
    for (suffix, svg) in [("overhead", overhead_svg(trace)), ("timeseries", timeseries_svg(trace))] {
        let path = dir.join(format!("{stem}.{suffix}.svg"));
        fs::write(&path, svg).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn report_line(r: &RunReport) -> String {
    let kinds: Vec<&str> = r.violations.iter().map(|v| v.kind.as_str()).collect();
    format!(
        "{:<28} {:<18} argus={:<3} RC={:6.2} IS={:.3} DS={:6.2} takeovers={} eq8={} end={:?} violations=[{}]",
        r.scenario,
        r.ads,
        arm(r.argus),
        r.route_completion,
        r.infraction_score,
        r.driving_score,
        r.takeovers.len(),
        r.eq8_violations,
        r.end_reason,
        kinds.join(",")
    )
}

fn cmd_run(args: &RunArgs) -> CliResult {
    let cfg = args.common.params.config()?;
    let scenario = args.common.prepare(load_scenario(&args.scenario)?);
    let options = RunOptions {
        argus: args.argus.is_on(),
        noise: args.common.noise_for(&scenario)?,
    };
    let (report, trace) = run_scenario(&scenario, &options, &cfg)?;
    let out = &args.common.out;
    ensure_dir(out)?;
    let stem = format!("{}.{}", scenario.name, arm(options.argus));
    write_json(&out.join(format!("{stem}.report.json")), &report)?;
    write_trace(&trace, &out.join(format!("{stem}.trace.jsonl")))?;
    if args.common.plots {
        write_plots(&trace, out, &stem)?;
    }
    println!("{}", report_line(&report));
    Ok(())
}

#[derive(Serialize, Clone, PartialEq)]
struct SuiteRow {
    ads: String,
    argus: bool,
    #[serde(flatten)]
    summary: BenchmarkSummary,
}

#[derive(Serialize, Clone, PartialEq)]
struct SuiteResult {
    rows: Vec<SuiteRow>,
    overall: Vec<SuiteRow>,
    takeover_accuracy: TakeoverScore,
}

fn suite_result(scenarios: &[Scenario], reports: &[(usize, RunReport)]) -> CliResult<SuiteResult> {
    let mut groups: BTreeMap<(String, bool), Vec<RunReport>> = BTreeMap::new();
    let mut arms: BTreeMap<bool, Vec<RunReport>> = BTreeMap::new();
    for (_, r) in reports {
        groups.entry((r.ads.clone(), r.argus)).or_default().push(r.clone());
        arms.entry(r.argus).or_default().push(r.clone());
    }
    let rows = groups
        .into_iter()
        .map(|((ads, argus), rs)| Ok(SuiteRow { ads, argus, summary: aggregate(&rs)? }))
        .collect::<Result<Vec<_>, ArgusError>>()?;
    let overall = arms
        .into_iter()
        .map(|(argus, rs)| {
            Ok(SuiteRow {
                ads: "all".into(),
                argus,
                summary: aggregate(&rs)?,
            })
        })
        .collect::<Result<Vec<_>, ArgusError>>()?;

    // Takeovers from the monitored arm, violations from the unmonitored arm
    // of the same scenario; scenarios are spread far apart in time.
    let mut labels = TakeoverLabels::default();
    for (idx, on) in reports.iter().filter(|(_, r)| r.argus) {
        let Some((_, off)) = reports.iter().find(|(j, r)| j == idx && !r.argus) else {
            continue;
        };
        let pair = takeover_labels(on, off, scenarios[*idx].dt(), *idx as f64 * POOL_GAP_S);
        labels.takeovers.extend(pair.takeovers);
        labels.violations.extend(pair.violations);
    }
    Ok(SuiteResult {
        rows,
        overall,
        takeover_accuracy: score_takeovers(&labels, 3.0),
    })
}

fn rate(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.2}"))
}

fn print_table(title: &str, res: &SuiteResult) {
    println!("{title}");
    println!(
        "{:<20} {:<6} {:>4} {:>7} {:>7} {:>7} {:>8} {:>8} {:>8} {:>9} {:>4}",
        "ads", "argus", "runs", "SR%", "RC%", "DS", "Coll/km", "Stop/km", "Stall/km", "takeovers", "eq8"
    );
    for row in res.rows.iter().chain(&res.overall) {
        let s = &row.summary;
        println!(
            "{:<20} {:<6} {:>4} {:>7.2} {:>7.2} {:>7.2} {:>8} {:>8} {:>8} {:>9} {:>4}",
            row.ads,
            arm(row.argus),
            s.runs,
            s.success_rate,
            s.route_completion,
            s.driving_score,
            rate(s.collisions_per_km),
            rate(s.stop_per_km),
            rate(s.stall_per_km),
            s.takeovers,
            s.eq8_violations
        );
    }
    let a = &res.takeover_accuracy;
    println!(
        "takeover accuracy (3 s window): TP={} FP={} FN={} precision={:.3} recall={:.3} F3={:.3}",
        a.tp, a.fp, a.fn_, a.precision, a.recall, a.f_beta
    );
}

fn mean_result(results: &[SuiteResult]) -> SuiteResult {
    let n = results.len() as f64;
    let mut mean = results[0].clone();
    let avg = |get: &dyn Fn(&SuiteResult) -> f64| results.iter().map(get).sum::<f64>() / n;
    let avg_opt = |get: &dyn Fn(&SuiteResult) -> Option<f64>| {
        let vals: Option<Vec<f64>> = results.iter().map(get).collect();
        vals.map(|v| v.iter().sum::<f64>() / n)
    };
    for i in 0..mean.rows.len() + mean.overall.len() {
        let pick = move |r: &SuiteResult| -> BenchmarkSummary {
            if i < r.rows.len() {
                r.rows[i].summary.clone()
            } else {
                r.overall[i - r.rows.len()].summary.clone()
            }
        };
        let s = BenchmarkSummary {
            success_rate: avg(&|r| pick(r).success_rate),
            route_completion: avg(&|r| pick(r).route_completion),
            driving_score: avg(&|r| pick(r).driving_score),
            total_km: avg(&|r| pick(r).total_km),
            collisions_per_km: avg_opt(&|r| pick(r).collisions_per_km),
            stop_per_km: avg_opt(&|r| pick(r).stop_per_km),
            stall_per_km: avg_opt(&|r| pick(r).stall_per_km),
            ..pick(&results[0])
        };
        if i < mean.rows.len() {
            mean.rows[i].summary = s;
        } else {
            let j = i - mean.rows.len();
            mean.overall[j].summary = s;
        }
    }
    mean
}

fn cmd_suite(args: &SuiteArgs) -> CliResult {
    let cfg = args.common.params.config()?;
    let (manifest, loaded) = load_suite(&args.manifest)?;
    let scenarios: Vec<Scenario> = loaded.into_iter().map(|(_, s)| args.common.prepare(s)).collect();
    let noises = scenarios
        .iter()
        .map(|s| args.common.noise_for(s))
        .collect::<CliResult<Vec<_>>>()?;
    let out = &args.common.out;
    let runs_dir = out.join("runs");
    ensure_dir(&runs_dir)?;

    let tasks: Vec<(u32, usize, bool)> = (0..args.repeat)
        .flat_map(|rep| (0..scenarios.len()).flat_map(move |i| [(rep, i, false), (rep, i, true)]))
        .collect();
    let run_one = |&(rep, i, argus): &(u32, usize, bool)| -> Result<(u32, usize, RunReport, RunTrace), ArgusError> {
        let options = RunOptions {
            argus,
            noise: noises[i],
        };
        let (report, trace) = run_scenario(&scenarios[i], &options, &cfg)?;
        Ok((rep, i, report, trace))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let finished = pool.install(|| tasks.par_iter().map(run_one).collect::<Result<Vec<_>, _>>())?;

    let mut per_rep: Vec<Vec<(usize, RunReport)>> = vec![Vec::new(); args.repeat as usize];
    for (rep, i, report, trace) in &finished {
        if *rep == 0 {
            let stem = format!("{}.{}", scenarios[*i].name, arm(report.argus));
            write_json(&runs_dir.join(format!("{stem}.report.json")), report)?;
            if args.traces {
                write_trace(trace, &runs_dir.join(format!("{stem}.trace.jsonl")))?;
            }
            if args.common.plots {
                write_plots(trace, &runs_dir, &stem)?;
            }
        }
        per_rep[*rep as usize].push((*i, report.clone()));
    }
    for reports in per_rep.iter().take(1) {
        for (_, r) in reports {
            println!("{}", report_line(r));
        }
    }
    let results = per_rep
        .iter()
        .map(|reports| suite_result(&scenarios, reports))
        .collect::<CliResult<Vec<_>>>()?;
    let identical = results.windows(2).all(|w| w[0] == w[1]);
    let mean = mean_result(&results);
    let title = if args.repeat > 1 {
        format!(
            "suite {} ({} scenarios, mean over {} repeats; repeats identical: {})",
            manifest.name,
            scenarios.len(),
            args.repeat,
            if identical { "yes" } else { "no" }
        )
    } else {
        format!("suite {} ({} scenarios)", manifest.name, scenarios.len())
    };
    print_table(&title, &mean);
    #[derive(Serialize)]
    struct Summary<'a> {
        suite: &'a str,
        repeats: u32,
        repeats_identical: bool,
        #[serde(flatten)]
        mean: &'a SuiteResult,
    }
    write_json(
        &out.join("suite_summary.json"),
        &Summary {
            suite: &manifest.name,
            repeats: args.repeat,
            repeats_identical: identical,
            mean: &mean,
        },
    )
}

fn cmd_score(args: &ScoreArgs) -> CliResult {
    if !(args.window.is_finite() && args.window >= 0.0) {
        return Err(Failure::Usage("window must be >= 0".into()));
    }
    let labels = match (&args.labels, &args.on, &args.off) {
        (Some(path), _, _) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<TakeoverLabels>(&text)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
        }
        (None, Some(on), Some(off)) => {
            let (on, _) = read_trace(on)?;
            let (off, _) = read_trace(off)?;
            takeover_labels(&on.footer.report, &off.footer.report, on.header.scenario.dt(), 0.0)
        }
        _ => return Err(Failure::Usage("give --labels, or both --on and --off".into())),
    };
    let s = score_takeovers(&labels, args.window);
    println!(
        "TP={} FP={} FN={} precision={:.3} recall={:.3} F3={:.3}",
        s.tp, s.fp, s.fn_, s.precision, s.recall, s.f_beta
    );
    Ok(())
}

fn cmd_replay(args: &ReplayArgs) -> CliResult {
    let outcome = verify_trace(&args.trace)?;
    if outcome.ok() {
        println!("replay ok: {}", args.trace.display());
        Ok(())
    } else {
        Err(Failure::Mismatch(outcome.mismatches.join("\n")))
    }
}

fn cmd_plot(args: &PlotArgs) -> CliResult {
    let (trace, _) = read_trace(&args.trace)?;
    let dir = args
        .out
        .clone()
        .unwrap_or_else(|| args.trace.parent().map(Path::to_path_buf).unwrap_or_default());
    ensure_dir(&dir)?;
    let owner = if trace.header.options.argus { "on" } else { "off" };
    let stem = format!("{}.{}", trace.header.scenario.name, owner);
    write_plots(&trace, &dir, &stem)?;
    let takeover_frames = trace.frames.iter().filter(|f| f.owner == Owner::Mitigator).count();
    println!(
        "wrote {}/{stem}.overhead.svg and .timeseries.svg ({} frames, {} under the mitigator)",
        dir.display(),
        trace.frames.len(),
        takeover_frames
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Suite(a) => cmd_suite(a),
        Command::Score(a) => cmd_score(a),
        Command::Replay(a) => cmd_replay(a),
        Command::Plot(a) => cmd_plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(msg)) => {
            eprintln!("verification mismatch:\n{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_defaults_are_the_library_defaults() {
        let cli = Cli::parse_from(["argus", "run", "x.json"]);
        let Command::Run(args) = cli.command else { unreachable!() };
        assert!(args.common.params.config().ok() == Some(SimConfig::default()));
    }

    #[test]
    fn threshold_above_queue_length_is_a_usage_error() {
        let cli = Cli::parse_from(["argus", "run", "x.json", "--gate.l=9", "--gate.M=5"]);
        let Command::Run(args) = cli.command else { unreachable!() };
        assert!(matches!(args.common.params.config(), Err(Failure::Usage(_))));
    }
}
