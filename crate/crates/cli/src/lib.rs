//! Implementation of the `uavsim` command-line tool.

pub mod args;
pub mod files;
pub mod schema;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use uavsim::eval::{
    evaluate_case_observed, flight_endpoints, run_campaign, EvalConfig, Evaluation, RunConfig,
    Verdict,
};
use uavsim::planner::PlanResult;
use uavsim::plot::{render_svg, PlotInput};
use uavsim::render::{depth_to_cloud, render_depth};
use uavsim::sim::PlanObserver;
use uavsim::testgen::{default_mission, Generator, Mission, TestCase};
use uavsim::Pose;

pub use args::{Cli, Command};
pub use files::CliError;
use files::{read_json, read_toml, OutDir};
use schema::Schema;

const TOOL: &str = "uavsim";

/// Exit code for a simulation verdict.
pub fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Safe => 0,
        Verdict::PredictedViolation => 10,
        Verdict::Invalid => 20,
    }
}

pub fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Simulate(a) => simulate(a),
        Command::Campaign(a) => campaign(a),
        Command::Export(a) => export(a),
    }
}

fn resolve_config(common: &args::Common) -> Result<RunConfig, CliError> {
    let mut cfg: RunConfig = match &common.config {
        Some(p) => read_toml(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.generator.rng_seed = seed;
    }
    Ok(cfg)
}

fn load_mission(path: Option<&Path>) -> Result<Mission, CliError> {
    let m = match path {
        Some(p) => read_json(p, Schema::Mission)?,
        None => default_mission(),
    };
    m.validate()?;
    Ok(m)
}

fn load_case(path: &Path) -> Result<TestCase, CliError> {
    let tc: TestCase = read_json(path, Schema::TestCase)?;
    tc.validate_structure()?;
    Ok(tc)
}

/// Reproducibility record; contains nothing that varies between equal runs.
#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config_path: Option<String>,
    seed: u64,
    inputs: BTreeMap<&'static str, String>,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct Timing {
    started_unix_ms: u128,
    finished_unix_ms: u128,
    wall_clock_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    simulations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_ms_per_simulation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_ms_per_step: Option<f64>,
}

struct Clock {
    started: SystemTime,
    t0: Instant,
}

impl Clock {
    fn start() -> Self {
        Self {
            started: SystemTime::now(),
            t0: Instant::now(),
        }
    }

    fn finish(&self) -> Timing {
        let ms = |t: SystemTime| t.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis());
        Timing {
            started_unix_ms: ms(self.started),
            finished_unix_ms: ms(SystemTime::now()),
            wall_clock_ms: self.t0.elapsed().as_secs_f64() * 1e3,
            workers: None,
            simulations: None,
            mean_ms_per_simulation: None,
            mean_ms_per_step: None,
        }
    }
}

fn write_run_files(
    out: &OutDir,
    command: &'static str,
    common: &args::Common,
    cfg: &RunConfig,
    inputs: BTreeMap<&'static str, String>,
) -> Result<(), CliError> {
    let manifest = Manifest {
        tool: TOOL,
        version: env!("CARGO_PKG_VERSION"),
        command,
        config_path: common.config.as_ref().map(|p| p.display().to_string()),
        seed: cfg.generator.rng_seed,
        inputs,
        config: cfg,
    };
    out.write_json("manifest.json", &manifest, Schema::Manifest)?;
    out.write_toml("config.resolved.toml", cfg)?;
    Ok(())
}

fn case_file_name(tc: &TestCase) -> String {
    format!("case_{:04}.json", tc.index)
}

fn generate(a: args::GenerateArgs) -> Result<u8, CliError> {
    let clock = Clock::start();
    let cfg = resolve_config(&a.common)?;
    cfg.generator.validate()?;
    cfg.simulation.validate()?;
    let mission = load_mission(a.mission.as_deref())?;
    let out = OutDir::create(&a.common.out)?;
    let mut inputs = BTreeMap::new();
    inputs.insert("count", a.count.to_string());
    if let Some(m) = &a.mission {
        inputs.insert("mission", m.display().to_string());
    }
    write_run_files(&out, "generate", &a.common, &cfg, inputs)?;

    let mut gen = Generator::new(&mission, &cfg.generator)?;
    for _ in 0..a.count {
        let tc = gen.next_case()?;
        tc.validate(&cfg.generator.arena)?;
        out.write_json(&case_file_name(&tc), &tc, Schema::TestCase)?;
    }
    out.write_json("timing.json", &clock.finish(), Schema::Timing)?;
    eprintln!("wrote {} test case(s) to {}", a.count, a.common.out.display());
    Ok(0)
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    case: String,
    #[serde(flatten)]
    evaluation: &'a Evaluation,
    policy: &'a EvalConfig,
}

/// Collects per-step lookahead trees for `--debug`.
#[derive(Default)]
struct TreeDump {
    jsonl: String,
}

impl PlanObserver for TreeDump {
    fn observe(&mut self, step: usize, _: &Pose, result: &PlanResult) {
        self.jsonl.push_str(&result.tree_jsonl(step));
    }
}

fn simulate(a: args::SimulateArgs) -> Result<u8, CliError> {
    let clock = Clock::start();
    let cfg = resolve_config(&a.common)?;
    cfg.simulation.validate()?;
    cfg.evaluation.validate()?;
    let tc = load_case(&a.case)?;
    let out = OutDir::create(&a.common.out)?;
    let mut inputs = BTreeMap::new();
    inputs.insert("case", a.case.display().to_string());
    write_run_files(&out, "simulate", &a.common, &cfg, inputs)?;

    let mut trees = TreeDump::default();
    let observer: &mut dyn PlanObserver = if a.debug { &mut trees } else { &mut () };
    let (ev, result) = evaluate_case_observed(
        &tc,
        &cfg.generator,
        &cfg.simulation,
        &cfg.evaluation,
        observer,
    )?;
    let traj = &result.trajectory;
    out.write_with("trajectory.csv", |w| traj.write_csv(w))?;
    let soi = uavsim::testgen::find_soi(&tc.mission, &cfg.generator.arena)?;
    let svg = render_svg(&PlotInput {
        arena: Some(&cfg.generator.arena),
        obstacles: &tc.obstacles,
        soi: Some(&soi.segment),
        trajectory: Some(traj),
    });
    out.write_bytes("plot.svg", svg.as_bytes())?;
    out.write_json(
        "report.json",
        &SimulateReport {
            case: a.case.display().to_string(),
            evaluation: &ev,
            policy: &cfg.evaluation,
        },
        Schema::Report,
    )?;

    if a.debug {
        let dbg = out.subdir("debug")?;
        dbg.write_bytes("trees.jsonl", trees.jsonl.as_bytes())?;
        let (_, t_min) = traj.min_distance();
        let first = traj.points.first().map(|p| ("start", p.pose));
        let closest = traj.points.iter().find(|p| p.t == t_min).map(|p| ("closest", p.pose));
        for (name, pose) in first.into_iter().chain(closest) {
            dump_view(&dbg, name, &tc, &pose, &cfg)?;
        }
    }

    let mut timing = clock.finish();
    timing.simulations = Some(1);
    timing.mean_ms_per_step = Some(timing.wall_clock_ms / ev.steps.max(1) as f64);
    out.write_json("timing.json", &timing, Schema::Timing)?;
    println!(
        "{} outcome={} min_distance={} steps={}",
        ev.verdict,
        ev.outcome,
        ev.min_distance.map_or("inf".to_string(), |d| format!("{d:.3}")),
        ev.steps
    );
    Ok(verdict_code(ev.verdict))
}

fn dump_view(
    out: &OutDir,
    name: &str,
    tc: &TestCase,
    pose: &Pose,
    cfg: &RunConfig,
) -> Result<(), CliError> {
    let cam = &cfg.simulation.camera;
    let img = render_depth(&tc.obstacles, pose, &cam.intrinsics, &cam.extrinsics);
    out.write_with(&format!("depth_{name}.pgm"), |w| img.write_pgm(w))?;
    let cloud = depth_to_cloud(&img, pose, &cam.extrinsics, cam.stride);
    out.write_with(&format!("cloud_{name}.xyz"), |w| cloud.write_xyz(w))?;
    Ok(())
}

#[derive(Serialize)]
struct CampaignSummary {
    evaluated: usize,
    safe: usize,
    predicted_violation: usize,
    invalid: usize,
    target: usize,
    budget: usize,
    target_reached: bool,
    /// Suite file names, ascending by minimum distance.
    suite: Vec<String>,
}

fn campaign(a: args::CampaignArgs) -> Result<u8, CliError> {
    let clock = Clock::start();
    let mut cfg = resolve_config(&a.common)?;
    if let Some(b) = a.budget {
        cfg.campaign.budget = b;
    }
    if let Some(t) = a.target {
        cfg.campaign.target = t;
    }
    if let Some(w) = a.workers {
        cfg.campaign.workers = w;
    }
    if cfg.campaign.budget < cfg.campaign.target {
        return Err(CliError::Usage(format!(
            "budget ({}) must be at least target ({})",
            cfg.campaign.budget, cfg.campaign.target
        )));
    }
    cfg.validate()?;
    let mission = load_mission(a.mission.as_deref())?;
    let out = OutDir::create(&a.common.out)?;
    let mut inputs = BTreeMap::new();
    if let Some(m) = &a.mission {
        inputs.insert("mission", m.display().to_string());
    }
    write_run_files(&out, "campaign", &a.common, &cfg, inputs)?;

    let report = run_campaign(&mission, &cfg, |ev| {
        eprintln!(
            "case {:4}: {:<19} {:<12} min={}",
            ev.index,
            ev.verdict.to_string(),
            ev.outcome.to_string(),
            ev.min_distance.map_or("inf".to_string(), |d| format!("{d:.3}"))
        );
    })?;

    let suite_dir = out.subdir("suite")?;
    let mut names = Vec::new();
    for (rank, entry) in report.suite.iter().enumerate() {
        let name = format!("rank_{:03}_{}", rank, case_file_name(&entry.case));
        suite_dir.write_json(&name, &entry.case, Schema::TestCase)?;
        names.push(format!("suite/{name}"));
    }
    out.write_with("cases.csv", |w| {
        use std::io::Write;
        writeln!(w, "index,outcome,verdict,min_distance,min_distance_time,steps,path_length")?;
        for e in &report.evaluations {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                e.index,
                e.outcome,
                e.verdict,
                e.min_distance.map_or("inf".to_string(), |d| d.to_string()),
                e.min_distance_time,
                e.steps,
                e.path_length
            )?;
        }
        Ok(())
    })?;
    let summary = CampaignSummary {
        evaluated: report.evaluations.len(),
        safe: report.count(Verdict::Safe),
        predicted_violation: report.count(Verdict::PredictedViolation),
        invalid: report.count(Verdict::Invalid),
        target: cfg.campaign.target,
        budget: cfg.campaign.budget,
        target_reached: report.target_reached,
        suite: names,
    };
    out.write_json("report.json", &summary, Schema::Campaign)?;

    let mut timing = clock.finish();
    let n = report.simulated;
    let steps = report.simulated_steps;
    timing.workers = Some(cfg.campaign.workers);
    timing.simulations = Some(n);
    if n > 0 {
        timing.mean_ms_per_simulation = Some(timing.wall_clock_ms / n as f64);
    }
    if steps > 0 {
        timing.mean_ms_per_step = Some(timing.wall_clock_ms * cfg.campaign.workers as f64 / steps as f64);
    }
    out.write_json("timing.json", &timing, Schema::Timing)?;
    println!(
        "evaluated {} case(s): {} violation(s), {} safe, {} invalid",
        summary.evaluated, summary.predicted_violation, summary.safe, summary.invalid
    );
    Ok(0)
}

fn export(a: args::ExportArgs) -> Result<u8, CliError> {
    let clock = Clock::start();
    let cfg = resolve_config(&a.common)?;
    cfg.simulation.validate()?;
    let tc = load_case(&a.case)?;
    let out = OutDir::create(&a.common.out)?;
    let mut inputs = BTreeMap::new();
    inputs.insert("case", a.case.display().to_string());
    write_run_files(&out, "export", &a.common, &cfg, inputs)?;

    let soi = uavsim::testgen::find_soi(&tc.mission, &cfg.generator.arena)?;
    let svg = render_svg(&PlotInput {
        arena: Some(&cfg.generator.arena),
        obstacles: &tc.obstacles,
        soi: Some(&soi.segment),
        trajectory: None,
    });
    out.write_bytes("scenario.svg", svg.as_bytes())?;
    let leg = tc.mission.legs()[soi.leg];
    let (start, _) = flight_endpoints(leg.start, leg.end, cfg.simulation.cruise_altitude_m);
    dump_view(&out, "start", &tc, &start, &cfg)?;
    out.write_json("timing.json", &clock.finish(), Schema::Timing)?;
    Ok(0)
}
