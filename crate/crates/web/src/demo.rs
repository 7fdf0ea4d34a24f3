//! Target-independent logic behind the browser bindings.

use serde::Serialize;
use uavsim::eval::{classify, flight_endpoints, EvalConfig, Verdict};
use uavsim::plot::{render_svg, PlotInput};
use uavsim::render::{render_depth, CameraIntrinsics};
use uavsim::sim::{SimConfig, Simulator, Trajectory};
use uavsim::testgen::{default_mission, find_soi, Generator, GeneratorConfig, TestCase};
use uavsim::ArenaRect;

/// The `index`-th case of the default mission's stream for `seed`.
pub fn generate_case(seed: u64, index: u32) -> Result<TestCase, String> {
    let cfg = GeneratorConfig {
        rng_seed: seed,
        ..GeneratorConfig::default()
    };
    let mut gen = Generator::new(&default_mission(), &cfg).map_err(|e| e.to_string())?;
    for _ in 0..index {
        gen.next_case().map_err(|e| e.to_string())?;
    }
    gen.next_case().map_err(|e| e.to_string())
}

pub fn parse_case(json: &str) -> Result<TestCase, String> {
    let tc: TestCase = serde_json::from_str(json).map_err(|e| e.to_string())?;
    tc.validate_structure().map_err(|e| e.to_string())?;
    Ok(tc)
}

pub fn scenario_svg(tc: &TestCase, trajectory: Option<&Trajectory>) -> String {
    let arena = ArenaRect::default();
    let soi = find_soi(&tc.mission, &arena).ok().map(|s| s.segment);
    render_svg(&PlotInput {
        arena: Some(&arena),
        obstacles: &tc.obstacles,
        soi: soi.as_ref(),
        trajectory,
    })
}

#[derive(Debug, Serialize)]
pub struct Status {
    pub t: f64,
    pub steps: usize,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub finished: bool,
    pub outcome: Option<String>,
    pub verdict: Option<Verdict>,
    pub min_distance: Option<f64>,
}

/// A flight in progress over one test case.
pub struct Flight {
    case: TestCase,
    sim: Simulator,
    cfg: SimConfig,
    policy: EvalConfig,
}

impl Flight {
    pub fn new(tc: TestCase) -> Result<Self, String> {
        let arena = ArenaRect::default();
        let cfg = SimConfig::default();
        let soi = find_soi(&tc.mission, &arena).map_err(|e| e.to_string())?;
        let leg = tc.mission.legs()[soi.leg];
        let (start, goal) = flight_endpoints(leg.start, leg.end, cfg.cruise_altitude_m);
        let sim = Simulator::new(goal, start, tc.obstacles.clone(), &cfg).map_err(|e| e.to_string())?;
        Ok(Self {
            case: tc,
            sim,
            cfg,
            policy: EvalConfig::default(),
        })
    }

    /// Runs up to `steps` planning cycles; true once the flight has ended.
    pub fn advance(&mut self, steps: u32) -> bool {
        for _ in 0..steps {
            if self.sim.step(&mut ()).is_some() {
                return true;
            }
        }
        self.sim.outcome().is_some()
    }

    fn trajectory(&self) -> Trajectory {
        Trajectory {
            points: self.sim.points().to_vec(),
        }
    }

    pub fn status(&self) -> Status {
        let last = self.sim.points().last().expect("start point");
        let (min, _) = self.trajectory().min_distance();
        let outcome = self.sim.outcome();
        Status {
            t: last.t,
            steps: self.sim.points().len() - 1,
            x: last.pose.position.x,
            y: last.pose.position.y,
            yaw: last.pose.yaw,
            finished: outcome.is_some(),
            outcome: outcome.map(|o| o.to_string()),
            verdict: outcome.map(|o| classify(o, min, &self.policy)),
            min_distance: min.is_finite().then_some(min),
        }
    }

    pub fn svg(&self) -> String {
        scenario_svg(&self.case, Some(&self.trajectory()))
    }

    /// Grey-scale RGBA view from the current pose, near surfaces bright,
    /// misses black.
    pub fn depth_rgba(&self, width: usize, height: usize) -> Vec<u8> {
        let cam = &self.cfg.camera;
        let fov = 2.0 * cam.intrinsics.half_fov().0.to_degrees();
        let intr = CameraIntrinsics::from_fov(width.max(1), height.max(1), fov, cam.intrinsics.max_range);
        let img = render_depth(self.sim.obstacles(), self.sim.pose(), &intr, &cam.extrinsics);
        let mut out = Vec::with_capacity(img.data.len() * 4);
        for d in &img.data {
            let g = if d.is_finite() {
                (255.0 * (1.0 - d / intr.max_range)).clamp(0.0, 255.0) as u8
            } else {
                0
            };
            out.extend_from_slice(&[g, g, g, 255]);
        }
        out
    }
}
