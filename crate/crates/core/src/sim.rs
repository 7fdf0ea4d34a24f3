//! Low-fidelity flight loop: render, plan, then advance the pose under a
//! yaw-gated constant-speed model, one presumed 100 ms cycle per step.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::geom::{angle_diff, CuboidObstacle, DistanceMode, Pose, Vec3};
use crate::planner::{plan, PlanResult, PlannerParams, ViewCone};
use crate::render::{render_cloud, CameraExtrinsics, CameraIntrinsics, PointCloud};

/// How forward progress shrinks once the required turn exceeds the gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FractionRule {
    /// `min(1, ψ_step / Δψ)`: larger turns slow the UAV down.
    #[default]
    Inverse,
    /// `min(1, Δψ / ψ_step)`.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KinematicParams {
    /// m/s
    pub v_max: f64,
    /// deg/s
    pub yaw_rate_max_deg: f64,
    /// s
    pub dt: f64,
    pub yaw_gate_fraction: f64,
    pub fraction_rule: FractionRule,
}

impl Default for KinematicParams {
    fn default() -> Self {
        Self {
            v_max: 3.0,
            yaw_rate_max_deg: 13.5,
            dt: 0.1,
            yaw_gate_fraction: 1.0 / 3.0,
            fraction_rule: FractionRule::Inverse,
        }
    }
}

impl KinematicParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, v) in [
            ("kinematics.v_max", self.v_max),
            ("kinematics.yaw_rate_max_deg", self.yaw_rate_max_deg),
            ("kinematics.dt", self.dt),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::invalid(field, "must be positive"));
            }
        }
        if !(self.yaw_gate_fraction > 0.0 && self.yaw_gate_fraction < 1.0) {
            return Err(ConfigError::invalid(
                "kinematics.yaw_gate_fraction",
                "must lie in (0, 1)",
            ));
        }
        Ok(())
    }

    /// Largest yaw change in one cycle, radians.
    pub fn yaw_step(&self) -> f64 {
        self.yaw_rate_max_deg.to_radians() * self.dt
    }

    /// Largest displacement in one cycle, metres.
    pub fn max_step(&self) -> f64 {
        self.v_max * self.dt
    }
}

/// Advances `pose` one cycle toward `target`.
///
/// The yaw turns toward the bearing of the target by at most one yaw step.
/// The UAV moves along the straight line to the target: a full step when the
/// required turn is under the gate, otherwise a fraction of it. It never
/// passes the target.
pub fn kinematic_step(pose: &Pose, target: Vec3, k: &KinematicParams) -> Pose {
    let to_target = target - pose.position;
    let remaining = to_target.norm();
    let psi_step = k.yaw_step();
    let (bearing, delta) = if to_target.x != 0.0 || to_target.y != 0.0 {
        let bearing = to_target.y.atan2(to_target.x);
        (bearing, angle_diff(bearing, pose.yaw))
    } else {
        (pose.yaw, 0.0)
    };
    let turn = delta.abs();
    let yaw = if turn <= psi_step {
        bearing
    } else {
        pose.yaw + delta.signum() * psi_step
    };

    let fraction = if turn < k.yaw_gate_fraction * psi_step {
        1.0
    } else {
        match k.fraction_rule {
            FractionRule::Inverse => (psi_step / turn).min(1.0),
            FractionRule::Direct => (turn / psi_step).min(1.0),
        }
    };
    let distance = (k.max_step() * fraction).min(remaining);
    let position = if remaining > 0.0 {
        if distance >= remaining {
            target
        } else {
            pose.position + to_target * (distance / remaining)
        }
    } else {
        pose.position
    };
    Pose::new(position, yaw)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    pub intrinsics: CameraIntrinsics,
    pub extrinsics: CameraExtrinsics,
    /// Pixel stride used when extracting the cloud.
    pub stride: usize,
    /// Treat directions outside the camera frustum as blocked.
    pub mask_unobserved: bool,
}

impl CameraConfig {
    pub fn standard() -> Self {
        Self {
            intrinsics: CameraIntrinsics::default(),
            extrinsics: CameraExtrinsics::default(),
            stride: 4,
            mask_unobserved: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub kinematics: KinematicParams,
    pub camera: CameraConfig,
    pub planner: PlannerParams,
    pub goal_tolerance_m: f64,
    pub max_steps: usize,
    pub cruise_altitude_m: f64,
    /// Consecutive planner failures that end the episode.
    pub stuck_limit: usize,
    pub distance_mode: DistanceMode,
    /// Planning cycles a sensed point is remembered for; 1 keeps only the
    /// current frame.
    pub point_memory_steps: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            kinematics: KinematicParams::default(),
            camera: CameraConfig::standard(),
            planner: PlannerParams::default(),
            goal_tolerance_m: 0.5,
            max_steps: 3000,
            cruise_altitude_m: 2.5,
            stuck_limit: 10,
            distance_mode: DistanceMode::Spatial,
            point_memory_steps: 10,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.kinematics.validate()?;
        self.camera.intrinsics.validate()?;
        self.camera.extrinsics.validate()?;
        self.planner.validate()?;
        if self.camera.stride == 0 {
            return Err(ConfigError::invalid("camera.stride", "must be >= 1"));
        }
        if !(self.goal_tolerance_m > 0.0) {
            return Err(ConfigError::invalid("goal_tolerance_m", "must be positive"));
        }
        if self.max_steps < 1 {
            return Err(ConfigError::invalid("max_steps", "must be >= 1"));
        }
        if !(self.cruise_altitude_m > 0.0 && self.cruise_altitude_m.is_finite()) {
            return Err(ConfigError::invalid(
                "cruise_altitude_m",
                "must be positive",
            ));
        }
        if self.stuck_limit < 1 {
            return Err(ConfigError::invalid("stuck_limit", "must be >= 1"));
        }
        if self.point_memory_steps < 1 {
            return Err(ConfigError::invalid("point_memory_steps", "must be >= 1"));
        }
        Ok(())
    }

    /// Planner parameters with the camera frustum applied when masking is on.
    pub fn effective_planner(&self) -> PlannerParams {
        let mut p = self.planner;
        if self.camera.mask_unobserved {
            let (h, v) = self.camera.intrinsics.half_fov();
            p.view_cone = Some(ViewCone {
                half_azimuth: h,
                half_elevation: v,
            });
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StepTag {
    Start,
    Planned,
    FailedToPlan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SimOutcome {
    ReachedGoal,
    Timeout,
    PlannerStuck,
    Collision,
}

impl fmt::Display for SimOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SimOutcome::ReachedGoal => "REACHED_GOAL",
            SimOutcome::Timeout => "TIMEOUT",
            SimOutcome::PlannerStuck => "PLANNER_STUCK",
            SimOutcome::Collision => "COLLISION",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub pose: Pose,
    /// `+∞` when the scene has no obstacles.
    pub min_obstacle_distance: f64,
    pub tag: StepTag,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    /// Smallest recorded obstacle distance and the time it occurred.
    pub fn min_distance(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, 0.0), |(best, t), p| {
                if p.min_obstacle_distance < best {
                    (p.min_obstacle_distance, p.t)
                } else {
                    (best, t)
                }
            })
    }

    pub fn path_length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[0].pose.position.distance(w[1].pose.position))
            .sum()
    }

    /// CSV with header `t,x,y,z,yaw,min_dist`, one row per point. Values use
    /// the shortest exact decimal form; infinite distances are `inf`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,y,z,yaw,min_dist")?;
        for p in &self.points {
            writeln!(
                w,
                "{:.3},{},{},{},{},{}",
                p.t,
                p.pose.position.x,
                p.pose.position.y,
                p.pose.position.z,
                p.pose.yaw,
                p.min_obstacle_distance
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub trajectory: Trajectory,
    pub outcome: SimOutcome,
    /// Number of planning cycles executed.
    pub steps: usize,
}

/// Voxel map of recently sensed points, keyed on the planner's voxel grid.
#[derive(Debug, Clone)]
struct PointMemory {
    voxel: f64,
    horizon: usize,
    cells: BTreeMap<(i64, i64, i64), (Vec3, usize, usize)>,
}

impl PointMemory {
    fn new(voxel: f64, horizon: usize) -> Self {
        Self {
            voxel: if voxel > 0.0 { voxel } else { 0.05 },
            horizon,
            cells: BTreeMap::new(),
        }
    }

    fn update(&mut self, cloud: &PointCloud, step: usize) -> PointCloud {
        let v = self.voxel;
        for p in &cloud.points {
            let key = (
                (p.x / v).floor() as i64,
                (p.y / v).floor() as i64,
                (p.z / v).floor() as i64,
            );
            let e = self.cells.entry(key).or_insert((Vec3::ZERO, 0, step));
            if e.2 != step {
                *e = (Vec3::ZERO, 0, step);
            }
            e.0 += *p;
            e.1 += 1;
        }
        let horizon = self.horizon;
        self.cells.retain(|_, e| step - e.2 < horizon);
        PointCloud {
            points: self
                .cells
                .values()
                .map(|(sum, n, _)| *sum * (1.0 / *n as f64))
                .collect(),
        }
    }
}

/// Hook invoked after every planning call; used for debug dumps.
pub trait PlanObserver {
    fn observe(&mut self, step: usize, pose: &Pose, result: &PlanResult);
}

impl PlanObserver for () {
    fn observe(&mut self, _: usize, _: &Pose, _: &PlanResult) {}
}

/// Flies from `start` toward `goal` among `obstacles`.
pub fn simulate(
    goal: Vec3,
    start: Pose,
    obstacles: &[CuboidObstacle],
    cfg: &SimConfig,
) -> Result<SimResult, ConfigError> {
    simulate_observed(goal, start, obstacles, cfg, &mut ())
}

pub fn simulate_observed(
    goal: Vec3,
    start: Pose,
    obstacles: &[CuboidObstacle],
    cfg: &SimConfig,
    observer: &mut dyn PlanObserver,
) -> Result<SimResult, ConfigError> {
    let mut sim = Simulator::new(goal, start, obstacles.to_vec(), cfg)?;
    while sim.step(observer).is_none() {}
    Ok(sim.finish())
}

/// The flight loop as an explicit state machine, one planning cycle per
/// [`Simulator::step`].
#[derive(Debug, Clone)]
pub struct Simulator {
    goal: Vec3,
    obstacles: Vec<CuboidObstacle>,
    cfg: SimConfig,
    planner: PlannerParams,
    memory: PointMemory,
    pose: Pose,
    points: Vec<TrajectoryPoint>,
    prev_target: Option<Vec3>,
    failures: usize,
    steps: usize,
    outcome: Option<SimOutcome>,
}

impl Simulator {
    pub fn new(
        goal: Vec3,
        start: Pose,
        obstacles: Vec<CuboidObstacle>,
        cfg: &SimConfig,
    ) -> Result<Self, ConfigError> {
        cfg.validate()?;
        if !goal.is_finite() || !start.position.is_finite() {
            return Err(ConfigError::invalid(
                "mission",
                "start and goal must be finite",
            ));
        }
        let planner = cfg.effective_planner();
        let d = cfg.distance_mode.min_distance(start.position, &obstacles);
        Ok(Self {
            goal,
            memory: PointMemory::new(planner.voxel_size_m, cfg.point_memory_steps),
            planner,
            pose: start,
            points: vec![TrajectoryPoint {
                t: 0.0,
                pose: start,
                min_obstacle_distance: d,
                tag: StepTag::Start,
            }],
            prev_target: None,
            failures: 0,
            steps: 0,
            outcome: (d <= 0.0).then_some(SimOutcome::Collision),
            obstacles,
            cfg: *cfg,
        })
    }

    pub fn pose(&self) -> &Pose {
        &self.pose
    }

    pub fn points(&self) -> &[TrajectoryPoint] {
        &self.points
    }

    pub fn obstacles(&self) -> &[CuboidObstacle] {
        &self.obstacles
    }

    pub fn outcome(&self) -> Option<SimOutcome> {
        self.outcome
    }

    /// Runs one render/plan/move cycle. Returns the outcome once the
    /// episode has ended; further calls do nothing.
    pub fn step(&mut self, observer: &mut dyn PlanObserver) -> Option<SimOutcome> {
        if self.outcome.is_some() {
            return self.outcome;
        }
        let cfg = &self.cfg;
        if self.pose.position.distance(self.goal) <= cfg.goal_tolerance_m {
            self.outcome = Some(SimOutcome::ReachedGoal);
            return self.outcome;
        }
        if self.steps >= cfg.max_steps {
            self.outcome = Some(SimOutcome::Timeout);
            return self.outcome;
        }
        self.steps += 1;
        let cloud = render_cloud(
            &self.obstacles,
            &self.pose,
            &cfg.camera.intrinsics,
            &cfg.camera.extrinsics,
            cfg.camera.stride,
        );
        let cloud = self.memory.update(&cloud, self.steps);
        let result = plan(
            &cloud,
            &self.pose,
            self.goal,
            self.prev_target,
            &self.planner,
        );
        observer.observe(self.steps, &self.pose, &result);
        let tag = match result.first_node() {
            Some(node) => {
                self.failures = 0;
                self.prev_target = Some(node.position);
                self.pose = kinematic_step(&self.pose, node.position, &cfg.kinematics);
                StepTag::Planned
            }
            None => {
                self.failures += 1;
                StepTag::FailedToPlan
            }
        };
        let d = cfg
            .distance_mode
            .min_distance(self.pose.position, &self.obstacles);
        self.points.push(TrajectoryPoint {
            t: self.steps as f64 * cfg.kinematics.dt,
            pose: self.pose,
            min_obstacle_distance: d,
            tag,
        });
        if d <= 0.0 {
            self.outcome = Some(SimOutcome::Collision);
        } else if self.failures >= cfg.stuck_limit {
            self.outcome = Some(SimOutcome::PlannerStuck);
        } else if self.steps >= cfg.max_steps {
            self.outcome = Some(
                if self.pose.position.distance(self.goal) <= cfg.goal_tolerance_m {
                    SimOutcome::ReachedGoal
                } else {
                    SimOutcome::Timeout
                },
            );
        }
        self.outcome
    }

    /// Ends the episode (as TIMEOUT if it is still running) and returns the
    /// log.
    pub fn finish(self) -> SimResult {
        SimResult {
            outcome: self.outcome.unwrap_or(SimOutcome::Timeout),
            steps: self.steps,
            trajectory: Trajectory {
                points: self.points,
            },
        }
    }
}
