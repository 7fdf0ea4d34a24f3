//! Safety verdicts and the search campaign.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, GenError};
use crate::geom::{Pose, Vec3};
use crate::sim::{simulate_observed, PlanObserver, SimConfig, SimOutcome, SimResult};
use crate::testgen::{Generator, GeneratorConfig, Mission, TestCase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Safe,
    PredictedViolation,
    Invalid,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Safe => "SAFE",
            Verdict::PredictedViolation => "PREDICTED_VIOLATION",
            Verdict::Invalid => "INVALID",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub safety_threshold_m: f64,
    /// Minima below this are treated as near-collisions and discarded.
    pub lower_cutoff_m: f64,
    /// Whether a TIMEOUT run counts as invalid.
    pub require_goal_reached: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            safety_threshold_m: 1.5,
            lower_cutoff_m: 0.25,
            require_goal_reached: false,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.safety_threshold_m > 0.0 && self.safety_threshold_m.is_finite()) {
            return Err(ConfigError::invalid(
                "evaluation.safety_threshold_m",
                "must be positive",
            ));
        }
        if !(self.lower_cutoff_m >= 0.0 && self.lower_cutoff_m < self.safety_threshold_m) {
            return Err(ConfigError::invalid(
                "evaluation.lower_cutoff_m",
                "need 0 <= lower_cutoff_m < safety_threshold_m",
            ));
        }
        Ok(())
    }
}

pub fn classify(outcome: SimOutcome, min_distance: f64, cfg: &EvalConfig) -> Verdict {
    match outcome {
        SimOutcome::Collision | SimOutcome::PlannerStuck => return Verdict::Invalid,
        SimOutcome::Timeout if cfg.require_goal_reached => return Verdict::Invalid,
        _ => {}
    }
    if min_distance < cfg.lower_cutoff_m {
        Verdict::Invalid
    } else if min_distance < cfg.safety_threshold_m {
        Verdict::PredictedViolation
    } else {
        Verdict::Safe
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub seed: u64,
    pub index: u64,
    /// `None` when no obstacle was present (infinite distance).
    pub min_distance: Option<f64>,
    pub min_distance_time: f64,
    pub outcome: SimOutcome,
    pub verdict: Verdict,
    pub steps: usize,
    pub path_length: f64,
}

/// Start pose and goal for flying `leg_start -> leg_end` at cruise altitude.
pub fn flight_endpoints(leg_start: Vec3, leg_end: Vec3, altitude: f64) -> (Pose, Vec3) {
    let s = leg_start.with_altitude(altitude);
    let g = leg_end.with_altitude(altitude);
    let yaw = (g.y - s.y).atan2(g.x - s.x);
    (Pose::new(s, yaw), g)
}

/// Flies the SoI leg of `tc` and classifies the result.
pub fn evaluate_case(
    tc: &TestCase,
    gen: &GeneratorConfig,
    sim: &SimConfig,
    eval: &EvalConfig,
) -> Result<(Evaluation, SimResult), GenError> {
    evaluate_case_observed(tc, gen, sim, eval, &mut ())
}

pub fn evaluate_case_observed(
    tc: &TestCase,
    gen: &GeneratorConfig,
    sim: &SimConfig,
    eval: &EvalConfig,
    observer: &mut dyn PlanObserver,
) -> Result<(Evaluation, SimResult), GenError> {
    let leg = tc.flight_leg(&gen.arena)?;
    let (start, goal) = flight_endpoints(leg.start, leg.end, sim.cruise_altitude_m);
    let result = simulate_observed(goal, start, &tc.obstacles, sim, observer)?;
    let (min, t) = result.trajectory.min_distance();
    let ev = Evaluation {
        seed: tc.seed,
        index: tc.index,
        min_distance: min.is_finite().then_some(min),
        min_distance_time: t,
        outcome: result.outcome,
        verdict: classify(result.outcome, min, eval),
        steps: result.steps,
        path_length: result.trajectory.path_length(),
    };
    Ok((ev, result))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    /// Maximum number of test cases to generate and simulate.
    pub budget: usize,
    /// Stop after this many predicted violations.
    pub target: usize,
    /// Worker threads; results do not depend on this, so it is left out of
    /// serialized snapshots.
    #[serde(skip_serializing)]
    pub workers: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            budget: 100,
            target: 10,
            workers: 1,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.budget < self.target {
            return Err(ConfigError::invalid("campaign.budget", "must be >= target"));
        }
        if self.workers < 1 {
            return Err(ConfigError::invalid("campaign.workers", "must be >= 1"));
        }
        Ok(())
    }
}

/// Everything a run needs; the CLI reads this from TOML.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub generator: GeneratorConfig,
    pub simulation: SimConfig,
    pub evaluation: EvalConfig,
    pub campaign: CampaignConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.generator.validate()?;
        self.simulation.validate()?;
        self.evaluation.validate()?;
        self.campaign.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub case: TestCase,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    /// Every evaluated case, in index order.
    pub evaluations: Vec<Evaluation>,
    /// Predicted violations, ascending by minimum distance.
    pub suite: Vec<SuiteEntry>,
    pub target_reached: bool,
    /// Cases simulated, including any finished by other workers after the
    /// target was reached. Depends on the worker count.
    #[serde(skip)]
    pub simulated: usize,
    #[serde(skip)]
    pub simulated_steps: usize,
}

impl CampaignReport {
    pub fn count(&self, v: Verdict) -> usize {
        self.evaluations.iter().filter(|e| e.verdict == v).count()
    }
}

/// Generates and simulates cases until `target` violations are found or
/// `budget` cases have been evaluated.
///
/// Cases are evaluated in rounds of one case per worker and scanned in index
/// order, so the report is the same for every worker count.
pub fn run_campaign(
    mission: &Mission,
    cfg: &RunConfig,
    mut progress: impl FnMut(&Evaluation),
) -> Result<CampaignReport, GenError> {
    cfg.validate()?;
    let camp = cfg.campaign;
    let mut gen = Generator::new(mission, &cfg.generator)?;
    let pool = WorkerPool::new(camp.workers);

    let mut evaluations = Vec::new();
    let mut suite = Vec::new();
    let mut remaining = camp.budget;
    let mut simulated = 0;
    let mut simulated_steps = 0;
    while remaining > 0 && suite.len() < camp.target {
        let n = remaining.min(camp.workers);
        let cases = (0..n)
            .map(|_| gen.next_case())
            .collect::<Result<Vec<_>, _>>()?;
        remaining -= n;
        let results = pool.map(&cases, |tc| {
            evaluate_case(tc, &cfg.generator, &cfg.simulation, &cfg.evaluation).map(|r| r.0)
        });
        simulated += n;
        simulated_steps += results.iter().flatten().map(|e| e.steps).sum::<usize>();
        for (tc, ev) in cases.into_iter().zip(results) {
            let ev = ev?;
            progress(&ev);
            let hit = ev.verdict == Verdict::PredictedViolation;
            evaluations.push(ev.clone());
            if hit {
                suite.push(SuiteEntry {
                    case: tc,
                    evaluation: ev,
                });
                if suite.len() == camp.target {
                    break;
                }
            }
        }
    }
    suite.sort_by(|a, b| {
        let key = |e: &SuiteEntry| e.evaluation.min_distance.unwrap_or(f64::INFINITY);
        key(a)
            .total_cmp(&key(b))
            .then(a.evaluation.index.cmp(&b.evaluation.index))
    });
    Ok(CampaignReport {
        evaluations,
        target_reached: suite.len() == camp.target,
        suite,
        simulated,
        simulated_steps,
    })
}

#[cfg(feature = "parallel")]
struct WorkerPool(Option<rayon::ThreadPool>);

#[cfg(feature = "parallel")]
impl WorkerPool {
    fn new(workers: usize) -> Self {
        let pool = (workers > 1)
            .then(|| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .ok()
            })
            .flatten();
        Self(pool)
    }

    fn map<T: Sync, R: Send>(&self, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
        use rayon::prelude::*;
        match &self.0 {
            Some(pool) => pool.install(|| items.par_iter().map(f).collect()),
            None => items.iter().map(f).collect(),
        }
    }
}

#[cfg(not(feature = "parallel"))]
struct WorkerPool;

#[cfg(not(feature = "parallel"))]
impl WorkerPool {
    fn new(_: usize) -> Self {
        WorkerPool
    }

    fn map<T, R>(&self, items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
        items.iter().map(f).collect()
    }
}
