//! Local planner in the vector-field-histogram family.
//!
//! Each invocation bins the sensed cloud into a polar occupancy histogram
//! around the query position, grows a best-first lookahead tree through the
//! free directions, and hands back the first node of the cheapest branch.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::geom::{angle_diff, Pose, Vec3};
use crate::render::PointCloud;

/// Angular window outside which directions count as blocked because the
/// camera never observed them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewCone {
    pub half_azimuth: f64,
    pub half_elevation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerParams {
    pub bin_resolution_deg: f64,
    pub tree_depth: usize,
    pub children_per_node: usize,
    pub node_step_m: f64,
    /// Weight on the angle between a candidate and the goal direction.
    pub goal_weight: f64,
    /// Weight on the azimuth change relative to the previous heading.
    pub heading_weight: f64,
    /// Weight on the magnitude of the candidate elevation.
    pub smoothness_weight: f64,
    pub obstacle_inflation_m: f64,
    pub occupancy_threshold: f64,
    /// Points farther than this from the query position are ignored.
    pub sensing_range_m: f64,
    pub elevation_cap_deg: f64,
    /// Voxel edge used to thin the cloud before planning; 0 disables.
    pub voxel_size_m: f64,
    /// Upper bound on node expansions per invocation.
    pub max_expansions: usize,
    pub view_cone: Option<ViewCone>,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            bin_resolution_deg: 6.0,
            tree_depth: 4,
            children_per_node: 8,
            node_step_m: 2.0,
            goal_weight: 10.0,
            heading_weight: 1.0,
            smoothness_weight: 1.0,
            obstacle_inflation_m: 1.0,
            occupancy_threshold: 0.05,
            sensing_range_m: 9.0,
            elevation_cap_deg: 15.0,
            voxel_size_m: 0.25,
            max_expansions: 24,
            view_cone: None,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let res = self.bin_resolution_deg;
        if !(res > 0.0 && res <= 90.0) || ((180.0 / res) - (180.0 / res).round()).abs() > 1e-9 {
            return Err(ConfigError::invalid(
                "planner.bin_resolution_deg",
                "must be positive and divide 180",
            ));
        }
        if self.tree_depth < 1 {
            return Err(ConfigError::invalid("planner.tree_depth", "must be >= 1"));
        }
        if self.children_per_node < 1 {
            return Err(ConfigError::invalid(
                "planner.children_per_node",
                "must be >= 1",
            ));
        }
        if self.max_expansions < 1 {
            return Err(ConfigError::invalid(
                "planner.max_expansions",
                "must be >= 1",
            ));
        }
        if !(self.node_step_m > 0.0 && self.node_step_m.is_finite()) {
            return Err(ConfigError::invalid(
                "planner.node_step_m",
                "must be positive",
            ));
        }
        for (field, w) in [
            ("planner.goal_weight", self.goal_weight),
            ("planner.heading_weight", self.heading_weight),
            ("planner.smoothness_weight", self.smoothness_weight),
            ("planner.obstacle_inflation_m", self.obstacle_inflation_m),
            ("planner.occupancy_threshold", self.occupancy_threshold),
            ("planner.voxel_size_m", self.voxel_size_m),
            ("planner.elevation_cap_deg", self.elevation_cap_deg),
        ] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(ConfigError::invalid(field, "must be finite and >= 0"));
            }
        }
        if !(self.sensing_range_m > 0.0) {
            return Err(ConfigError::invalid(
                "planner.sensing_range_m",
                "must be positive",
            ));
        }
        Ok(())
    }

    fn elevation_cap(&self) -> f64 {
        self.elevation_cap_deg.to_radians()
    }
}

/// A direction as (azimuth, elevation) in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub azimuth: f64,
    pub elevation: f64,
}

impl Direction {
    pub fn new(azimuth: f64, elevation: f64) -> Self {
        Self { azimuth, elevation }
    }

    /// Direction of `v`; `None` for the zero vector.
    pub fn of(v: Vec3) -> Option<Self> {
        let h = v.x.hypot(v.y);
        (h > 0.0 || v.z != 0.0).then(|| Self::new(v.y.atan2(v.x), v.z.atan2(h)))
    }

    pub fn unit(&self) -> Vec3 {
        Vec3::from_spherical(self.azimuth, self.elevation)
    }

    /// Great-circle angle to `other`.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        self.unit().dot(other.unit()).clamp(-1.0, 1.0).acos()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarHistogram {
    pub resolution_deg: f64,
    pub azimuth_bins: usize,
    pub elevation_bins: usize,
    /// Indexed `elevation * azimuth_bins + azimuth`.
    pub weights: Vec<f64>,
    pub origin: Vec3,
}

impl PolarHistogram {
    pub fn empty(resolution_deg: f64, origin: Vec3) -> Self {
        let azimuth_bins = (360.0 / resolution_deg).round() as usize;
        let elevation_bins = (180.0 / resolution_deg).round() as usize;
        Self {
            resolution_deg,
            azimuth_bins,
            elevation_bins,
            weights: vec![0.0; azimuth_bins * elevation_bins],
            origin,
        }
    }

    fn res(&self) -> f64 {
        self.resolution_deg.to_radians()
    }

    pub fn azimuth_index(&self, azimuth: f64) -> usize {
        let i = ((azimuth.to_degrees() + 180.0) / self.resolution_deg).floor();
        (i.max(0.0) as usize).min(self.azimuth_bins - 1)
    }

    pub fn elevation_index(&self, elevation: f64) -> usize {
        let i = ((elevation.to_degrees() + 90.0) / self.resolution_deg).floor();
        (i.max(0.0) as usize).min(self.elevation_bins - 1)
    }

    pub fn bin_of(&self, dir: &Direction) -> (usize, usize) {
        (
            self.azimuth_index(dir.azimuth),
            self.elevation_index(dir.elevation),
        )
    }

    pub fn bin_center(&self, az: usize, el: usize) -> Direction {
        let res = self.res();
        Direction::new(
            -PI + (az as f64 + 0.5) * res,
            -PI / 2.0 + (el as f64 + 0.5) * res,
        )
    }

    pub fn weight(&self, az: usize, el: usize) -> f64 {
        self.weights[el * self.azimuth_bins + az]
    }

    pub fn weight_of(&self, dir: &Direction) -> f64 {
        let (a, e) = self.bin_of(dir);
        self.weight(a, e)
    }

    fn add(&mut self, az: usize, el: usize, w: f64) {
        self.weights[el * self.azimuth_bins + az] += w;
    }
}

/// Bins every point within sensing range by direction from `origin` with
/// weight `1/d²`, adding the same weight to every bin whose centre lies
/// within `atan(inflation / d)` of the point direction.
pub fn build_histogram(cloud: &PointCloud, origin: Vec3, params: &PlannerParams) -> PolarHistogram {
    let units = bin_units(params.bin_resolution_deg);
    build_histogram_band(cloud, origin, params, PI / 2.0, &units)
}

/// Unit vectors of all bin centres, in weight-index order.
fn bin_units(resolution_deg: f64) -> Vec<Vec3> {
    let h = PolarHistogram::empty(resolution_deg, Vec3::ZERO);
    let mut out = Vec::with_capacity(h.weights.len());
    for el in 0..h.elevation_bins {
        for az in 0..h.azimuth_bins {
            out.push(h.bin_center(az, el).unit());
        }
    }
    out
}

/// As [`build_histogram`], but only bins whose elevation range intersects
/// `[-band, band]` are populated; the rest stay zero.
fn build_histogram_band(
    cloud: &PointCloud,
    origin: Vec3,
    params: &PlannerParams,
    band: f64,
    units: &[Vec3],
) -> PolarHistogram {
    let mut hist = PolarHistogram::empty(params.bin_resolution_deg, origin);
    let res = hist.res();
    let n_az = hist.azimuth_bins as i64;
    let range2 = params.sensing_range_m * params.sensing_range_m;
    for p in &cloud.points {
        let d = *p - origin;
        let dist2 = d.dot(d);
        if dist2 == 0.0 || dist2 > range2 {
            continue;
        }
        let dist = dist2.sqrt();
        let w = 1.0 / dist2;
        let Some(dir) = Direction::of(d) else {
            continue;
        };
        let margin = (params.obstacle_inflation_m / dist).atan();
        if dir.elevation - margin > band || dir.elevation + margin < -band {
            continue;
        }
        let (own_az, own_el) = hist.bin_of(&dir);
        if margin <= 0.0 {
            hist.add(own_az, own_el, w);
            continue;
        }
        let unit = d * (1.0 / dist);
        let cos_margin = margin.cos();
        let el_lo = hist.elevation_index(dir.elevation - margin);
        let el_hi = hist.elevation_index(dir.elevation + margin);
        for el in el_lo..=el_hi {
            let centre_el = hist.bin_center(0, el).elevation;
            // Azimuth span needed at this latitude; near the poles sweep all.
            let cos_el = centre_el.cos().min(dir.elevation.cos()).max(1e-9);
            let span = (margin / cos_el + res) / res;
            let (lo, hi) = if span * res >= PI {
                (0, n_az - 1)
            } else {
                (
                    own_az as i64 - span.ceil() as i64,
                    own_az as i64 + span.ceil() as i64,
                )
            };
            for a in lo..=hi {
                let az = a.rem_euclid(n_az) as usize;
                if az == own_az && el == own_el {
                    continue;
                }
                if units[el * hist.azimuth_bins + az].dot(unit) >= cos_margin {
                    hist.add(az, el, w);
                }
            }
        }
        hist.add(own_az, own_el, w);
    }
    hist
}

/// Free bin centres, ordered by azimuth index then elevation index, limited
/// to the elevation cap.
pub fn candidate_directions(hist: &PolarHistogram, params: &PlannerParams) -> Vec<Direction> {
    let cap = params.elevation_cap() + 1e-9;
    let mut out = Vec::new();
    for az in 0..hist.azimuth_bins {
        for el in 0..hist.elevation_bins {
            let c = hist.bin_center(az, el);
            if c.elevation.abs() <= cap && hist.weight(az, el) < params.occupancy_threshold {
                out.push(c);
            }
        }
    }
    out
}

/// `α·∠(node, goal) + β·|Δazimuth(node, prev_heading)| + γ·|elevation|`.
pub fn node_cost(
    node_dir: &Direction,
    goal_dir: &Direction,
    prev_heading: f64,
    params: &PlannerParams,
) -> f64 {
    params.goal_weight * node_dir.angle_to(goal_dir)
        + params.heading_weight * angle_diff(node_dir.azimuth, prev_heading).abs()
        + params.smoothness_weight * node_dir.elevation.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LookaheadNode {
    pub position: Vec3,
    pub yaw: f64,
    pub depth: usize,
    pub accumulated_cost: f64,
    /// Index of the parent in [`PlanResult::tree`].
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    /// Every generated node; index 0 is the root.
    pub tree: Vec<LookaheadNode>,
    /// Index of the depth-1 node to fly toward; `None` when stuck.
    pub selected: Option<usize>,
}

impl PlanResult {
    pub fn first_node(&self) -> Option<&LookaheadNode> {
        self.selected.map(|i| &self.tree[i])
    }

    /// JSON lines, one node per line, root first, tagged with `step`.
    pub fn tree_jsonl(&self, step: usize) -> String {
        let mut out = String::new();
        for (i, n) in self.tree.iter().enumerate() {
            let line = serde_json::json!({
                "step": step,
                "index": i,
                "selected": self.selected == Some(i),
                "position": [n.position.x, n.position.y, n.position.z],
                "yaw": n.yaw,
                "cost": n.accumulated_cost,
                "parent": n.parent,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    dir: Direction,
    bin: (usize, usize),
    cost: f64,
}

#[derive(Debug, Clone, Copy)]
struct Frontier {
    /// Accumulated cost plus the goal-angle heuristic charged once per
    /// remaining level, so deeper branches are not starved by shallow ones.
    priority: f64,
    seq: usize,
    node: usize,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier {
    // Reversed so the std max-heap pops the smallest total first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .priority
            .total_cmp(&self.priority)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Replaces each occupied voxel by the centroid of its points, in voxel-key
/// order.
pub fn voxel_downsample(cloud: &PointCloud, voxel: f64) -> PointCloud {
    if voxel <= 0.0 {
        return cloud.clone();
    }
    let mut cells: BTreeMap<(i64, i64, i64), (Vec3, usize)> = BTreeMap::new();
    for p in &cloud.points {
        let key = (
            (p.x / voxel).floor() as i64,
            (p.y / voxel).floor() as i64,
            (p.z / voxel).floor() as i64,
        );
        let e = cells.entry(key).or_insert((Vec3::ZERO, 0));
        e.0 += *p;
        e.1 += 1;
    }
    PointCloud {
        points: cells
            .into_values()
            .map(|(sum, n)| sum * (1.0 / n as f64))
            .collect(),
    }
}

struct Planner<'a> {
    cloud: PointCloud,
    goal: Vec3,
    params: &'a PlannerParams,
    /// Bins outside the view cone, in histogram index order.
    unobserved: Vec<usize>,
    units: Vec<Vec3>,
}

impl<'a> Planner<'a> {
    fn new(cloud: &PointCloud, pose: &Pose, goal: Vec3, params: &'a PlannerParams) -> Self {
        let mut unobserved = Vec::new();
        if let Some(cone) = params.view_cone {
            let hist = PolarHistogram::empty(params.bin_resolution_deg, Vec3::ZERO);
            for el in 0..hist.elevation_bins {
                for az in 0..hist.azimuth_bins {
                    let c = hist.bin_center(az, el);
                    if angle_diff(c.azimuth, pose.yaw).abs() > cone.half_azimuth
                        || c.elevation.abs() > cone.half_elevation
                    {
                        unobserved.push(el * hist.azimuth_bins + az);
                    }
                }
            }
        }
        Self {
            cloud: voxel_downsample(cloud, params.voxel_size_m),
            goal,
            params,
            unobserved,
            units: bin_units(params.bin_resolution_deg),
        }
    }

    fn histogram(&self, origin: Vec3) -> PolarHistogram {
        // Only bins up to the edge of the capped candidate rows matter here.
        let band = self.params.elevation_cap() + 0.5 * self.params.bin_resolution_deg.to_radians();
        let mut hist = build_histogram_band(&self.cloud, origin, self.params, band, &self.units);
        for &i in &self.unobserved {
            hist.weights[i] = f64::INFINITY;
        }
        hist
    }

    /// Lowest-cost free directions from `origin`, best first. The exact goal
    /// direction (elevation clamped to the cap) replaces its bin centre when
    /// that bin is free.
    fn candidates(&self, hist: &PolarHistogram, prev_heading: f64) -> Vec<Candidate> {
        let origin = hist.origin;
        let Some(goal_dir) = Direction::of(self.goal - origin) else {
            return Vec::new();
        };
        let cap = self.params.elevation_cap();
        let direct = Direction::new(goal_dir.azimuth, goal_dir.elevation.clamp(-cap, cap));
        let direct_bin = hist.bin_of(&direct);
        let direct_free = self.direction_free(hist, &direct);

        let mut out: Vec<Candidate> = candidate_directions(hist, self.params)
            .into_iter()
            .filter_map(|c| {
                let bin = hist.bin_of(&c);
                let dir = if bin != direct_bin {
                    c
                } else if direct_free {
                    direct
                } else {
                    return None;
                };
                Some(Candidate {
                    dir,
                    bin,
                    cost: node_cost(&dir, &goal_dir, prev_heading, self.params),
                })
            })
            .collect();
        if direct_free && !out.iter().any(|c| c.bin == direct_bin) {
            out.push(Candidate {
                dir: direct,
                bin: direct_bin,
                cost: node_cost(&direct, &goal_dir, prev_heading, self.params),
            });
        }
        out.sort_by(|a, b| a.cost.total_cmp(&b.cost).then(a.bin.cmp(&b.bin)));
        out.truncate(self.params.children_per_node);
        out
    }

    /// Occupancy test for an exact direction rather than a bin centre: the
    /// summed weight of the points whose inflated cone contains `dir`.
    fn direction_free(&self, hist: &PolarHistogram, dir: &Direction) -> bool {
        let bin_weight = hist.weight_of(dir);
        let inflation = self.params.obstacle_inflation_m;
        if !bin_weight.is_finite() || inflation <= 0.0 {
            return bin_weight < self.params.occupancy_threshold;
        }
        let unit = dir.unit();
        let range2 = self.params.sensing_range_m * self.params.sensing_range_m;
        let mut w = 0.0;
        for p in &self.cloud.points {
            let d = *p - hist.origin;
            let dist2 = d.dot(d);
            if dist2 == 0.0 || dist2 > range2 {
                continue;
            }
            let dist = dist2.sqrt();
            let cos = unit.dot(d) / dist;
            if cos >= (inflation / dist).atan().cos() {
                w += 1.0 / dist2;
            }
        }
        w < self.params.occupancy_threshold
    }

    fn heuristic(&self, position: Vec3, dir: &Direction) -> f64 {
        match Direction::of(self.goal - position) {
            Some(g) => self.params.goal_weight * dir.angle_to(&g),
            None => 0.0,
        }
    }
}

/// Grows the lookahead tree from `pose` toward `goal` and selects the first
/// node of the lowest-total-cost branch.
///
/// `prev_target` is the previously commanded node; the heading term at the
/// root is measured against the bearing to it, or the current yaw when absent.
pub fn plan(
    cloud: &PointCloud,
    pose: &Pose,
    goal: Vec3,
    prev_target: Option<Vec3>,
    params: &PlannerParams,
) -> PlanResult {
    let planner = Planner::new(cloud, pose, goal, params);
    let root = LookaheadNode {
        position: pose.position,
        yaw: pose.yaw,
        depth: 0,
        accumulated_cost: 0.0,
        parent: None,
    };
    let mut tree = vec![root];
    let root_hist = planner.histogram(pose.position);

    let to_goal = goal - pose.position;
    if let Some(goal_dir) = Direction::of(to_goal) {
        if to_goal.norm() <= params.node_step_m && planner.direction_free(&root_hist, &goal_dir) {
            tree.push(LookaheadNode {
                position: goal,
                yaw: goal_dir.azimuth,
                depth: 1,
                accumulated_cost: 0.0,
                parent: Some(0),
            });
            return PlanResult {
                tree,
                selected: Some(1),
            };
        }
    }

    let root_heading = prev_target
        .and_then(|t| {
            let d = t - pose.position;
            (d.x != 0.0 || d.y != 0.0).then(|| d.y.atan2(d.x))
        })
        .unwrap_or(pose.yaw);

    let mut heap = BinaryHeap::new();
    let mut totals: Vec<f64> = vec![f64::INFINITY];
    let mut terminal: Vec<bool> = vec![false];
    let mut seq = 0usize;
    let mut expansions = 0usize;
    let mut best_leaf: Option<usize> = None;

    let mut expand = |idx: usize,
                      hist: &PolarHistogram,
                      tree: &mut Vec<LookaheadNode>,
                      heap: &mut BinaryHeap<Frontier>,
                      totals: &mut Vec<f64>,
                      terminal: &mut Vec<bool>| {
        let parent = tree[idx];
        let heading = if idx == 0 { root_heading } else { parent.yaw };
        for c in planner.candidates(hist, heading) {
            let position = parent.position + c.dir.unit() * params.node_step_m;
            let accumulated_cost = parent.accumulated_cost + c.cost;
            let heuristic = planner.heuristic(position, &c.dir);
            let depth = parent.depth + 1;
            let remaining = params.tree_depth.saturating_sub(depth).max(1) as f64;
            tree.push(LookaheadNode {
                position,
                yaw: c.dir.azimuth,
                depth,
                accumulated_cost,
                parent: Some(idx),
            });
            totals.push(accumulated_cost + heuristic);
            terminal.push(position.distance(goal) <= params.node_step_m);
            heap.push(Frontier {
                priority: accumulated_cost + remaining * heuristic,
                seq,
                node: tree.len() - 1,
            });
            seq += 1;
        }
    };

    expand(
        0,
        &root_hist,
        &mut tree,
        &mut heap,
        &mut totals,
        &mut terminal,
    );
    expansions += 1;
    if tree.len() == 1 {
        return PlanResult {
            tree,
            selected: None,
        };
    }

    while let Some(top) = heap.pop() {
        let node = tree[top.node];
        if node.depth >= params.tree_depth || terminal[top.node] {
            best_leaf = Some(top.node);
            break;
        }
        if expansions >= params.max_expansions {
            break;
        }
        let hist = planner.histogram(node.position);
        expand(
            top.node,
            &hist,
            &mut tree,
            &mut heap,
            &mut totals,
            &mut terminal,
        );
        expansions += 1;
    }

    // Out of budget (or every branch dead-ended): take the deepest,
    // then cheapest, node generated so far.
    let leaf = best_leaf.unwrap_or_else(|| {
        (1..tree.len())
            .min_by(|&a, &b| {
                tree[b]
                    .depth
                    .cmp(&tree[a].depth)
                    .then(totals[a].total_cmp(&totals[b]))
                    .then(a.cmp(&b))
            })
            .expect("root has children")
    });
    let mut first = leaf;
    while let Some(p) = tree[first].parent {
        if p == 0 {
            break;
        }
        first = p;
    }
    PlanResult {
        tree,
        selected: Some(first),
    }
}
