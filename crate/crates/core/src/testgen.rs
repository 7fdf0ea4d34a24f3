//! Pseudo-random two-obstacle scenario generator.
//!
//! Scenarios are built in a canonical frame where the segment of interest
//! (SoI) runs bottom-to-top and leans right. The first obstacle crosses the
//! SoI at an obtuse angle, one third of its long axis (part A) on the left
//! and two thirds (part B) on the right. The second obstacle is perpendicular
//! to the first, 1.75 times as long, and sits beyond the part-A end so the
//! UAV has to squeeze past the first obstacle when it swings back toward the
//! goal. The result is mapped back to the mission frame.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, GenError};
use crate::geom::{
    base_gap, contains, normalize_angle, ArenaRect, CuboidObstacle, FlightSegment, Vec2, Vec3,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mission {
    pub start: Vec3,
    pub waypoints: Vec<Vec3>,
    pub landing: Vec3,
}

impl Mission {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.waypoints.is_empty() {
            return Err(GenError::InvalidMission(
                "at least one waypoint is required".into(),
            ));
        }
        let pts = self.points();
        if pts.iter().any(|p| !p.is_finite()) {
            return Err(GenError::InvalidMission(
                "coordinates must be finite".into(),
            ));
        }
        if pts.windows(2).any(|w| w[0] == w[1]) {
            return Err(GenError::InvalidMission(
                "consecutive points must differ".into(),
            ));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<Vec3> {
        let mut v = Vec::with_capacity(self.waypoints.len() + 2);
        v.push(self.start);
        v.extend_from_slice(&self.waypoints);
        v.push(self.landing);
        v
    }

    /// Consecutive point pairs, start to landing.
    pub fn legs(&self) -> Vec<FlightSegment> {
        self.points()
            .windows(2)
            .map(|w| FlightSegment {
                start: w[0],
                end: w[1],
            })
            .collect()
    }
}

/// The segment of interest: the part of mission leg `leg` between the
/// arena's bottom and top borders, in travel order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Soi {
    pub segment: FlightSegment,
    pub leg: usize,
}

/// Picks the mission leg that crosses both the bottom and top arena borders
/// (within the arena's x-range) whose clipped midpoint is nearest the
/// arena's vertical middle line. Ties go to the earlier leg.
pub fn find_soi(mission: &Mission, arena: &ArenaRect) -> Result<Soi, GenError> {
    arena.validate()?;
    let mid_x = arena.center().x;
    let mut best: Option<(f64, Soi)> = None;
    for (i, leg) in mission.legs().iter().enumerate() {
        let Some(segment) = clip_to_band(leg, arena) else {
            continue;
        };
        let score = (segment.midpoint().x - mid_x).abs();
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, Soi { segment, leg: i }));
        }
    }
    best.map(|(_, s)| s).ok_or(GenError::NoSoi {
        y_min: arena.y_min,
        y_max: arena.y_max,
    })
}

fn clip_to_band(leg: &FlightSegment, arena: &ArenaRect) -> Option<FlightSegment> {
    let (a, b) = (leg.start, leg.end);
    let lo = a.y.min(b.y);
    let hi = a.y.max(b.y);
    if !(lo <= arena.y_min && hi >= arena.y_max) || a.y == b.y {
        return None;
    }
    let at = |y: f64| {
        let t = (y - a.y) / (b.y - a.y);
        a + (b - a) * t
    };
    let (p, q) = if b.y > a.y {
        (at(arena.y_min), at(arena.y_max))
    } else {
        (at(arena.y_max), at(arena.y_min))
    };
    let inside = |v: Vec3| v.x >= arena.x_min && v.x <= arena.x_max;
    (inside(p) && inside(q)).then_some(FlightSegment { start: p, end: q })
}

/// Composition of reflections about the arena's centre lines. Each
/// reflection is an involution, so a symmetry is its own inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Symmetry {
    /// Reflect about the vertical centre line (`x ↦ 2cx − x`).
    pub mirror_x: bool,
    /// Reflect about the horizontal centre line (`y ↦ 2cy − y`).
    pub mirror_y: bool,
}

impl Symmetry {
    pub fn is_identity(&self) -> bool {
        !self.mirror_x && !self.mirror_y
    }

    pub fn inverse(&self) -> Symmetry {
        *self
    }

    pub fn apply_point(&self, arena: &ArenaRect, p: Vec3) -> Vec3 {
        let c = arena.center();
        Vec3::new(
            if self.mirror_x { 2.0 * c.x - p.x } else { p.x },
            if self.mirror_y { 2.0 * c.y - p.y } else { p.y },
            p.z,
        )
    }

    pub fn apply_segment(&self, arena: &ArenaRect, s: &FlightSegment) -> FlightSegment {
        FlightSegment {
            start: self.apply_point(arena, s.start),
            end: self.apply_point(arena, s.end),
        }
    }

    pub fn apply_obstacle(&self, arena: &ArenaRect, o: &CuboidObstacle) -> CuboidObstacle {
        let c = self.apply_point(arena, o.center().with_z(0.0));
        let mut r = o.rotation;
        if self.mirror_x {
            r = PI - r;
        }
        if self.mirror_y {
            r = -r;
        }
        CuboidObstacle {
            center_x: c.x,
            center_y: c.y,
            rotation: normalize_angle(r),
            ..*o
        }
    }
}

/// Maps the SoI to the canonical frame: travelling toward `+y` with a
/// non-negative x-component.
pub fn canonicalize(soi: &FlightSegment, arena: &ArenaRect) -> (Symmetry, FlightSegment) {
    let d = soi.direction_2d();
    let sym = Symmetry {
        mirror_x: d.x < 0.0,
        mirror_y: d.y < 0.0,
    };
    (sym, sym.apply_segment(arena, soi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub arena: ArenaRect,
    pub diagonal_range: [f64; 2],
    pub obstacle_width: f64,
    pub obstacle_height: f64,
    /// Obtuse angle between the SoI travel direction and the part-B axis,
    /// degrees.
    pub intersection_angle_range_deg: [f64; 2],
    pub second_obstacle_gap_range: [f64; 2],
    pub length_ratio: f64,
    pub rng_seed: u64,
    /// Draws allowed per first obstacle before giving up.
    pub rejection_budget: usize,
    /// First/second obstacle pairs tried per test case.
    pub placement_attempts: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            arena: ArenaRect::default(),
            diagonal_range: [6.0, 18.0],
            obstacle_width: 2.0,
            obstacle_height: 20.0,
            intersection_angle_range_deg: [95.0, 160.0],
            second_obstacle_gap_range: [3.0, 8.0],
            length_ratio: 1.75,
            rng_seed: 0,
            rejection_budget: 1000,
            placement_attempts: 100,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.arena
            .validate()
            .map_err(|e| ConfigError::invalid("generator.arena", e.to_string()))?;
        let [d_min, d_max] = self.diagonal_range;
        let w = self.obstacle_width;
        if !(w > 0.0 && w.is_finite()) {
            return Err(ConfigError::invalid(
                "generator.obstacle_width",
                "must be positive",
            ));
        }
        if !(self.obstacle_height > 0.0 && self.obstacle_height.is_finite()) {
            return Err(ConfigError::invalid(
                "generator.obstacle_height",
                "must be positive",
            ));
        }
        // The long side must be at least the short side: d >= w·√2 > w.
        if !(d_min >= w * 2f64.sqrt() && d_max >= d_min && d_max.is_finite()) {
            return Err(ConfigError::invalid(
                "generator.diagonal_range",
                format!("need {} <= d_min <= d_max", w * 2f64.sqrt()),
            ));
        }
        let [a_min, a_max] = self.intersection_angle_range_deg;
        if !(a_min > 90.0 && a_max < 180.0 && a_min <= a_max) {
            return Err(ConfigError::invalid(
                "generator.intersection_angle_range_deg",
                "must be an obtuse sub-interval of (90, 180)",
            ));
        }
        let [g_min, g_max] = self.second_obstacle_gap_range;
        if !(g_min > 0.0 && g_max >= g_min && g_max.is_finite()) {
            return Err(ConfigError::invalid(
                "generator.second_obstacle_gap_range",
                "need 0 < g_min <= g_max",
            ));
        }
        if !(self.length_ratio >= 1.0 && self.length_ratio.is_finite()) {
            return Err(ConfigError::invalid(
                "generator.length_ratio",
                "must be >= 1",
            ));
        }
        if self.rejection_budget == 0 || self.placement_attempts == 0 {
            return Err(ConfigError::invalid(
                "generator.rejection_budget/placement_attempts",
                "must be >= 1",
            ));
        }
        Ok(())
    }
}

/// One random draw for the first obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstDraw {
    pub diagonal: f64,
    /// Obtuse angle between SoI direction and part-B axis, radians.
    pub angle: f64,
    /// y-coordinate of the point where the SoI splits the long axis.
    pub y: f64,
}

/// Why a draw was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    /// Diagonal too short for `l >= w`.
    Length,
    /// `d/3` or `2d/3` does not fit between the SoI and the side borders.
    Horizontal,
    /// `y ± d/2` leaves the arena.
    Vertical,
    /// The SoI/part-B angle is not obtuse.
    NotObtuse,
    /// The diagonal circle about the centre leaves the arena, so some
    /// rotation of the obstacle would not be contained.
    RotationEnvelope,
}

/// An accepted first obstacle with the quantities it was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstObstacle {
    pub obstacle: CuboidObstacle,
    pub draw: FirstDraw,
    /// Where the SoI crosses the long axis.
    pub split_point: Vec2,
    /// Unit vector along the long axis toward part B.
    pub axis_b: Vec2,
}

impl FirstObstacle {
    /// Midpoint of the part-A end face.
    pub fn end_a(&self) -> Vec2 {
        self.obstacle.center() - self.axis_b * (0.5 * self.obstacle.length)
    }
}

fn soi_x_at(soi: &FlightSegment, y: f64) -> f64 {
    let (a, b) = (soi.start, soi.end);
    a.x + (b.x - a.x) * (y - a.y) / (b.y - a.y)
}

/// Applies the acceptance rules to a draw for a canonical SoI.
pub fn check_first_draw(
    draw: FirstDraw,
    soi: &FlightSegment,
    arena: &ArenaRect,
    cfg: &GeneratorConfig,
) -> Result<FirstObstacle, Rejection> {
    let w = cfg.obstacle_width;
    let d = draw.diagonal;
    if !(d * d - w * w >= w * w) {
        return Err(Rejection::Length);
    }
    let l = (d * d - w * w).sqrt();

    let left = soi.start.x.min(soi.end.x) - arena.x_min;
    let right = arena.x_max - soi.start.x.max(soi.end.x);
    if !(d / 3.0 < left && 2.0 * d / 3.0 < right) {
        return Err(Rejection::Horizontal);
    }
    if !(draw.y + d / 2.0 < arena.y_max && draw.y - d / 2.0 > arena.y_min) {
        return Err(Rejection::Vertical);
    }

    let dir = soi.direction_2d();
    let dir = dir * (1.0 / dir.norm());
    // Turning clockwise puts part B on the right of the travel direction.
    let axis_b = Vec2::from_angle(dir.angle() - draw.angle);
    let cos = dir.dot(axis_b);
    if !(cos < 0.0 && cos > -1.0) {
        return Err(Rejection::NotObtuse);
    }

    let split_point = Vec2::new(soi_x_at(soi, draw.y), draw.y);
    let center = split_point + axis_b * (l / 6.0);
    let r = d / 2.0;
    if !(center.x - r > arena.x_min
        && center.x + r < arena.x_max
        && center.y - r > arena.y_min
        && center.y + r < arena.y_max)
    {
        return Err(Rejection::RotationEnvelope);
    }

    let obstacle = CuboidObstacle::new(center, l, w, cfg.obstacle_height, axis_b.angle())
        .map_err(|_| Rejection::Length)?;
    Ok(FirstObstacle {
        obstacle,
        draw,
        split_point,
        axis_b,
    })
}

/// Rejection-samples the first obstacle for a canonical SoI.
pub fn sample_first_obstacle<R: Rng>(
    soi: &FlightSegment,
    arena: &ArenaRect,
    cfg: &GeneratorConfig,
    rng: &mut R,
) -> Result<FirstObstacle, GenError> {
    let [d_min, d_max] = cfg.diagonal_range;
    let [a_min, a_max] = cfg.intersection_angle_range_deg;
    let y_lo = soi.start.y.min(soi.end.y);
    let y_hi = soi.start.y.max(soi.end.y);
    for _ in 0..cfg.rejection_budget {
        let draw = FirstDraw {
            diagonal: uniform(rng, d_min, d_max),
            angle: uniform(rng, a_min, a_max).to_radians(),
            y: uniform(rng, y_lo, y_hi),
        };
        if let Ok(first) = check_first_draw(draw, soi, arena, cfg) {
            return Ok(first);
        }
    }
    Err(GenError::SamplingExhausted(cfg.rejection_budget))
}

fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondObstacle {
    pub obstacle: CuboidObstacle,
    /// Gap drawn from the configured range.
    pub target_gap: f64,
    /// Whether the centre had to be pushed back inside the arena.
    pub clamped: bool,
}

/// Places the second obstacle perpendicular to the first, beyond its part-A
/// end along the SoI travel direction, at a drawn gap from it.
///
/// Fails when the obstacle cannot be pushed inside the arena without
/// ending up closer to the first obstacle than the minimum gap.
pub fn place_second_obstacle<R: Rng>(
    first: &FirstObstacle,
    soi: &FlightSegment,
    arena: &ArenaRect,
    cfg: &GeneratorConfig,
    rng: &mut R,
) -> Result<SecondObstacle, GenError> {
    let [g_min, g_max] = cfg.second_obstacle_gap_range;
    let gap = uniform(rng, g_min, g_max);
    let o1 = &first.obstacle;
    let template = CuboidObstacle::new(
        first.end_a(),
        cfg.length_ratio * o1.length,
        cfg.obstacle_width,
        cfg.obstacle_height,
        o1.rotation + PI / 2.0,
    )?;
    let dir = soi.direction_2d();
    let dir = dir * (1.0 / dir.norm());
    let at = |s: f64| {
        let c = first.end_a() + dir * s;
        CuboidObstacle {
            center_x: c.x,
            center_y: c.y,
            ..template
        }
    };

    // The gap is convex in the shift and zero at s = 0, so it grows
    // monotonically from there: bracket, then bisect.
    let mut hi = o1.diagonal() + template.diagonal() + gap;
    while base_gap(o1, &at(hi)) < gap {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if base_gap(o1, &at(mid)) < gap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let placed = at(hi);

    let clamped_obstacle = clamp_into(arena, &placed).ok_or(GenError::PlacementFailed)?;
    let clamped = clamped_obstacle != placed;
    if clamped && base_gap(o1, &clamped_obstacle) < g_min {
        return Err(GenError::PlacementFailed);
    }
    Ok(SecondObstacle {
        obstacle: clamped_obstacle,
        target_gap: gap,
        clamped,
    })
}

/// Translates `obs` by the smallest amount that brings its base inside the
/// arena; `None` when it does not fit in some direction.
fn clamp_into(arena: &ArenaRect, obs: &CuboidObstacle) -> Option<CuboidObstacle> {
    if contains(arena, obs) {
        return Some(*obs);
    }
    let v = crate::geom::base_vertices(obs);
    let (mut min_x, mut max_x, mut min_y, mut max_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in v {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    // Stay a hair inside so rounding cannot leave a vertex on the outside.
    const EPS: f64 = 1e-9;
    if max_x - min_x > arena.x_max - arena.x_min - 2.0 * EPS
        || max_y - min_y > arena.y_max - arena.y_min - 2.0 * EPS
    {
        return None;
    }
    let shift = |lo: f64, hi: f64, a_lo: f64, a_hi: f64| {
        if lo < a_lo {
            a_lo - lo + EPS
        } else if hi > a_hi {
            a_hi - hi - EPS
        } else {
            0.0
        }
    };
    let dx = shift(min_x, max_x, arena.x_min, arena.x_max);
    let dy = shift(min_y, max_y, arena.y_min, arena.y_max);
    let out = CuboidObstacle {
        center_x: obs.center_x + dx,
        center_y: obs.center_y + dy,
        ..*obs
    };
    contains(arena, &out).then_some(out)
}

/// A generated scenario. Serializes to the hand-off JSON format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestCase {
    pub mission: Mission,
    pub obstacles: Vec<CuboidObstacle>,
    pub soi: FlightSegment,
    pub seed: u64,
    pub index: u64,
    #[serde(default)]
    pub transform: Symmetry,
}

impl TestCase {
    /// The mission leg the SoI was cut from; the simulator flies this leg.
    pub fn flight_leg(&self, arena: &ArenaRect) -> Result<FlightSegment, GenError> {
        let soi = find_soi(&self.mission, arena)?;
        Ok(self.mission.legs()[soi.leg])
    }

    /// Checks any simulatable case must pass: a valid mission and valid
    /// obstacle shapes, in any number.
    pub fn validate_structure(&self) -> Result<(), GenError> {
        self.mission.validate()?;
        for o in &self.obstacles {
            o.validate()?;
        }
        Ok(())
    }

    /// Full checks for generated cases: two contained, non-overlapping
    /// obstacles with no mission point inside either.
    pub fn validate(&self, arena: &ArenaRect) -> Result<(), GenError> {
        self.validate_structure()?;
        if self.obstacles.len() != 2 {
            return Err(GenError::InvalidMission(format!(
                "expected exactly 2 obstacles, found {}",
                self.obstacles.len()
            )));
        }
        for o in &self.obstacles {
            if !contains(arena, o) {
                return Err(GenError::InvalidMission(
                    "obstacle is not contained in the arena".into(),
                ));
            }
        }
        if base_gap(&self.obstacles[0], &self.obstacles[1]) <= 0.0 {
            return Err(GenError::InvalidMission("obstacles overlap".into()));
        }
        for p in self.mission.points() {
            if self.obstacles.iter().any(|o| inside_base(o, p.xy())) {
                return Err(GenError::InvalidMission(
                    "a mission point lies inside an obstacle".into(),
                ));
            }
        }
        Ok(())
    }
}

fn inside_base(o: &CuboidObstacle, p: Vec2) -> bool {
    let l = o.to_local(p);
    let h = o.half_extents();
    l.x.abs() <= h.x && l.y.abs() <= h.y
}

/// Deterministic stream of test cases for one mission.
#[derive(Debug, Clone)]
pub struct Generator {
    mission: Mission,
    cfg: GeneratorConfig,
    soi: Soi,
    symmetry: Symmetry,
    canonical_soi: FlightSegment,
    rng: ChaCha8Rng,
    next_index: u64,
}

impl Generator {
    pub fn new(mission: &Mission, cfg: &GeneratorConfig) -> Result<Self, GenError> {
        cfg.validate()?;
        mission.validate()?;
        let soi = find_soi(mission, &cfg.arena)?;
        let (symmetry, canonical_soi) = canonicalize(&soi.segment, &cfg.arena);
        Ok(Self {
            mission: mission.clone(),
            cfg: cfg.clone(),
            soi,
            symmetry,
            canonical_soi,
            rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
            next_index: 0,
        })
    }

    pub fn soi(&self) -> &Soi {
        &self.soi
    }

    pub fn next_case(&mut self) -> Result<TestCase, GenError> {
        let arena = self.cfg.arena;
        let mut last_err = GenError::PlacementFailed;
        for _ in 0..self.cfg.placement_attempts {
            let first =
                sample_first_obstacle(&self.canonical_soi, &arena, &self.cfg, &mut self.rng)?;
            let second = match place_second_obstacle(
                &first,
                &self.canonical_soi,
                &arena,
                &self.cfg,
                &mut self.rng,
            ) {
                Ok(s) => s,
                Err(e) => {
                    last_err = e;
                    continue;
                }
            };
            let obstacles: Vec<CuboidObstacle> = [first.obstacle, second.obstacle]
                .iter()
                .map(|o| self.symmetry.inverse().apply_obstacle(&arena, o))
                .collect();
            let tc = TestCase {
                mission: self.mission.clone(),
                obstacles,
                soi: self.soi.segment,
                seed: self.cfg.rng_seed,
                index: self.next_index,
                transform: self.symmetry,
            };
            if tc.validate(&arena).is_err() {
                continue;
            }
            self.next_index += 1;
            return Ok(tc);
        }
        Err(last_err)
    }
}

impl Iterator for Generator {
    type Item = Result<TestCase, GenError>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.next_case())
    }
}

/// The first `count` test cases of the stream for `cfg.rng_seed`.
pub fn generate(
    mission: &Mission,
    cfg: &GeneratorConfig,
    count: usize,
) -> Result<Vec<TestCase>, GenError> {
    let gen = Generator::new(mission, cfg)?;
    gen.take(count).collect()
}

/// Straight south-to-north mission through the middle of the default arena.
pub fn default_mission() -> Mission {
    Mission {
        start: Vec3::new(0.0, -22.0, 0.0),
        waypoints: vec![Vec3::new(0.0, 22.0, 2.5)],
        landing: Vec3::new(0.0, 22.0, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vertical_soi() -> FlightSegment {
        FlightSegment::new(Vec3::new(0.0, -20.0, 2.5), Vec3::new(0.0, 20.0, 2.5)).unwrap()
    }

    #[test]
    fn soi_single_leg_is_clipped() {
        let m = Mission {
            start: Vec3::new(0.0, -30.0, 2.5),
            waypoints: vec![Vec3::new(0.0, 30.0, 2.5)],
            landing: Vec3::new(0.0, 30.0, 0.0),
        };
        let soi = find_soi(&m, &ArenaRect::default()).unwrap();
        assert_eq!(soi.leg, 0);
        assert_eq!(soi.segment.start, Vec3::new(0.0, -20.0, 2.5));
        assert_eq!(soi.segment.end, Vec3::new(0.0, 20.0, 2.5));
    }

    #[test]
    fn soi_prefers_leg_nearest_middle() {
        let m = Mission {
            start: Vec3::new(-15.0, -30.0, 2.5),
            waypoints: vec![Vec3::new(-15.0, 30.0, 2.5), Vec3::new(3.0, 30.0, 2.5)],
            landing: Vec3::new(3.0, -30.0, 2.5),
        };
        let soi = find_soi(&m, &ArenaRect::default()).unwrap();
        assert_eq!(soi.leg, 2);
        assert_eq!(soi.segment.start.x, 3.0);
        // Travels top to bottom like the leg itself.
        assert_eq!(soi.segment.start.y, 20.0);
    }

    #[test]
    fn soi_missing() {
        let m = Mission {
            start: Vec3::new(-40.0, -30.0, 2.5),
            waypoints: vec![Vec3::new(-40.0, 30.0, 2.5)],
            landing: Vec3::new(-40.0, 30.0, 0.0),
        };
        let err = find_soi(&m, &ArenaRect::default()).unwrap_err();
        assert!(matches!(err, GenError::NoSoi { .. }));
        let msg = err.to_string();
        assert!(msg.contains("top") && msg.contains("bottom"));
    }

    #[test]
    fn canonicalize_cases() {
        let arena = ArenaRect::default();
        let (sym, c) = canonicalize(&vertical_soi(), &arena);
        assert!(sym.is_identity());
        assert_eq!(c, vertical_soi());

        let (sym, c) = canonicalize(&vertical_soi().reversed(), &arena);
        assert!(sym.mirror_y && !sym.mirror_x);
        assert!(c.direction_2d().y > 0.0);

        let slanted =
            FlightSegment::new(Vec3::new(4.0, -20.0, 2.5), Vec3::new(-2.0, 20.0, 2.5)).unwrap();
        let (sym, c) = canonicalize(&slanted, &arena);
        assert!(sym.mirror_x && !sym.mirror_y);
        assert!(c.direction_2d().x > 0.0);
        assert_eq!(sym.apply_segment(&arena, &c), slanted);
    }

    #[test]
    fn forced_draw_accepted() {
        let arena = ArenaRect::default();
        let cfg = GeneratorConfig::default();
        let draw = FirstDraw {
            diagonal: 9.0,
            angle: 120f64.to_radians(),
            y: 0.0,
        };
        let first = check_first_draw(draw, &vertical_soi(), &arena, &cfg).unwrap();
        assert!((first.obstacle.length - 77f64.sqrt()).abs() < 1e-12);
        assert!(contains(&arena, &first.obstacle));
        // Part A (toward -axis_b) is on the left of the SoI.
        assert!(first.end_a().x < 0.0);
        assert!(first.axis_b.x > 0.0);
    }

    #[test]
    fn forced_draws_rejected() {
        let arena = ArenaRect::default();
        let cfg = GeneratorConfig::default();
        let long = FirstDraw {
            diagonal: 45.0,
            angle: 2.0,
            y: 0.0,
        };
        assert_eq!(
            check_first_draw(long, &vertical_soi(), &arena, &cfg),
            Err(Rejection::Horizontal)
        );
        let high = FirstDraw {
            diagonal: 9.0,
            angle: 2.0,
            y: 18.0,
        };
        assert_eq!(
            check_first_draw(high, &vertical_soi(), &arena, &cfg),
            Err(Rejection::Vertical)
        );
        let acute = FirstDraw {
            diagonal: 9.0,
            angle: 1.0,
            y: 0.0,
        };
        assert_eq!(
            check_first_draw(acute, &vertical_soi(), &arena, &cfg),
            Err(Rejection::NotObtuse)
        );
        let stubby = FirstDraw {
            diagonal: 2.5,
            angle: 2.0,
            y: 0.0,
        };
        assert_eq!(
            check_first_draw(stubby, &vertical_soi(), &arena, &cfg),
            Err(Rejection::Length)
        );
    }

    #[test]
    fn second_obstacle_shape() {
        let arena = ArenaRect::default();
        let cfg = GeneratorConfig::default();
        let draw = FirstDraw {
            diagonal: 9.0,
            angle: 120f64.to_radians(),
            y: -6.0,
        };
        let first = check_first_draw(draw, &vertical_soi(), &arena, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let second =
            place_second_obstacle(&first, &vertical_soi(), &arena, &cfg, &mut rng).unwrap();
        let o2 = second.obstacle;
        assert!((o2.length - 1.75 * 77f64.sqrt()).abs() < 1e-9);
        assert!(first.obstacle.axis().dot(o2.axis()).abs() < 1e-12);
        assert!(!second.clamped);
        assert!((base_gap(&first.obstacle, &o2) - second.target_gap).abs() < 1e-9);
        // Beyond the first obstacle along the travel direction.
        assert!(o2.center_y > first.obstacle.center_y);
    }

    #[test]
    fn zero_count_and_determinism() {
        let cfg = GeneratorConfig {
            rng_seed: 42,
            ..GeneratorConfig::default()
        };
        assert!(generate(&default_mission(), &cfg, 0).unwrap().is_empty());
        let a = generate(&default_mission(), &cfg, 5).unwrap();
        let b = generate(&default_mission(), &cfg, 5).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(
            a.iter().map(|t| t.index).collect::<Vec<_>>(),
            vec![0, 1, 2, 3, 4]
        );
    }

    #[test]
    fn json_field_names() {
        let tc = generate(&default_mission(), &GeneratorConfig::default(), 1)
            .unwrap()
            .remove(0);
        let v = serde_json::to_value(&tc).unwrap();
        let o = &v["obstacles"][0];
        let mut keys: Vec<&str> = o.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["h", "l", "r", "w", "x", "y"]);
        for k in ["mission", "obstacles", "soi", "seed", "index"] {
            assert!(v.get(k).is_some(), "missing {k}");
        }
        assert!(v["mission"]["waypoints"].is_array());
        let back: TestCase = serde_json::from_value(v).unwrap();
        assert!((back.obstacles[0].rotation - tc.obstacles[0].rotation).abs() < 1e-12);
    }
}
