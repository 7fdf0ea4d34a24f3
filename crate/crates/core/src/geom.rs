//! Geometric primitives shared by the renderer, planner, simulator and
//! scenario generator.
//!
//! World frame: `x` east, `y` north, `z` up, ground plane at `z = 0`. Yaw and
//! obstacle rotations are measured counter-clockwise from `+x`.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::GeomError;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn xy(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn with_altitude(self, z: f64) -> Vec3 {
        Vec3::new(self.x, self.y, z)
    }

    /// Unit vector for an azimuth (from `+x`, CCW) and elevation (from the
    /// horizontal plane, positive up), both in radians.
    pub fn from_spherical(azimuth: f64, elevation: f64) -> Vec3 {
        let (sa, ca) = azimuth.sin_cos();
        let (se, ce) = elevation.sin_cos();
        Vec3::new(ca * ce, sa * ce, se)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c, s)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn with_z(self, z: f64) -> Vec3 {
        Vec3::new(self.x, self.y, z)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Signed shortest rotation taking `from` onto `to`, in `(-π, π]`.
pub fn angle_diff(to: f64, from: f64) -> f64 {
    normalize_angle(to - from)
}

/// UAV state: position plus heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub position: Vec3,
    pub yaw: f64,
}

impl Pose {
    pub fn new(position: Vec3, yaw: f64) -> Self {
        Self {
            position,
            yaw: normalize_angle(yaw),
        }
    }

    pub fn heading(&self) -> Vec2 {
        Vec2::from_angle(self.yaw)
    }
}

/// Axis-aligned rectangle on the ground plane in which obstacles must lie.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArenaRect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl ArenaRect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self, GeomError> {
        let arena = Self {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        arena.validate()?;
        Ok(arena)
    }

    pub fn validate(&self) -> Result<(), GeomError> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(GeomError::InvalidArena(*self));
        }
        Ok(())
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    pub fn contains_point(&self, p: Vec2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

impl Default for ArenaRect {
    fn default() -> Self {
        Self {
            x_min: -20.0,
            x_max: 20.0,
            y_min: -20.0,
            y_max: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlightSegment {
    pub start: Vec3,
    pub end: Vec3,
}

impl FlightSegment {
    pub fn new(start: Vec3, end: Vec3) -> Result<Self, GeomError> {
        if !start.is_finite() || !end.is_finite() || start == end {
            return Err(GeomError::DegenerateSegment);
        }
        Ok(Self { start, end })
    }

    pub fn direction_2d(&self) -> Vec2 {
        self.end.xy() - self.start.xy()
    }

    pub fn length(&self) -> f64 {
        self.start.distance(self.end)
    }

    pub fn midpoint(&self) -> Vec3 {
        (self.start + self.end) * 0.5
    }

    pub fn reversed(&self) -> FlightSegment {
        FlightSegment {
            start: self.end,
            end: self.start,
        }
    }
}

/// Box standing on the ground with a rotated rectangular base.
///
/// `rotation` is the direction of the long base axis. The solid occupies
/// `z ∈ [0, height]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CuboidObstacle {
    #[serde(rename = "x")]
    pub center_x: f64,
    #[serde(rename = "y")]
    pub center_y: f64,
    #[serde(rename = "l")]
    pub length: f64,
    #[serde(rename = "w")]
    pub width: f64,
    #[serde(rename = "h")]
    pub height: f64,
    /// Radians in memory; degrees on the wire.
    #[serde(rename = "r", with = "degrees")]
    pub rotation: f64,
}

mod degrees {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(radians: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(radians.to_degrees())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d).map(f64::to_radians)
    }
}

impl CuboidObstacle {
    pub fn new(
        center: Vec2,
        length: f64,
        width: f64,
        height: f64,
        rotation: f64,
    ) -> Result<Self, GeomError> {
        let obs = Self {
            center_x: center.x,
            center_y: center.y,
            length,
            width,
            height,
            rotation: normalize_angle(rotation),
        };
        obs.validate()?;
        Ok(obs)
    }

    pub fn validate(&self) -> Result<(), GeomError> {
        let fields = [
            self.center_x,
            self.center_y,
            self.length,
            self.width,
            self.height,
            self.rotation,
        ];
        if fields.iter().any(|v| !v.is_finite())
            || self.length <= 0.0
            || self.width <= 0.0
            || self.height <= 0.0
            || self.length < self.width
        {
            return Err(GeomError::InvalidObstacle(*self));
        }
        Ok(())
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(self.center_x, self.center_y)
    }

    pub fn diagonal(&self) -> f64 {
        self.length.hypot(self.width)
    }

    /// Unit vector along the long base axis.
    pub fn axis(&self) -> Vec2 {
        Vec2::from_angle(self.rotation)
    }

    /// Unit vector along the short base axis.
    pub fn normal(&self) -> Vec2 {
        self.axis().perp()
    }

    /// Base-plane point expressed as (along long axis, along short axis)
    /// relative to the centre.
    pub fn to_local(&self, p: Vec2) -> Vec2 {
        let d = p - self.center();
        Vec2::new(d.dot(self.axis()), d.dot(self.normal()))
    }

    pub fn from_local(&self, p: Vec2) -> Vec2 {
        self.center() + self.axis() * p.x + self.normal() * p.y
    }

    pub fn half_extents(&self) -> Vec2 {
        Vec2::new(0.5 * self.length, 0.5 * self.width)
    }
}

/// The four corners of the rotated base, counter-clockwise.
pub fn base_vertices(obs: &CuboidObstacle) -> [Vec2; 4] {
    let h = obs.half_extents();
    [
        obs.from_local(Vec2::new(h.x, h.y)),
        obs.from_local(Vec2::new(-h.x, h.y)),
        obs.from_local(Vec2::new(-h.x, -h.y)),
        obs.from_local(Vec2::new(h.x, -h.y)),
    ]
}

/// Euclidean distance from `p` to the solid cuboid; 0 inside.
pub fn point_obstacle_distance(p: Vec3, obs: &CuboidObstacle) -> f64 {
    let local = obs.to_local(p.xy());
    let h = obs.half_extents();
    let dx = (local.x.abs() - h.x).max(0.0);
    let dy = (local.y.abs() - h.y).max(0.0);
    let dz = if p.z < 0.0 {
        -p.z
    } else {
        (p.z - obs.height).max(0.0)
    };
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Distance from the ground projection of `p` to the base rectangle.
pub fn point_obstacle_distance_2d(p: Vec2, obs: &CuboidObstacle) -> f64 {
    let local = obs.to_local(p);
    let h = obs.half_extents();
    let dx = (local.x.abs() - h.x).max(0.0);
    let dy = (local.y.abs() - h.y).max(0.0);
    dx.hypot(dy)
}

/// How obstacle distance is measured along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    /// Point to solid cuboid.
    #[default]
    Spatial,
    /// Ground projection of the point to the base rectangle.
    Planar,
}

impl DistanceMode {
    pub fn distance(self, p: Vec3, obs: &CuboidObstacle) -> f64 {
        match self {
            DistanceMode::Spatial => point_obstacle_distance(p, obs),
            DistanceMode::Planar => point_obstacle_distance_2d(p.xy(), obs),
        }
    }

    /// Minimum over `obstacles`; `+∞` when there are none.
    pub fn min_distance(self, p: Vec3, obstacles: &[CuboidObstacle]) -> f64 {
        obstacles
            .iter()
            .map(|o| self.distance(p, o))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Where a flight segment crosses an obstacle's long axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisCrossing {
    pub point: Vec2,
    /// Angle in `(0, π)` between the segment direction and the obstacle's
    /// axis direction `(cos r, sin r)`.
    pub angle: f64,
    /// Signed position of the crossing along the axis, measured from the
    /// obstacle centre.
    pub axis_offset: f64,
}

/// Intersection of the ground projection of `seg` with the obstacle's long
/// axis, taken as a finite segment of length `l` through the centre.
pub fn segment_line_intersection(
    seg: &FlightSegment,
    obs: &CuboidObstacle,
) -> Option<AxisCrossing> {
    let p = seg.start.xy();
    let r = seg.direction_2d();
    let q = obs.center();
    let s = obs.axis();
    let denom = r.cross(s);
    if denom.abs() <= 1e-12 * r.norm() {
        return None;
    }
    let qp = q - p;
    // p + t r = q + u s
    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    let half = 0.5 * obs.length;
    let tol = 1e-12;
    if !(-tol..=1.0 + tol).contains(&t) || !(-half - tol..=half + tol).contains(&u) {
        return None;
    }
    let cos = (r.dot(s) / r.norm()).clamp(-1.0, 1.0);
    Some(AxisCrossing {
        point: q + s * u,
        angle: cos.acos(),
        axis_offset: u,
    })
}

/// True iff all four base vertices lie inside the arena (borders inclusive).
pub fn contains(arena: &ArenaRect, obs: &CuboidObstacle) -> bool {
    base_vertices(obs).iter().all(|v| arena.contains_point(*v))
}

/// Smallest distance between the base rectangles, 0 when they overlap.
pub fn base_gap(a: &CuboidObstacle, b: &CuboidObstacle) -> f64 {
    let va = base_vertices(a);
    let vb = base_vertices(b);
    if rectangles_overlap(&va, &vb) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..4 {
        let (a0, a1) = (va[i], va[(i + 1) % 4]);
        let (b0, b1) = (vb[i], vb[(i + 1) % 4]);
        for v in vb {
            best = best.min(point_segment_distance(v, a0, a1));
        }
        for v in va {
            best = best.min(point_segment_distance(v, b0, b1));
        }
    }
    best
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 {
        ((p - a).dot(ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.distance(a + ab * t)
}

// Edge-containment test: two convex polygons overlap iff some vertex of one
// lies inside the other or some pair of edges cross.
fn rectangles_overlap(a: &[Vec2; 4], b: &[Vec2; 4]) -> bool {
    let inside = |p: Vec2, poly: &[Vec2; 4]| {
        (0..4).all(|i| (poly[(i + 1) % 4] - poly[i]).cross(p - poly[i]) >= 0.0)
    };
    if a.iter().any(|&p| inside(p, b)) || b.iter().any(|&p| inside(p, a)) {
        return true;
    }
    for i in 0..4 {
        for j in 0..4 {
            if segments_cross(a[i], a[(i + 1) % 4], b[j], b[(j + 1) % 4]) {
                return true;
            }
        }
    }
    false
}

fn segments_cross(p0: Vec2, p1: Vec2, q0: Vec2, q1: Vec2) -> bool {
    let d1 = (p1 - p0).cross(q0 - p0);
    let d2 = (p1 - p0).cross(q1 - p0);
    let d3 = (q1 - q0).cross(p0 - q0);
    let d4 = (q1 - q0).cross(p1 - q0);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}
