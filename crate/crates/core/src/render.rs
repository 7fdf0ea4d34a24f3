//! Analytic depth camera: renders cuboids and the ground plane into a z-depth
//! image from the UAV pose and back-projects the image to a world-frame point
//! cloud.
//!
//! Camera frame: `+z` forward along the optical axis, `+x` right, `+y` down.
//! The optical axis follows the UAV yaw, tilted by the mount pitch.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::geom::{CuboidObstacle, Pose, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraIntrinsics {
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Euclidean range limit, metres.
    pub max_range: f64,
}

impl CameraIntrinsics {
    /// Square-pixel pinhole with the principal point at the image centre.
    pub fn from_fov(width: usize, height: usize, horizontal_fov_deg: f64, max_range: f64) -> Self {
        let f = (width as f64 / 2.0) / (horizontal_fov_deg.to_radians() / 2.0).tan();
        Self {
            width,
            height,
            fx: f,
            fy: f,
            cx: width as f64 / 2.0 - 0.5,
            cy: height as f64 / 2.0 - 0.5,
            max_range,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.width == 0 || self.height == 0 {
            return Err(ConfigError::invalid("camera.width/height", "must be >= 1"));
        }
        if !(self.fx > 0.0 && self.fy > 0.0 && self.fx.is_finite() && self.fy.is_finite()) {
            return Err(ConfigError::invalid("camera.fx/fy", "must be positive"));
        }
        if !(self.cx.is_finite() && self.cy.is_finite()) {
            return Err(ConfigError::invalid("camera.cx/cy", "must be finite"));
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(ConfigError::invalid("camera.max_range", "must be positive"));
        }
        Ok(())
    }

    /// Half-angles (horizontal, vertical) of the view frustum, radians.
    pub fn half_fov(&self) -> (f64, f64) {
        let half_w = (self.width as f64 / 2.0) / self.fx;
        let half_h = (self.height as f64 / 2.0) / self.fy;
        (half_w.atan(), half_h.atan())
    }
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        Self::from_fov(640, 480, 86.0, 15.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraExtrinsics {
    /// Camera position in the UAV body frame (x forward, y left, z up).
    pub mount_translation: Vec3,
    /// Positive tilts the optical axis up, radians.
    pub mount_pitch: f64,
}

impl CameraExtrinsics {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.mount_translation.is_finite() || !self.mount_pitch.is_finite() {
            return Err(ConfigError::invalid("camera.extrinsics", "must be finite"));
        }
        Ok(())
    }
}

/// World-frame camera origin and basis for a given pose.
#[derive(Debug, Clone, Copy)]
pub struct CameraFrame {
    pub origin: Vec3,
    pub right: Vec3,
    pub down: Vec3,
    pub forward: Vec3,
}

impl CameraFrame {
    pub fn new(pose: &Pose, extr: &CameraExtrinsics) -> Self {
        let (sy, cy) = pose.yaw.sin_cos();
        let (sp, cp) = extr.mount_pitch.sin_cos();
        let forward = Vec3::new(cy * cp, sy * cp, sp);
        let right = Vec3::new(sy, -cy, 0.0);
        let down = forward.cross(right);
        let t = extr.mount_translation;
        let body_forward = Vec3::new(cy, sy, 0.0);
        let body_left = Vec3::new(-sy, cy, 0.0);
        let origin =
            pose.position + body_forward * t.x + body_left * t.y + Vec3::new(0.0, 0.0, t.z);
        Self {
            origin,
            right,
            down,
            forward,
        }
    }

    /// Ray direction through pixel `(u, v)` scaled so its forward component
    /// is 1: the hit parameter along it equals z-depth.
    pub fn pixel_ray(&self, intr: &CameraIntrinsics, u: f64, v: f64) -> Vec3 {
        let xc = (u - intr.cx) / intr.fx;
        let yc = (v - intr.cy) / intr.fy;
        self.right * xc + self.down * yc + self.forward
    }

    /// Projects a world point to `(u, v, z_depth)`; `None` behind the camera.
    pub fn project(&self, intr: &CameraIntrinsics, p: Vec3) -> Option<(f64, f64, f64)> {
        let d = p - self.origin;
        let z = d.dot(self.forward);
        if z <= 0.0 {
            return None;
        }
        let u = intr.fx * d.dot(self.right) / z + intr.cx;
        let v = intr.fy * d.dot(self.down) / z + intr.cy;
        Some((u, v, z))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    pub intrinsics: CameraIntrinsics,
    /// Row-major z-depths in metres; [`DepthImage::NO_HIT`] where nothing was hit.
    pub data: Vec<f64>,
}

impl DepthImage {
    pub const NO_HIT: f64 = f64::INFINITY;

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.data[v * self.intrinsics.width + u]
    }

    pub fn hit_count(&self) -> usize {
        self.data.iter().filter(|d| d.is_finite()).count()
    }

    /// Binary 16-bit PGM in millimetres; no-hit pixels are written as 0.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(
            w,
            "P5\n{} {}\n65535\n",
            self.intrinsics.width, self.intrinsics.height
        )?;
        let mut buf = Vec::with_capacity(self.data.len() * 2);
        for &d in &self.data {
            let mm = if d.is_finite() {
                (d * 1000.0).round().clamp(0.0, 65535.0) as u16
            } else {
                0
            };
            buf.extend_from_slice(&mm.to_be_bytes());
        }
        w.write_all(&buf)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// One `x y z` line per point.
    pub fn write_xyz<W: Write>(&self, mut w: W) -> io::Result<()> {
        for p in &self.points {
            writeln!(w, "{:.6} {:.6} {:.6}", p.x, p.y, p.z)?;
        }
        Ok(())
    }
}

/// A cuboid prepared for repeated ray queries.
#[derive(Debug, Clone, Copy)]
struct PreparedCuboid {
    center: Vec3,
    cos: f64,
    sin: f64,
    half: Vec3,
}

impl PreparedCuboid {
    fn new(obs: &CuboidObstacle) -> Self {
        let (sin, cos) = obs.rotation.sin_cos();
        Self {
            center: Vec3::new(obs.center_x, obs.center_y, 0.5 * obs.height),
            cos,
            sin,
            half: Vec3::new(0.5 * obs.length, 0.5 * obs.width, 0.5 * obs.height),
        }
    }

    fn to_local(&self, v: Vec3) -> Vec3 {
        Vec3::new(
            v.x * self.cos + v.y * self.sin,
            -v.x * self.sin + v.y * self.cos,
            v.z,
        )
    }

    /// Smallest positive ray parameter at which the ray meets one of the six
    /// faces, testing each face plane and then the in-face bounds.
    fn hit(&self, origin: Vec3, dir: Vec3) -> Option<f64> {
        let o = self.to_local(origin - self.center);
        let d = self.to_local(dir);
        let o = [o.x, o.y, o.z];
        let d = [d.x, d.y, d.z];
        let h = [self.half.x, self.half.y, self.half.z];
        let mut best: Option<f64> = None;
        for axis in 0..3 {
            if d[axis] == 0.0 {
                continue;
            }
            let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
            for sign in [-1.0, 1.0] {
                let t = (sign * h[axis] - o[axis]) / d[axis];
                if t <= 0.0 || best.is_some_and(|bt| t >= bt) {
                    continue;
                }
                let pa = o[a] + t * d[a];
                let pb = o[b] + t * d[b];
                if pa.abs() <= h[a] && pb.abs() <= h[b] {
                    best = Some(t);
                }
            }
        }
        best
    }
}

fn floor_hit(origin: Vec3, dir: Vec3) -> Option<f64> {
    (dir.z < 0.0 && origin.z > 0.0).then(|| -origin.z / dir.z)
}

fn cast(origin: Vec3, dir: Vec3, boxes: &[PreparedCuboid], max_range: f64) -> f64 {
    let mut t = floor_hit(origin, dir).unwrap_or(f64::INFINITY);
    for b in boxes {
        if let Some(tb) = b.hit(origin, dir) {
            t = t.min(tb);
        }
    }
    // `dir` has unit forward component, so `t` is z-depth and `t * |dir|` is
    // the Euclidean range.
    if t.is_finite() && t * dir.norm() <= max_range {
        t
    } else {
        DepthImage::NO_HIT
    }
}

/// Renders the obstacles plus the ground plane `z = 0` into a z-depth image.
pub fn render_depth(
    scene: &[CuboidObstacle],
    pose: &Pose,
    intr: &CameraIntrinsics,
    extr: &CameraExtrinsics,
) -> DepthImage {
    let frame = CameraFrame::new(pose, extr);
    let boxes: Vec<PreparedCuboid> = scene.iter().map(PreparedCuboid::new).collect();
    let render_row = |v: usize, row: &mut [f64]| {
        for (u, px) in row.iter_mut().enumerate() {
            let dir = frame.pixel_ray(intr, u as f64, v as f64);
            *px = cast(frame.origin, dir, &boxes, intr.max_range);
        }
    };
    let mut data = vec![DepthImage::NO_HIT; intr.width * intr.height];
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        data.par_chunks_mut(intr.width)
            .enumerate()
            .for_each(|(v, row)| render_row(v, row));
    }
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(intr.width)
        .enumerate()
        .for_each(|(v, row)| render_row(v, row));
    DepthImage {
        intrinsics: *intr,
        data,
    }
}

/// Ray-casts only the pixels [`depth_to_cloud`] would keep and returns the
/// same cloud without materialising the full image.
pub fn render_cloud(
    scene: &[CuboidObstacle],
    pose: &Pose,
    intr: &CameraIntrinsics,
    extr: &CameraExtrinsics,
    stride: usize,
) -> PointCloud {
    let frame = CameraFrame::new(pose, extr);
    let boxes: Vec<PreparedCuboid> = scene.iter().map(PreparedCuboid::new).collect();
    let stride = stride.max(1);
    let mut points = Vec::new();
    for v in (0..intr.height).step_by(stride) {
        for u in (0..intr.width).step_by(stride) {
            let dir = frame.pixel_ray(intr, u as f64, v as f64);
            let depth = cast(frame.origin, dir, &boxes, intr.max_range);
            if depth.is_finite() {
                points.push(frame.origin + dir * depth);
            }
        }
    }
    PointCloud { points }
}

/// Back-projects every `stride`-th pixel (in both directions) with a finite
/// depth into the world frame. `stride = 1` keeps every pixel.
pub fn depth_to_cloud(
    img: &DepthImage,
    pose: &Pose,
    extr: &CameraExtrinsics,
    stride: usize,
) -> PointCloud {
    let intr = &img.intrinsics;
    let frame = CameraFrame::new(pose, extr);
    let stride = stride.max(1);
    let mut points = Vec::new();
    for v in (0..intr.height).step_by(stride) {
        for u in (0..intr.width).step_by(stride) {
            let depth = img.get(u, v);
            if depth.is_finite() {
                let dir = frame.pixel_ray(intr, u as f64, v as f64);
                points.push(frame.origin + dir * depth);
            }
        }
    }
    PointCloud { points }
}
