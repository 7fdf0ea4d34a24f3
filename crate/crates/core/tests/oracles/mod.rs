//! Reference implementations written independently of the library, used to
//! cross-check it. Everything here works on plain arrays.

#![allow(dead_code)]

/// Box footprint and height: centre, length along the rotated axis, width,
/// height, rotation (radians, CCW from +x).
#[derive(Debug, Clone, Copy)]
pub struct RefBox {
    pub cx: f64,
    pub cy: f64,
    pub l: f64,
    pub w: f64,
    pub h: f64,
    pub r: f64,
}

impl RefBox {
    pub fn corners(&self) -> [[f64; 2]; 4] {
        let (s, c) = self.r.sin_cos();
        let mut out = [[0.0; 2]; 4];
        for (i, (a, b)) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
            .into_iter()
            .enumerate()
        {
            let x = a * self.l / 2.0;
            let y = b * self.w / 2.0;
            out[i] = [self.cx + c * x - s * y, self.cy + s * x + c * y];
        }
        out
    }

    /// World point in box coordinates (origin at base centre).
    fn local(&self, p: [f64; 3]) -> [f64; 3] {
        let (s, c) = self.r.sin_cos();
        let dx = p[0] - self.cx;
        let dy = p[1] - self.cy;
        [c * dx + s * dy, -s * dx + c * dy, p[2]]
    }

    fn local_dir(&self, d: [f64; 3]) -> [f64; 3] {
        let (s, c) = self.r.sin_cos();
        [c * d[0] + s * d[1], -s * d[0] + c * d[1], d[2]]
    }

    fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        (
            [-self.l / 2.0, -self.w / 2.0, 0.0],
            [self.l / 2.0, self.w / 2.0, self.h],
        )
    }

    /// Euclidean distance to the solid box, 0 inside.
    pub fn distance(&self, p: [f64; 3]) -> f64 {
        let q = self.local(p);
        let (lo, hi) = self.bounds();
        let mut sum = 0.0;
        for k in 0..3 {
            let e = if q[k] < lo[k] {
                lo[k] - q[k]
            } else if q[k] > hi[k] {
                q[k] - hi[k]
            } else {
                0.0
            };
            sum += e * e;
        }
        sum.sqrt()
    }

    /// Distance to the box boundary, from either side.
    pub fn surface_distance(&self, p: [f64; 3]) -> f64 {
        let outside = self.distance(p);
        if outside > 0.0 {
            return outside;
        }
        let q = self.local(p);
        let (lo, hi) = self.bounds();
        (0..3)
            .map(|k| (q[k] - lo[k]).min(hi[k] - q[k]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Slab-method entry parameter of `o + t d`, if the ray hits with t > 0.
    pub fn slab(&self, o: [f64; 3], d: [f64; 3]) -> Option<f64> {
        let o = self.local(o);
        let d = self.local_dir(d);
        let (lo, hi) = self.bounds();
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for k in 0..3 {
            if d[k].abs() < 1e-300 {
                if o[k] < lo[k] || o[k] > hi[k] {
                    return None;
                }
                continue;
            }
            let a = (lo[k] - o[k]) / d[k];
            let b = (hi[k] - o[k]) / d[k];
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        (t0 <= t1 && t0 > 0.0).then_some(t0)
    }
}

/// Separating-axis test for two convex quadrilaterals; touching counts as
/// overlap.
pub fn sat_overlap(a: &[[f64; 2]; 4], b: &[[f64; 2]; 4]) -> bool {
    for poly in [a, b] {
        for i in 0..4 {
            let p = poly[i];
            let q = poly[(i + 1) % 4];
            let axis = [q[1] - p[1], p[0] - q[0]];
            let proj = |v: &[f64; 2]| v[0] * axis[0] + v[1] * axis[1];
            let (amin, amax) = a.iter().map(proj).fold((f64::MAX, f64::MIN), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            });
            let (bmin, bmax) = b.iter().map(proj).fold((f64::MAX, f64::MIN), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            });
            if amax < bmin || bmax < amin {
                return false;
            }
        }
    }
    true
}

/// Pinhole camera looking along `yaw` (pitched up by `pitch`), pixel rays
/// scaled to unit optical-axis component.
pub struct RefCamera {
    pub origin: [f64; 3],
    pub yaw: f64,
    pub pitch: f64,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl RefCamera {
    pub fn ray(&self, u: f64, v: f64) -> [f64; 3] {
        // Camera axes (right, down, forward) expressed in a level body frame
        // (forward, left, up), then pitched and yawed.
        let xr = (u - self.cx) / self.fx;
        let yd = (v - self.cy) / self.fy;
        let body = [1.0, -xr, -yd];
        let (sp, cp) = self.pitch.sin_cos();
        let pitched = [cp * body[0] - sp * body[2], body[1], sp * body[0] + cp * body[2]];
        let (sy, cy) = self.yaw.sin_cos();
        [
            cy * pitched[0] - sy * pitched[1],
            sy * pitched[0] + cy * pitched[1],
            pitched[2],
        ]
    }

    /// Nearest hit among boxes and the ground plane within `max_range`
    /// (Euclidean), as z-depth; infinity for a miss.
    pub fn depth(&self, boxes: &[RefBox], u: f64, v: f64, max_range: f64) -> f64 {
        let d = self.ray(u, v);
        let o = self.origin;
        let mut best = f64::INFINITY;
        for b in boxes {
            if let Some(t) = b.slab(o, d) {
                best = best.min(t);
            }
        }
        if d[2] < 0.0 && o[2] > 0.0 {
            best = best.min(-o[2] / d[2]);
        }
        let len = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if best * len <= max_range {
            best
        } else {
            f64::INFINITY
        }
    }
}

/// Distance from `p` to the nearest scene surface (box faces or ground).
pub fn scene_surface_distance(boxes: &[RefBox], p: [f64; 3]) -> f64 {
    boxes
        .iter()
        .map(|b| b.surface_distance(p))
        .fold(p[2].abs(), f64::min)
}

/// Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0);
    let d = [ap[0] - t * ab[0], ap[1] - t * ab[1]];
    (d[0] * d[0] + d[1] * d[1]).sqrt()
}

/// Smallest distance between two disjoint convex quadrilaterals.
pub fn rect_gap(a: &[[f64; 2]; 4], b: &[[f64; 2]; 4]) -> f64 {
    let mut best = f64::INFINITY;
    for (p, q) in [(a, b), (b, a)] {
        for v in p {
            for i in 0..4 {
                best = best.min(point_segment_distance(*v, q[i], q[(i + 1) % 4]));
            }
        }
    }
    best
}

/// Shape rules every generated obstacle pair must satisfy.
pub struct PairRules {
    /// x_min, x_max, y_min, y_max
    pub arena: [f64; 4],
    pub width: f64,
    pub height: f64,
    pub length_ratio: f64,
    pub min_gap: f64,
}

/// Checks a generated pair against `rules`; `soi` is the segment the first
/// obstacle obstructs.
pub fn check_pair(o1: &RefBox, o2: &RefBox, soi: [[f64; 2]; 2], rules: &PairRules) -> Result<(), String> {
    let [x0, x1, y0, y1] = rules.arena;
    for (k, o) in [o1, o2].into_iter().enumerate() {
        for c in o.corners() {
            if !(c[0] >= x0 && c[0] <= x1 && c[1] >= y0 && c[1] <= y1) {
                return Err(format!("obstacle {k} vertex {c:?} outside arena"));
            }
        }
        if o.w != rules.width || o.h != rules.height {
            return Err(format!("obstacle {k} has w={} h={}", o.w, o.h));
        }
    }
    if (o2.l - rules.length_ratio * o1.l).abs() > 1e-9 {
        return Err(format!("l2 = {} but l1 = {}", o2.l, o1.l));
    }
    if (o1.r - o2.r).cos().abs() > 1e-9 {
        return Err("long axes not perpendicular".into());
    }

    // SoI line p + t s against the first obstacle's axis c + u a.
    let p = soi[0];
    let s = [soi[1][0] - p[0], soi[1][1] - p[1]];
    let a = [o1.r.cos(), o1.r.sin()];
    let den = s[0] * a[1] - s[1] * a[0];
    if den.abs() < 1e-12 {
        return Err("SoI parallel to the first obstacle".into());
    }
    let qp = [o1.cx - p[0], o1.cy - p[1]];
    let u = (qp[0] * s[1] - qp[1] * s[0]) / den;
    if u.abs() > o1.l / 2.0 {
        return Err(format!("SoI misses the long axis (offset {u})"));
    }
    let short = o1.l / 2.0 - u.abs();
    if (short - o1.l / 3.0).abs() > 1e-6 {
        return Err(format!("split {short} is not l/3 of {}", o1.l));
    }
    // Part B is the longer piece, on the side opposite the offset.
    let b_dir = if u > 0.0 { [-a[0], -a[1]] } else { a };
    let cos = (s[0] * b_dir[0] + s[1] * b_dir[1]) / (s[0].hypot(s[1]));
    if !(cos < 0.0 && cos > -1.0) {
        return Err(format!("SoI/part-B angle not obtuse (cos {cos})"));
    }

    let (c1, c2) = (o1.corners(), o2.corners());
    if sat_overlap(&c1, &c2) {
        return Err("obstacles overlap".into());
    }
    let g = rect_gap(&c1, &c2);
    if g < rules.min_gap - 1e-6 {
        return Err(format!("gap {g} below {}", rules.min_gap));
    }
    Ok(())
}
