//! Top-down SVG plots of scenarios and flown paths.

use std::fmt::Write;

use crate::geom::{base_vertices, ArenaRect, CuboidObstacle, FlightSegment, Vec2};
use crate::sim::Trajectory;

const SCALE: f64 = 12.0;
const MARGIN: f64 = 2.0;

#[derive(Debug, Clone, Copy, Default)]
pub struct PlotInput<'a> {
    pub arena: Option<&'a ArenaRect>,
    pub obstacles: &'a [CuboidObstacle],
    pub soi: Option<&'a FlightSegment>,
    pub trajectory: Option<&'a Trajectory>,
}

struct Bounds {
    min: Vec2,
    max: Vec2,
}

impl Bounds {
    fn grow(&mut self, p: Vec2) {
        self.min = Vec2::new(self.min.x.min(p.x), self.min.y.min(p.y));
        self.max = Vec2::new(self.max.x.max(p.x), self.max.y.max(p.y));
    }
}

/// Renders the plot with world `+y` pointing up the page. Output depends
/// only on the inputs, so identical runs give identical files.
pub fn render_svg(input: &PlotInput<'_>) -> String {
    let mut b = Bounds {
        min: Vec2::new(f64::INFINITY, f64::INFINITY),
        max: Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    };
    if let Some(a) = input.arena {
        b.grow(Vec2::new(a.x_min, a.y_min));
        b.grow(Vec2::new(a.x_max, a.y_max));
    }
    for o in input.obstacles {
        base_vertices(o).into_iter().for_each(|v| b.grow(v));
    }
    if let Some(s) = input.soi {
        b.grow(s.start.xy());
        b.grow(s.end.xy());
    }
    if let Some(t) = input.trajectory {
        t.points.iter().for_each(|p| b.grow(p.pose.position.xy()));
    }
    if !b.min.x.is_finite() {
        b.min = Vec2::new(-1.0, -1.0);
        b.max = Vec2::new(1.0, 1.0);
    }
    let w = (b.max.x - b.min.x + 2.0 * MARGIN) * SCALE;
    let h = (b.max.y - b.min.y + 2.0 * MARGIN) * SCALE;
    let px = |p: Vec2| {
        (
            (p.x - b.min.x + MARGIN) * SCALE,
            (b.max.y - p.y + MARGIN) * SCALE,
        )
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    if let Some(a) = input.arena {
        let (x0, y0) = px(Vec2::new(a.x_min, a.y_max));
        let _ = writeln!(
            s,
            r##"<rect class="arena" x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#555555" stroke-width="1.5"/>"##,
            (a.x_max - a.x_min) * SCALE,
            (a.y_max - a.y_min) * SCALE
        );
    }
    for (i, o) in input.obstacles.iter().enumerate() {
        let pts: Vec<String> = base_vertices(o)
            .into_iter()
            .map(|v| {
                let (x, y) = px(v);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            r##"<polygon class="obstacle" data-index="{i}" points="{}" fill="#c0504d" fill-opacity="0.8" stroke="#7f2a28"/>"##,
            pts.join(" ")
        );
    }
    if let Some(seg) = input.soi {
        let (x1, y1) = px(seg.start.xy());
        let (x2, y2) = px(seg.end.xy());
        let _ = writeln!(
            s,
            r##"<line class="soi" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="#4f81bd" stroke-width="1.5" stroke-dasharray="6 4"/>"##
        );
    }
    if let Some(t) = input.trajectory {
        let pts: Vec<String> = t
            .points
            .iter()
            .map(|p| {
                let (x, y) = px(p.pose.position.xy());
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline class="path" points="{}" fill="none" stroke="#222222" stroke-width="2"/>"##,
            pts.join(" ")
        );
        let (d, time) = t.min_distance();
        if d.is_finite() {
            if let Some(p) = t.points.iter().find(|p| p.t == time) {
                let (x, y) = px(p.pose.position.xy());
                let _ = writeln!(
                    s,
                    r##"<circle class="min-distance" cx="{x:.2}" cy="{y:.2}" r="5" fill="none" stroke="#f79646" stroke-width="2"><title>min {d:.3} m at t = {time:.1} s</title></circle>"##
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;

    #[test]
    fn contains_fixed_layers() {
        let arena = ArenaRect::default();
        let obs = [CuboidObstacle::new(Vec2::new(0.0, 0.0), 6.0, 2.0, 10.0, 0.3).unwrap()];
        let soi =
            FlightSegment::new(Vec3::new(0.0, -20.0, 2.0), Vec3::new(0.0, 20.0, 2.0)).unwrap();
        let svg = render_svg(&PlotInput {
            arena: Some(&arena),
            obstacles: &obs,
            soi: Some(&soi),
            trajectory: None,
        });
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(r#"class="arena""#));
        assert!(svg.contains(r#"class="obstacle""#));
        assert!(svg.contains("stroke-dasharray"));
        assert!(!svg.contains(r#"class="path""#));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_input_is_valid() {
        let svg = render_svg(&PlotInput::default());
        assert!(svg.contains("viewBox"));
    }
}
