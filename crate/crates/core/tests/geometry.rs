mod oracles;

use std::f64::consts::PI;

use oracles::{sat_overlap, RefBox};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavsim::geom::{
    angle_diff, base_gap, base_vertices, contains, normalize_angle, point_obstacle_distance,
    segment_line_intersection,
};
use uavsim::{ArenaRect, CuboidObstacle, FlightSegment, Vec2, Vec3};

fn reference(o: &CuboidObstacle) -> RefBox {
    RefBox {
        cx: o.center_x,
        cy: o.center_y,
        l: o.length,
        w: o.width,
        h: o.height,
        r: o.rotation,
    }
}

prop_compose! {
    fn obstacle()(
        x in -15.0..15.0f64,
        y in -15.0..15.0f64,
        w in 0.5..4.0f64,
        extra in 0.0..12.0f64,
        h in 1.0..25.0f64,
        r in -PI..PI,
    ) -> CuboidObstacle {
        CuboidObstacle::new(Vec2::new(x, y), w + extra, w, h, r).unwrap()
    }
}

fn same_set(a: &[Vec2; 4], b: &[Vec2; 4], tol: f64) -> bool {
    a.iter().all(|p| b.iter().any(|q| p.distance(*q) < tol))
}

#[test]
fn tilted_rectangle_vertices() {
    let o = CuboidObstacle::new(Vec2::new(3.0, 4.0), 6.0, 2.0, 5.0, PI / 6.0).unwrap();
    let v = base_vertices(&o);
    let (s, c) = (0.5f64, 3f64.sqrt() / 2.0);
    for (a, b) in [(3.0, 1.0), (-3.0, 1.0), (-3.0, -1.0), (3.0, -1.0)] {
        let expected = Vec2::new(3.0 + c * a - s * b, 4.0 + s * a + c * b);
        assert!(v.iter().any(|p| p.distance(expected) < 1e-12), "{expected:?}");
    }
}

#[test]
fn distance_matches_surface_sampling() {
    // Dense sampling of the box surface bounds the true distance from above
    // and converges to it.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..1000 {
        let o = CuboidObstacle::new(
            Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
            rng.gen_range(2.0..6.0),
            rng.gen_range(0.5..2.0),
            rng.gen_range(1.0..4.0),
            rng.gen_range(-PI..PI),
        )
        .unwrap();
        let p = Vec3::new(
            rng.gen_range(-8.0..8.0),
            rng.gen_range(-8.0..8.0),
            rng.gen_range(-2.0..7.0),
        );
        let d = point_obstacle_distance(p, &o);
        let sampled = sample_surface_distance(&o, p);
        if d == 0.0 {
            assert!(reference(&o).distance([p.x, p.y, p.z]) == 0.0);
        } else {
            assert!((d - sampled).abs() < 1e-3, "{d} vs {sampled}");
        }
    }
}

/// Minimum over a grid on each face refined around the best sample.
fn sample_surface_distance(o: &CuboidObstacle, p: Vec3) -> f64 {
    let hx = o.length / 2.0;
    let hy = o.width / 2.0;
    let (s, c) = o.rotation.sin_cos();
    let world = |a: f64, b: f64, z: f64| {
        Vec3::new(o.center_x + c * a - s * b, o.center_y + s * a + c * b, z)
    };
    // Faces as (fixed axis, fixed value); free coordinates span the rest.
    let faces: [(usize, f64); 6] = [(0, -hx), (0, hx), (1, -hy), (1, hy), (2, 0.0), (2, o.height)];
    let lo = [-hx, -hy, 0.0];
    let hi = [hx, hy, o.height];
    let mut best = f64::INFINITY;
    for (axis, value) in faces {
        let free: Vec<usize> = (0..3).filter(|&k| k != axis).collect();
        let (mut a0, mut a1) = (lo[free[0]], hi[free[0]]);
        let (mut b0, mut b1) = (lo[free[1]], hi[free[1]]);
        for _ in 0..6 {
            let n = 40;
            let mut local_best = (f64::INFINITY, 0.0, 0.0);
            for i in 0..=n {
                for j in 0..=n {
                    let a = a0 + (a1 - a0) * i as f64 / n as f64;
                    let b = b0 + (b1 - b0) * j as f64 / n as f64;
                    let mut q = [0.0; 3];
                    q[axis] = value;
                    q[free[0]] = a;
                    q[free[1]] = b;
                    let d = world(q[0], q[1], q[2]).distance(p);
                    if d < local_best.0 {
                        local_best = (d, a, b);
                    }
                }
            }
            best = best.min(local_best.0);
            let (da, db) = ((a1 - a0) / n as f64, (b1 - b0) / n as f64);
            a0 = (local_best.1 - 2.0 * da).max(lo[free[0]]);
            a1 = (local_best.1 + 2.0 * da).min(hi[free[0]]);
            b0 = (local_best.2 - 2.0 * db).max(lo[free[1]]);
            b1 = (local_best.2 + 2.0 * db).min(hi[free[1]]);
        }
    }
    best
}

#[test]
fn perpendicular_and_tilted_axis_crossings() {
    let soi = FlightSegment::new(Vec3::new(0.0, -20.0, 2.0), Vec3::new(0.0, 20.0, 2.0)).unwrap();
    let flat = CuboidObstacle::new(Vec2::new(0.0, 0.0), 10.0, 2.0, 20.0, 0.0).unwrap();
    let c = segment_line_intersection(&soi, &flat).unwrap();
    assert!(c.point.norm() < 1e-12);
    assert!((c.angle - PI / 2.0).abs() < 1e-12);

    let tilted = CuboidObstacle::new(Vec2::new(0.0, 0.0), 10.0, 2.0, 20.0, PI / 3.0).unwrap();
    let c = segment_line_intersection(&soi, &tilted).unwrap();
    assert!(c.point.norm() < 1e-12);
    assert!((c.angle - PI / 6.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn vertices_invariant_under_half_turn(o in obstacle()) {
        let flipped = CuboidObstacle { rotation: o.rotation + PI, ..o };
        prop_assert!(same_set(&base_vertices(&o), &base_vertices(&flipped), 1e-9));
    }

    #[test]
    fn vertices_match_rotation_oracle(o in obstacle()) {
        let v = base_vertices(&o);
        for c in reference(&o).corners() {
            prop_assert!(v.iter().any(|p| p.distance(Vec2::new(c[0], c[1])) < 1e-9));
        }
    }

    #[test]
    fn containment_matches_vertex_oracle(o in obstacle()) {
        let arena = ArenaRect::default();
        let inside = reference(&o)
            .corners()
            .iter()
            .all(|c| (-20.0..=20.0).contains(&c[0]) && (-20.0..=20.0).contains(&c[1]));
        prop_assert_eq!(contains(&arena, &o), inside);
    }

    #[test]
    fn gap_is_zero_exactly_when_sat_overlaps(a in obstacle(), b in obstacle()) {
        let overlap = sat_overlap(&reference(&a).corners(), &reference(&b).corners());
        let g = base_gap(&a, &b);
        prop_assert!(g >= 0.0);
        prop_assert_eq!(g == 0.0, overlap);
        prop_assert!((g - base_gap(&b, &a)).abs() < 1e-12);
    }

    #[test]
    fn point_distance_matches_oracle(o in obstacle(), x in -20.0..20.0f64, y in -20.0..20.0f64, z in -3.0..30.0f64) {
        let d = point_obstacle_distance(Vec3::new(x, y, z), &o);
        prop_assert!((d - reference(&o).distance([x, y, z])).abs() < 1e-9);
    }

    #[test]
    fn distance_is_translation_invariant(o in obstacle(), p in (-20.0..20.0f64, -20.0..20.0f64, 0.0..25.0f64), t in (-5.0..5.0f64, -5.0..5.0f64)) {
        let moved = CuboidObstacle { center_x: o.center_x + t.0, center_y: o.center_y + t.1, ..o };
        let a = point_obstacle_distance(Vec3::new(p.0, p.1, p.2), &o);
        let b = point_obstacle_distance(Vec3::new(p.0 + t.0, p.1 + t.1, p.2), &moved);
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn angles_normalize_into_half_open_range(a in -100.0..100.0f64, b in -100.0..100.0f64) {
        let n = normalize_angle(a);
        prop_assert!(n > -PI - 1e-12 && n <= PI + 1e-12);
        prop_assert!(((a - n) / (2.0 * PI) - ((a - n) / (2.0 * PI)).round()).abs() < 1e-9);
        let d = angle_diff(a, b);
        prop_assert!(d.abs() <= PI + 1e-12);
        prop_assert!(((b + d).sin() - a.sin()).abs() < 1e-9);
        prop_assert!(((b + d).cos() - a.cos()).abs() < 1e-9);
    }
}
