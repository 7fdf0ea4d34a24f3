mod oracles;

use std::f64::consts::PI;

use oracles::{check_pair, ks_statistic, rect_gap, PairRules, RefBox};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uavsim::geom::base_vertices;
use uavsim::testgen::{
    canonicalize, default_mission, find_soi, generate, place_second_obstacle,
    sample_first_obstacle, GeneratorConfig, Mission, Symmetry, TestCase,
};
use uavsim::{ArenaRect, CuboidObstacle, FlightSegment, GenError, Vec2, Vec3};

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

fn rules(cfg: &GeneratorConfig) -> PairRules {
    let a = cfg.arena;
    PairRules {
        arena: [a.x_min, a.x_max, a.y_min, a.y_max],
        width: cfg.obstacle_width,
        height: cfg.obstacle_height,
        length_ratio: cfg.length_ratio,
        min_gap: cfg.second_obstacle_gap_range[0],
    }
}

fn check_case(tc: &TestCase, cfg: &GeneratorConfig) -> Result<(), String> {
    let soi = [
        [tc.soi.start.x, tc.soi.start.y],
        [tc.soi.end.x, tc.soi.end.y],
    ];
    check_pair(&reference(&tc.obstacles[0]), &reference(&tc.obstacles[1]), soi, &rules(cfg))
}

fn mission(start: (f64, f64), end: (f64, f64)) -> Mission {
    Mission {
        start: Vec3::new(start.0, start.1, 0.0),
        waypoints: vec![Vec3::new(end.0, end.1, 3.0)],
        landing: Vec3::new(end.0, end.1, 0.0),
    }
}

fn same_obstacle(a: &CuboidObstacle, b: &CuboidObstacle) -> bool {
    let (va, vb) = (base_vertices(a), base_vertices(b));
    va.iter().all(|p| vb.iter().any(|q| p.distance(*q) < 1e-9))
        && (a.length - b.length).abs() < 1e-12
        && (a.width - b.width).abs() < 1e-12
}

prop_compose! {
    fn symmetry()(mirror_x in any::<bool>(), mirror_y in any::<bool>()) -> Symmetry {
        Symmetry { mirror_x, mirror_y }
    }
}

prop_compose! {
    fn obstacle()(x in -18.0..18.0f64, y in -18.0..18.0f64, l in 2.0..10.0f64, r in -PI..PI) -> CuboidObstacle {
        CuboidObstacle::new(Vec2::new(x, y), l, 2.0, 20.0, r).unwrap()
    }
}

proptest! {
    #[test]
    fn symmetry_is_an_involution(s in symmetry(), o in obstacle(), p in (-30.0..30.0f64, -30.0..30.0f64, 0.0..5.0f64)) {
        let arena = ArenaRect::new(-20.0, 24.0, -18.0, 20.0).unwrap();
        let twice = s.inverse().apply_obstacle(&arena, &s.apply_obstacle(&arena, &o));
        prop_assert!(same_obstacle(&o, &twice));
        let q = Vec3::new(p.0, p.1, p.2);
        prop_assert!(s.apply_point(&arena, s.apply_point(&arena, q)).distance(q) < 1e-9);
    }

    #[test]
    fn symmetry_preserves_containment(s in symmetry(), o in obstacle()) {
        let arena = ArenaRect::default();
        prop_assert_eq!(
            uavsim::geom::contains(&arena, &o),
            uavsim::geom::contains(&arena, &s.apply_obstacle(&arena, &o))
        );
    }

    #[test]
    fn canonical_soi_travels_north_east(x0 in -15.0..15.0f64, x1 in -15.0..15.0f64, north in any::<bool>()) {
        let arena = ArenaRect::default();
        let (y0, y1) = if north { (-20.0, 20.0) } else { (20.0, -20.0) };
        let soi = FlightSegment::new(Vec3::new(x0, y0, 1.0), Vec3::new(x1, y1, 1.0)).unwrap();
        let (sym, canon) = canonicalize(&soi, &arena);
        let d = canon.direction_2d();
        prop_assert!(d.y > 0.0 && d.x >= 0.0);
        let back = sym.inverse().apply_segment(&arena, &canon);
        prop_assert!(back.start.distance(soi.start) < 1e-9 && back.end.distance(soi.end) < 1e-9);
    }

    #[test]
    fn generated_cases_obey_shape_rules(
        seed in any::<u64>(),
        x0 in -8.0..8.0f64,
        x1 in -8.0..8.0f64,
        north in any::<bool>(),
    ) {
        let cfg = GeneratorConfig { rng_seed: seed, ..GeneratorConfig::default() };
        let (s, e) = if north { ((x0, -25.0), (x1, 25.0)) } else { ((x0, 25.0), (x1, -25.0)) };
        let m = mission(s, e);
        match generate(&m, &cfg, 5) {
            Ok(cases) => {
                prop_assert_eq!(cases.len(), 5);
                for tc in &cases {
                    if let Err(e) = check_case(tc, &cfg) {
                        return Err(TestCaseError::fail(format!("case {}: {e}", tc.index)));
                    }
                    prop_assert!(tc.validate(&cfg.arena).is_ok());
                }
            }
            // A slanted SoI near a border can leave no room for the pair.
            Err(GenError::PlacementFailed) | Err(GenError::SamplingExhausted(_)) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}

#[test]
fn default_stream_obeys_shape_rules() {
    let cfg = GeneratorConfig::default();
    let cases = generate(&default_mission(), &cfg, 2000).unwrap();
    for tc in &cases {
        check_case(tc, &cfg).unwrap_or_else(|e| panic!("case {}: {e}", tc.index));
    }
}

#[test]
fn southbound_mission_is_mirrored_back() {
    let cfg = GeneratorConfig::default();
    let cases = generate(&mission((2.0, 25.0), (2.0, -25.0)), &cfg, 200).unwrap();
    for tc in &cases {
        assert!(tc.transform.mirror_y);
        check_case(tc, &cfg).unwrap_or_else(|e| panic!("case {}: {e}", tc.index));
    }
}

#[test]
fn zero_count_and_repeatability() {
    let cfg = GeneratorConfig { rng_seed: 99, ..GeneratorConfig::default() };
    assert!(generate(&default_mission(), &cfg, 0).unwrap().is_empty());
    let a = serde_json::to_vec(&generate(&default_mission(), &cfg, 20).unwrap()).unwrap();
    let b = serde_json::to_vec(&generate(&default_mission(), &cfg, 20).unwrap()).unwrap();
    assert_eq!(a, b);
    // Shorter streams are prefixes of longer ones.
    let short = generate(&default_mission(), &cfg, 7).unwrap();
    let long = generate(&default_mission(), &cfg, 20).unwrap();
    assert_eq!(short[..], long[..7]);
}

#[test]
fn unclamped_second_obstacle_keeps_drawn_gap() {
    let cfg = GeneratorConfig::default();
    let arena = cfg.arena;
    let soi = find_soi(&default_mission(), &arena).unwrap().segment;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let [g_min, g_max] = cfg.second_obstacle_gap_range;
    let mut unclamped = 0;
    for _ in 0..5000 {
        let first = sample_first_obstacle(&soi, &arena, &cfg, &mut rng).unwrap();
        let Ok(second) = place_second_obstacle(&first, &soi, &arena, &cfg, &mut rng) else {
            continue;
        };
        let g = rect_gap(
            &reference(&first.obstacle).corners(),
            &reference(&second.obstacle).corners(),
        );
        assert!((g_min..g_max).contains(&second.target_gap));
        assert!(g >= g_min - 1e-6);
        if !second.clamped {
            unclamped += 1;
            assert!((g - second.target_gap).abs() < 1e-6, "{g} vs {}", second.target_gap);
        }
    }
    assert!(unclamped > 1000);
}

/// Acceptance probability of a diagonal `d` for the default arena and a
/// vertical SoI at x = 0: `y` must keep `y ± d/2` inside, and the disc of
/// radius `d/2` about the centre (offset `l/6` along part B) must also fit.
/// Averaging over `y ~ U(-20, 20)` and the part-B angle gives a density
/// proportional to `40 - d - c l / 6` with `c` the mean of `sin φ` over
/// `φ ~ U(5°, 70°)`.
fn accepted_diagonal_cdf(x: f64) -> f64 {
    let (a, b) = (5f64.to_radians(), 70f64.to_radians());
    let c = (a.cos() - b.cos()) / (b - a);
    let h = |x: f64| {
        let r = (x * x - 4.0).sqrt();
        x / 2.0 * r - 2.0 * (x + r).ln()
    };
    let g = |x: f64| 40.0 * (x - 6.0) - (x * x - 36.0) / 2.0 - c / 6.0 * (h(x) - h(6.0));
    g(x.clamp(6.0, 18.0)) / g(18.0)
}

#[test]
fn accepted_diagonals_follow_truncated_uniform() {
    let cfg = GeneratorConfig::default();
    let arena = cfg.arena;
    let soi = find_soi(&default_mission(), &arena).unwrap().segment;
    assert_eq!((soi.start.x, soi.end.x), (0.0, 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut d: Vec<f64> = (0..10_000)
        .map(|_| sample_first_obstacle(&soi, &arena, &cfg, &mut rng).unwrap().draw.diagonal)
        .collect();
    let n = d.len() as f64;
    let stat = ks_statistic(&mut d, accepted_diagonal_cdf);
    // 1 % critical value of the one-sample KS statistic.
    let critical = 1.628 / n.sqrt();
    assert!(stat < critical, "D = {stat} >= {critical}");

    // A plain uniform on [6, 18] is distinguishable, so the test has power.
    let uniform = ks_statistic(&mut d, |x| ((x - 6.0) / 12.0).clamp(0.0, 1.0));
    assert!(uniform > critical, "D_uniform = {uniform}");
}

#[test]
fn mission_missing_a_border_has_no_soi() {
    let arena = ArenaRect::default();
    let m = mission((-30.0, 0.0), (30.0, 0.0));
    match find_soi(&m, &arena) {
        Err(e @ GenError::NoSoi { .. }) => {
            let text = e.to_string();
            assert!(text.contains("top") && text.contains("bottom"));
        }
        other => panic!("{other:?}"),
    }
}
