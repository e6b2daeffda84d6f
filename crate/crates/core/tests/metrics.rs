mod common;

use proptest::prelude::*;
use socialplan_core::features::extract_features;
use socialplan_core::metrics::{
    dissimilarity, feature_difference, h_signature, homotopy_rate, mean_abs_gap, same_homotopy,
    HomotopyObstacles, MetricsConfig,
};
use socialplan_core::scenario::World;
use socialplan_core::{Error, FeatureConfig, Path, PathSource, Point, Scenario};

fn pts(v: &[(f64, f64)]) -> Vec<Point> {
    v.iter().map(|&(x, y)| Point::new(x, y)).collect()
}

fn path(id: &str, v: &[(f64, f64)]) -> Path {
    Path {
        scenario_id: id.into(),
        source: PathSource::RrtStar,
        points: pts(v),
    }
}

/// 10 m square with one 1 m block in the middle.
fn block_map() -> Scenario {
    let mut s = common::open_scenario(100, 100, 0.1, Point::new(1.0, 5.0), Point::new(9.0, 5.0));
    for j in 45..55 {
        for i in 45..55 {
            s.grid.set(i, j, true);
        }
    }
    s
}

#[test]
fn straight_path_has_empty_word() {
    let s = block_map();
    let cfg = MetricsConfig::default();
    let sig = h_signature(&s, &path("open", &[(1.0, 2.0), (9.0, 2.0)]), &cfg).unwrap();
    assert!(sig.word.is_empty());
}

#[test]
fn loops_around_an_obstacle() {
    let s = block_map();
    let o = HomotopyObstacles::for_scenario(&s, true);
    let once = pts(&[(1.0, 5.0), (5.0, 8.0), (9.0, 5.0), (5.0, 2.0), (1.0, 5.0)]);
    let w1 = o.signature(&once).unwrap().word;
    assert_eq!(w1, vec![1]);
    let mut twice = once.clone();
    twice.extend_from_slice(&once[1..]);
    assert_eq!(o.signature(&twice).unwrap().word, vec![1, 1]);
    let back: Vec<Point> = once.iter().rev().copied().collect();
    assert_eq!(o.signature(&back).unwrap().word, vec![-1]);
}

#[test]
fn detours_on_either_side() {
    let s = block_map();
    let cfg = MetricsConfig::default();
    let over = path("open", &[(1.0, 5.0), (5.0, 8.0), (9.0, 5.0)]);
    let over2 = path("open", &[(1.0, 5.0), (3.0, 7.0), (7.0, 9.0), (9.0, 5.0)]);
    let under = path("open", &[(1.0, 5.0), (5.0, 2.0), (9.0, 5.0)]);
    assert!(same_homotopy(&s, &over, &over, &cfg).unwrap());
    assert!(same_homotopy(&s, &over, &over2, &cfg).unwrap());
    assert!(!same_homotopy(&s, &over, &under, &cfg).unwrap());
}

#[test]
fn pedestrian_front_versus_behind() {
    let base = common::open_scenario(100, 100, 0.1, Point::new(1.0, 5.0), Point::new(9.0, 5.0));
    let s = common::with_pedestrians(base, &[(5.0, 5.0, std::f64::consts::FRAC_PI_2)]);
    let cfg = MetricsConfig::default();
    let front_a = path("open", &[(1.0, 5.0), (5.0, 7.0), (9.0, 5.0)]);
    let front_b = path("open", &[(1.0, 5.0), (4.0, 6.5), (6.0, 6.5), (9.0, 5.0)]);
    let back_a = path("open", &[(1.0, 5.0), (5.0, 3.0), (9.0, 5.0)]);
    let back_b = path("open", &[(1.0, 5.0), (3.0, 4.0), (7.0, 3.5), (9.0, 5.0)]);
    assert!(same_homotopy(&s, &front_a, &front_b, &cfg).unwrap());
    assert!(same_homotopy(&s, &back_a, &back_b, &cfg).unwrap());
    assert!(!same_homotopy(&s, &front_a, &back_a, &cfg).unwrap());
    // with pedestrians ignored both sides agree
    let off = MetricsConfig {
        pedestrians_as_obstacles: false,
        ..cfg
    };
    assert!(same_homotopy(&s, &front_a, &back_a, &off).unwrap());
}

#[test]
fn endpoint_and_bounds_errors() {
    let s = block_map();
    let cfg = MetricsConfig::default();
    let good = path("open", &[(1.0, 5.0), (9.0, 5.0)]);
    let short = path("open", &[(1.0, 5.0), (7.0, 5.0)]);
    assert!(matches!(
        same_homotopy(&s, &good, &short, &cfg),
        Err(Error::EndpointMismatch(_))
    ));
    let out = path("open", &[(1.0, 5.0), (5.0, 12.0), (9.0, 5.0)]);
    assert!(matches!(
        h_signature(&s, &out, &cfg),
        Err(Error::OutOfBounds(1))
    ));
}

#[test]
fn rates_on_identical_sets() {
    let scenarios = common::corpus(3, 2);
    let worlds: Vec<World> = scenarios
        .iter()
        .map(|s| World::new(s, FeatureConfig::default()))
        .collect();
    let demos: Vec<Path> = worlds
        .iter()
        .map(|w| socialplan_core::oracle::oracle_demo(w, &Default::default()).unwrap())
        .collect();
    let cfg = MetricsConfig::default();
    assert_eq!(homotopy_rate(&worlds, &demos, &demos, &cfg).unwrap(), 1.0);
    assert_eq!(feature_difference(&worlds, &demos, &demos).unwrap(), 0.0);
    let shuffled = vec![demos[1].clone(), demos[0].clone(), demos[2].clone()];
    assert!(matches!(
        feature_difference(&worlds, &demos, &shuffled),
        Err(Error::Mismatch(_))
    ));
}

#[test]
fn feature_gap_arithmetic() {
    let a = [0.7, 0.2, 0.0, 0.1, 0.0];
    let b = [0.2, 0.2, 0.0, 0.1, 0.0];
    assert!((mean_abs_gap(&a, &b) - 0.1).abs() < 1e-15);
}

#[test]
fn feature_difference_matches_direct_evaluation() {
    let scenarios = common::corpus(4, 31);
    let worlds: Vec<World> = scenarios
        .iter()
        .map(|s| World::new(s, FeatureConfig::default()))
        .collect();
    let demos: Vec<Path> = worlds
        .iter()
        .map(|w| socialplan_core::oracle::oracle_demo(w, &Default::default()).unwrap())
        .collect();
    let plans: Vec<Path> = worlds
        .iter()
        .map(|w| {
            let cfg = socialplan_core::PlannerConfig {
                max_iterations: 1500,
                seed: 1,
                ..Default::default()
            };
            socialplan_core::planner::plan_rrt_star(w, &cfg)
                .unwrap()
                .path
                .unwrap()
        })
        .collect();
    // straight-line evaluation: subdivide every segment into ceil(len/0.2) equal pieces
    let mean = |w: &World, p: &[Point]| {
        let mut samples = vec![p[0]];
        for s in p.windows(2) {
            let n = ((s[0].dist(s[1]) / 0.2) - 1e-9).ceil().max(1.0) as usize;
            for k in 1..=n {
                let t = k as f64 / n as f64;
                samples.push(Point::new(
                    s[0].x + t * (s[1].x - s[0].x),
                    s[0].y + t * (s[1].y - s[0].y),
                ));
            }
        }
        let mut acc = [0.0; 5];
        for q in &samples {
            let f = extract_features(w.scenario, &w.field, &w.features, *q).to_array();
            for j in 0..5 {
                acc[j] += f[j] / samples.len() as f64;
            }
        }
        acc
    };
    let mut total = 0.0;
    for ((w, d), p) in worlds.iter().zip(&demos).zip(&plans) {
        let (a, b) = (mean(w, &d.points), mean(w, &p.points));
        total += (0..5).map(|j| (a[j] - b[j]).abs()).sum::<f64>();
    }
    let expect = total / (5.0 * worlds.len() as f64);
    let got = feature_difference(&worlds, &demos, &plans).unwrap();
    assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dissimilarity_rigid_invariance(
        a in prop::collection::vec((0.0f64..5.0, 0.0f64..5.0), 2..6),
        b in prop::collection::vec((0.0f64..5.0, 0.0f64..5.0), 2..6),
        theta in -3.0f64..3.0, dx in -5.0f64..5.0, dy in -5.0f64..5.0,
    ) {
        let (pa, pb) = (pts(&a), pts(&b));
        prop_assume!(pa.windows(2).any(|w| w[0] != w[1]));
        let move_ = |p: &Vec<Point>| -> Vec<Point> {
            p.iter().map(|q| { let r = q.rotated(theta); Point::new(r.x + dx, r.y + dy) }).collect()
        };
        let d0 = dissimilarity(&pa, &pb, false).unwrap();
        let d1 = dissimilarity(&move_(&pa), &move_(&pb), false).unwrap();
        prop_assert!(d0 >= 0.0);
        prop_assert!((d0 - d1).abs() < 1e-9);
    }

    #[test]
    fn jitter_keeps_the_class(
        via in prop::sample::select(vec![(5.0, 8.0), (5.0, 2.0), (2.0, 8.5), (8.0, 1.5)]),
        jit in prop::collection::vec((-0.05f64..0.05, -0.05f64..0.05), 6),
    ) {
        let s = block_map();
        let space = s.free_space();
        let cfg = MetricsConfig::default();
        let base = vec![Point::new(1.0, 5.0), Point::new(via.0, via.1), Point::new(9.0, 5.0)];
        let dense = socialplan_core::geometry::subdivide(&base, 1.5);
        let mut jittered = dense.clone();
        let last = jittered.len() - 1;
        for (k, p) in jittered.iter_mut().enumerate().take(last).skip(1) {
            let (jx, jy) = jit[k % jit.len()];
            *p = Point::new(p.x + jx, p.y + jy);
        }
        prop_assume!(jittered.windows(2).all(|w| space.segment_free(w[0], w[1])));
        let a = Path { scenario_id: s.id.clone(), source: PathSource::DemoHuman, points: dense };
        let b = Path { scenario_id: s.id.clone(), source: PathSource::RrtStar, points: jittered };
        prop_assert!(same_homotopy(&s, &a, &b, &cfg).unwrap());
    }

    #[test]
    fn equivalence_relation(
        vias in prop::collection::vec(prop::collection::vec((0.5f64..9.5, 0.5f64..9.5), 1..4), 3),
    ) {
        let s = block_map();
        let cfg = MetricsConfig::default();
        let mk = |v: &Vec<(f64, f64)>| {
            let mut all = vec![(1.0, 5.0)];
            all.extend_from_slice(v);
            all.push((9.0, 5.0));
            path("open", &all)
        };
        let (a, b, c) = (mk(&vias[0]), mk(&vias[1]), mk(&vias[2]));
        let eq = |x: &Path, y: &Path| same_homotopy(&s, x, y, &cfg).unwrap();
        prop_assert!(eq(&a, &a));
        prop_assert_eq!(eq(&a, &b), eq(&b, &a));
        if eq(&a, &b) && eq(&b, &c) {
            prop_assert!(eq(&a, &c));
        }
    }
}
