#![allow(dead_code)]

use socialplan_core::scenario::generate::GenerateParams;
use socialplan_core::{OccupancyGrid, Pedestrian, Point, Scenario};

pub fn open_scenario(width: usize, height: usize, res: f64, start: Point, goal: Point) -> Scenario {
    Scenario {
        id: "open".into(),
        grid: OccupancyGrid::empty(width, height, res).unwrap(),
        pedestrians: Vec::new(),
        start,
        goal,
        goal_radius: 0.25,
        robot_radius: 0.2,
    }
}

pub fn with_pedestrians(mut s: Scenario, peds: &[(f64, f64, f64)]) -> Scenario {
    s.pedestrians = peds
        .iter()
        .map(|&(x, y, h)| Pedestrian::new(x, y, h))
        .collect();
    s
}

/// Small generated corpus; coarse cells keep test runtime low.
pub fn corpus(count: usize, seed: u64) -> Vec<Scenario> {
    GenerateParams {
        count,
        width: 81,
        height: 64,
        resolution: 0.08,
        ped_count: 2,
        seed,
        ..Default::default()
    }
    .generate()
    .unwrap()
}
