//! Seeded random scenario corpus.
//!
//! Each scenario draws from its own stream derived from `(seed, index)`, so
//! scenario `k` does not depend on how many scenarios precede it.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::search::dijkstra;
use super::{
    is_free, FreeSpace, OccupancyGrid, Pedestrian, Scenario, DEFAULT_BODY_RADIUS,
    DEFAULT_GOAL_RADIUS, DEFAULT_ROBOT_RADIUS,
};
use crate::geometry::Point;
use crate::rng::{stream, Rng};
use crate::{Error, Result};

pub const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerateParams {
    pub count: usize,
    pub width: usize,
    pub height: usize,
    pub ped_count: usize,
    pub seed: u64,
    pub resolution: f64,
    pub min_obstacles: usize,
    pub max_obstacles: usize,
    /// Skip static obstacles entirely.
    pub empty: bool,
    pub goal_radius: f64,
    pub robot_radius: f64,
    pub body_radius: f64,
    /// Minimum start-goal distance as a fraction of the map diagonal.
    pub min_separation: f64,
}

impl Default for GenerateParams {
    fn default() -> Self {
        Self {
            count: 1,
            width: 324,
            height: 257,
            ped_count: 3,
            seed: 0,
            resolution: 0.02,
            min_obstacles: 2,
            max_obstacles: 6,
            empty: false,
            goal_radius: DEFAULT_GOAL_RADIUS,
            robot_radius: DEFAULT_ROBOT_RADIUS,
            body_radius: DEFAULT_BODY_RADIUS,
            min_separation: 0.4,
        }
    }
}

pub fn generate_scenarios(
    count: usize,
    width: usize,
    height: usize,
    ped_count: usize,
    seed: u64,
) -> Result<Vec<Scenario>> {
    GenerateParams {
        count,
        width,
        height,
        ped_count,
        seed,
        ..Default::default()
    }
    .generate()
}

impl GenerateParams {
    pub fn generate(&self) -> Result<Vec<Scenario>> {
        if self.count == 0 {
            return Err(Error::InvalidConfig {
                field: "count",
                detail: "must be at least 1".into(),
            });
        }
        if self.min_obstacles > self.max_obstacles {
            return Err(Error::InvalidConfig {
                field: "min_obstacles",
                detail: "exceeds max_obstacles".into(),
            });
        }
        OccupancyGrid::empty(self.width, self.height, self.resolution)?;
        (0..self.count).map(|k| self.generate_one(k)).collect()
    }

    pub fn generate_one(&self, index: usize) -> Result<Scenario> {
        let mut rng = stream(self.seed, &[index as u64]);
        for _ in 0..MAX_ATTEMPTS {
            if let Some(s) = self.attempt(index, &mut rng) {
                return Ok(s);
            }
        }
        Err(Error::Generation {
            index,
            detail: format!("no feasible layout within {MAX_ATTEMPTS} attempts"),
        })
    }

    fn attempt(&self, index: usize, rng: &mut Rng) -> Option<Scenario> {
        let mut grid = OccupancyGrid::empty(self.width, self.height, self.resolution).ok()?;
        if !self.empty {
            let n = rng.gen_range(self.min_obstacles..=self.max_obstacles);
            for _ in 0..n {
                if rng.gen_bool(0.5) {
                    self.stamp_rect(&mut grid, rng);
                } else {
                    self.stamp_blob(&mut grid, rng);
                }
            }
        }
        let static_space = FreeSpace::new(grid.clone(), self.robot_radius);
        let start = random_free_center(&static_space, rng)?;
        let goal = random_free_center(&static_space, rng)?;
        if start.dist(goal) < self.min_separation * grid.diagonal() {
            return None;
        }

        let mut pedestrians = Vec::with_capacity(self.ped_count);
        let clear_of_ends = self.body_radius + self.robot_radius + self.goal_radius + 0.1;
        for _ in 0..self.ped_count {
            let ped = self.place_pedestrian(&grid, start, goal, rng)?;
            let c = ped.position();
            if c.dist(start) < clear_of_ends || c.dist(goal) < clear_of_ends {
                return None;
            }
            pedestrians.push(ped);
        }

        let scenario = Scenario {
            id: format!("scn-{index:04}"),
            grid,
            pedestrians,
            start,
            goal,
            goal_radius: self.goal_radius,
            robot_radius: self.robot_radius,
        };
        let space = scenario.free_space();
        scenario.validate_with(&space).ok()?;
        feasible(&scenario, &space).then_some(scenario)
    }

    fn stamp_rect(&self, grid: &mut OccupancyGrid, rng: &mut Rng) {
        let side = grid.width_m().min(grid.height_m());
        let w = rng.gen_range(0.08..0.22) * side;
        let h = rng.gen_range(0.08..0.22) * side;
        let x0 = rng.gen_range(0.0..grid.width_m() - w);
        let y0 = rng.gen_range(0.0..grid.height_m() - h);
        fill(grid, |p| {
            p.x >= x0 && p.x <= x0 + w && p.y >= y0 && p.y <= y0 + h
        });
    }

    fn stamp_blob(&self, grid: &mut OccupancyGrid, rng: &mut Rng) {
        let side = grid.width_m().min(grid.height_m());
        let cx = rng.gen_range(0.0..grid.width_m());
        let cy = rng.gen_range(0.0..grid.height_m());
        let lobes: Vec<(Point, f64)> = (0..rng.gen_range(2..=4))
            .map(|_| {
                let r = rng.gen_range(0.04..0.09) * side;
                let a = rng.gen_range(-PI..PI);
                let d = rng.gen_range(0.0..0.08) * side;
                (Point::new(cx + d * libm::cos(a), cy + d * libm::sin(a)), r)
            })
            .collect();
        fill(grid, |p| lobes.iter().any(|&(c, r)| p.dist(c) <= r));
    }

    /// Pedestrians stand near the start-goal line, mostly facing across it,
    /// so the shortest route passes through their front zone.
    fn place_pedestrian(
        &self,
        grid: &OccupancyGrid,
        start: Point,
        goal: Point,
        rng: &mut Rng,
    ) -> Option<Pedestrian> {
        let along = libm::atan2(goal.y - start.y, goal.x - start.x);
        let normal = Point::new(-libm::sin(along), libm::cos(along));
        for _ in 0..50 {
            let t = rng.gen_range(0.3..0.7);
            let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let offset = side * rng.gen_range(0.05..0.35);
            let base = start.lerp(goal, t);
            let c = Point::new(base.x + normal.x * offset, base.y + normal.y * offset);
            if !is_free(grid, self.body_radius, c) {
                continue;
            }
            let heading = if rng.gen_bool(0.8) {
                // facing the line: opposite to the side it stands on
                along - side * PI / 2.0 + rng.gen_range(-0.4..0.4)
            } else {
                rng.gen_range(-PI..PI)
            };
            let mut ped = Pedestrian::new(c.x, c.y, heading);
            ped.body_radius = self.body_radius;
            return Some(ped);
        }
        None
    }
}

fn fill(grid: &mut OccupancyGrid, inside: impl Fn(Point) -> bool) {
    for j in 0..grid.height() {
        for i in 0..grid.width() {
            if inside(grid.cell_center(i, j)) {
                grid.set(i, j, true);
            }
        }
    }
}

fn random_free_center(space: &FreeSpace, rng: &mut Rng) -> Option<Point> {
    let g = space.grid();
    for _ in 0..200 {
        let i = rng.gen_range(0..g.width());
        let j = rng.gen_range(0..g.height());
        if !space.blocked(i, j) {
            return Some(g.cell_center(i, j));
        }
    }
    None
}

/// 8-connected search over unblocked cells from the start cell to the goal
/// cell.
pub fn feasible(scenario: &Scenario, space: &FreeSpace) -> bool {
    let g = space.grid();
    let (Some(s), Some(t)) = (g.cell_of(scenario.start), g.cell_of(scenario.goal)) else {
        return false;
    };
    dijkstra(
        g.width(),
        g.height(),
        s,
        t,
        |i, j| !space.blocked(i, j),
        |_, _, l| l,
    )
    .is_some()
}
