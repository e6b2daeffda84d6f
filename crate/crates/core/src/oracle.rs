//! Grid-search demonstrator under a handcrafted social cost.
//!
//! Step cost between cell centers is
//! `length · (1 + w_clearance·(1 − f2) + w_pedestrian·(f3 + f4 + f5))`
//! with features evaluated at the destination cell. The grid path is then
//! shortcut greedily, accepting a shortcut only when it stays collision-free
//! and does not raise the integrated social cost.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::scenario::search::{dijkstra, GridPath};
use crate::scenario::{Path, PathSource, World};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub w_clearance: f64,
    pub w_pedestrian: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            w_clearance: 2.0,
            w_pedestrian: 5.0,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("w_clearance", self.w_clearance),
            ("w_pedestrian", self.w_pedestrian),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidConfig {
                    field,
                    detail: alloc::format!("{v}"),
                });
            }
        }
        Ok(())
    }
}

/// Per-cell multiplier of the social step cost.
#[derive(Debug, Clone)]
pub struct SocialCostMap {
    width: usize,
    height: usize,
    resolution: f64,
    factor: Vec<f64>,
}

impl SocialCostMap {
    pub fn build(world: &World, config: &OracleConfig) -> Self {
        let g = world.space.grid();
        let mut factor = Vec::with_capacity(g.width() * g.height());
        for j in 0..g.height() {
            for i in 0..g.width() {
                let f = world.features_at(g.cell_center(i, j));
                factor.push(
                    1.0 + config.w_clearance * (1.0 - f.f2)
                        + config.w_pedestrian * (f.f3 + f.f4 + f.f5),
                );
            }
        }
        Self {
            width: g.width(),
            height: g.height(),
            resolution: g.resolution(),
            factor,
        }
    }

    pub fn cell(&self, i: usize, j: usize) -> f64 {
        self.factor[j * self.width + i]
    }

    pub fn at(&self, p: Point) -> f64 {
        let i = libm::floor(p.x / self.resolution).clamp(0.0, (self.width - 1) as f64) as usize;
        let j = libm::floor(p.y / self.resolution).clamp(0.0, (self.height - 1) as f64) as usize;
        self.cell(i, j)
    }

    /// Midpoint-rule integral of the factor along segment `ab`, sampled at
    /// a quarter cell.
    pub fn segment_integral(&self, a: Point, b: Point) -> f64 {
        let len = a.dist(b);
        if len == 0.0 {
            return 0.0;
        }
        let n = libm::ceil(len / (self.resolution * 0.25)).max(1.0) as usize;
        let h = len / n as f64;
        (0..n)
            .map(|k| self.at(a.lerp(b, (k as f64 + 0.5) / n as f64)) * h)
            .sum()
    }

    pub fn path_integral(&self, points: &[Point]) -> f64 {
        points
            .windows(2)
            .map(|w| self.segment_integral(w[0], w[1]))
            .sum()
    }
}

/// Cheapest 8-connected cell path from the start cell to the goal cell.
pub fn oracle_grid_path(world: &World, costs: &SocialCostMap) -> Result<GridPath> {
    let s = world.scenario;
    let g = world.space.grid();
    let infeasible = || Error::Infeasible(s.id.clone());
    let src = g.cell_of(s.start).ok_or_else(infeasible)?;
    let dst = g.cell_of(s.goal).ok_or_else(infeasible)?;
    let res = g.resolution();
    dijkstra(
        g.width(),
        g.height(),
        src,
        dst,
        |i, j| !world.space.blocked(i, j),
        |_, (i, j), len| len * res * costs.cell(i, j),
    )
    .ok_or_else(infeasible)
}

/// Greedy shortcutting: from each kept vertex jump to the farthest later
/// vertex whose straight segment is free and no more expensive.
pub fn shortcut(world: &World, costs: &SocialCostMap, points: &[Point]) -> Vec<Point> {
    let n = points.len();
    if n <= 2 {
        return points.to_vec();
    }
    // prefix integrals along the original polyline
    let mut prefix = Vec::with_capacity(n);
    prefix.push(0.0);
    for w in points.windows(2) {
        let last = *prefix.last().unwrap();
        prefix.push(last + costs.segment_integral(w[0], w[1]));
    }
    let mut out = Vec::new();
    out.push(points[0]);
    let mut i = 0;
    while i < n - 1 {
        let mut next = i + 1;
        for j in i + 2..n {
            if !world.space.segment_free(points[i], points[j]) {
                break;
            }
            if costs.segment_integral(points[i], points[j]) <= prefix[j] - prefix[i] {
                next = j;
            }
        }
        out.push(points[next]);
        i = next;
    }
    out
}

/// Converts a cell path into meters, pinning the exact start and goal.
pub fn cells_to_points(world: &World, cells: &[(usize, usize)]) -> Vec<Point> {
    let s = world.scenario;
    let g = world.space.grid();
    let mut pts = Vec::with_capacity(cells.len() + 2);
    pts.push(s.start);
    for &(i, j) in cells {
        let c = g.cell_center(i, j);
        if pts.last() != Some(&c) {
            pts.push(c);
        }
    }
    if pts.last() != Some(&s.goal) {
        pts.push(s.goal);
    }
    pts
}

pub fn oracle_demo(world: &World, config: &OracleConfig) -> Result<Path> {
    config.validate()?;
    let costs = SocialCostMap::build(world, config);
    let grid_path = oracle_grid_path(world, &costs)?;
    let raw = cells_to_points(world, &grid_path.cells);
    let points = shortcut(world, &costs, &raw);
    Ok(Path {
        scenario_id: world.scenario.id.clone(),
        source: PathSource::DemoOracle,
        points,
    })
}
