//! World model: occupancy grid, pedestrians, start and goal, paths.

mod collision;
mod edt;
pub mod generate;
mod grid;
pub mod search;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use collision::{is_free, segment_free_exact, FreeSpace};
pub(crate) use edt::squared_edt;
pub use generate::{generate_scenarios, GenerateParams};
pub use grid::OccupancyGrid;

use crate::features::{DistanceField, FeatureConfig};
use crate::geometry::Point;
use crate::{Error, Result};

pub const DEFAULT_BODY_RADIUS: f64 = 0.3;
pub const DEFAULT_GOAL_RADIUS: f64 = 0.25;
pub const DEFAULT_ROBOT_RADIUS: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pedestrian {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
    pub body_radius: f64,
}

impl Pedestrian {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: wrap_angle(heading),
            speed: 0.0,
            body_radius: DEFAULT_BODY_RADIUS,
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Wraps to `[-π, π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = libm::fmod(a + PI, 2.0 * PI);
    let w = if w < 0.0 { w + 2.0 * PI } else { w };
    let out = w - PI;
    if out >= PI {
        -PI
    } else {
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub grid: OccupancyGrid,
    pub pedestrians: Vec<Pedestrian>,
    pub start: Point,
    pub goal: Point,
    pub goal_radius: f64,
    pub robot_radius: f64,
}

impl Scenario {
    /// Occupancy used for collision checks: static cells plus every cell
    /// overlapped by a pedestrian body.
    pub fn collision_grid(&self) -> OccupancyGrid {
        let mut g = self.grid.clone();
        for ped in &self.pedestrians {
            let c = ped.position();
            let r = ped.body_radius;
            let (Some((i0, i1)), Some((j0, j1))) = (
                g.span(c.x - r, c.x + r, g.width()),
                g.span(c.y - r, c.y + r, g.height()),
            ) else {
                continue;
            };
            for j in j0..=j1 {
                for i in i0..=i1 {
                    if g.cell_box(i as isize, j as isize).dist_to_point(c) < r {
                        g.set(i, j, true);
                    }
                }
            }
        }
        g
    }

    pub fn free_space(&self) -> FreeSpace {
        FreeSpace::new(self.collision_grid(), self.robot_radius)
    }

    pub fn in_goal(&self, p: Point) -> bool {
        p.dist(self.goal) <= self.goal_radius
    }

    /// Checks every scenario invariant against a prebuilt free space.
    pub fn validate_with(&self, space: &FreeSpace) -> Result<()> {
        let bad = |field, detail: String| Err(Error::InvalidScenario { field, detail });
        if self.id.is_empty() {
            return bad("id", "must not be empty".into());
        }
        if !(self.goal_radius.is_finite() && self.goal_radius > 0.0) {
            return bad(
                "goal_radius",
                format!("must be positive, got {}", self.goal_radius),
            );
        }
        if !(self.robot_radius.is_finite() && self.robot_radius >= 0.0) {
            return bad(
                "robot_radius",
                format!("must be non-negative, got {}", self.robot_radius),
            );
        }
        for (k, p) in self.pedestrians.iter().enumerate() {
            if !self.grid.contains(p.position()) {
                return bad(
                    "pedestrians",
                    format!("pedestrian {k} lies outside the map"),
                );
            }
            if !(p.body_radius.is_finite() && p.body_radius > 0.0) {
                return bad(
                    "pedestrians",
                    format!("pedestrian {k} has non-positive body_radius"),
                );
            }
            if !(p.speed.is_finite() && p.speed >= 0.0) {
                return bad("pedestrians", format!("pedestrian {k} has negative speed"));
            }
            if !(p.heading >= -PI && p.heading < PI) {
                return bad(
                    "pedestrians",
                    format!("pedestrian {k} heading outside [-pi, pi)"),
                );
            }
        }
        if !self.grid.contains(self.start) {
            return bad("start", "outside the map bounds".into());
        }
        if !self.grid.contains(self.goal) {
            return bad("goal", "outside the map bounds".into());
        }
        if self.start == self.goal {
            return bad("goal", "coincides with start".into());
        }
        if !space.point_in_unblocked_cell(self.start) {
            return bad(
                "start",
                "not in free space after robot-radius dilation".into(),
            );
        }
        if !space.point_in_unblocked_cell(self.goal) {
            return bad(
                "goal",
                "not in free space after robot-radius dilation".into(),
            );
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(&self.free_space())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathSource {
    DemoHuman,
    DemoOracle,
    Rrt,
    RrtStar,
    GanRrtStar,
}

impl PathSource {
    pub fn as_str(self) -> &'static str {
        match self {
            PathSource::DemoHuman => "demo_human",
            PathSource::DemoOracle => "demo_oracle",
            PathSource::Rrt => "rrt",
            PathSource::RrtStar => "rrt_star",
            PathSource::GanRrtStar => "gan_rrt_star",
        }
    }

    pub fn is_demo(self) -> bool {
        matches!(self, PathSource::DemoHuman | PathSource::DemoOracle)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub scenario_id: String,
    pub source: PathSource,
    pub points: Vec<Point>,
}

/// Start-point tolerance when checking path invariants.
pub const ENDPOINT_EPS: f64 = 1e-9;

impl Path {
    pub fn length(&self) -> f64 {
        crate::geometry::polyline_length(&self.points)
    }

    /// Shape-only checks that need no scenario.
    pub fn check_shape(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::InvalidPath(format!(
                "needs at least 2 points, got {}",
                self.points.len()
            )));
        }
        if let Some(k) = self.points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidPath(format!("point {k} is not finite")));
        }
        Ok(())
    }

    pub fn validate(&self, scenario: &Scenario, space: &FreeSpace) -> Result<()> {
        self.check_shape()?;
        if self.scenario_id != scenario.id {
            return Err(Error::InvalidPath(format!(
                "scenario_id `{}` does not match scenario `{}`",
                self.scenario_id, scenario.id
            )));
        }
        let first = self.points[0];
        if first.dist(scenario.start) > ENDPOINT_EPS {
            return Err(Error::InvalidPath(
                "first point is not the scenario start".into(),
            ));
        }
        let last = *self.points.last().unwrap();
        if !scenario.in_goal(last) {
            return Err(Error::InvalidPath(
                "last point is outside the goal region".into(),
            ));
        }
        for (k, w) in self.points.windows(2).enumerate() {
            if !space.segment_free(w[0], w[1]) {
                return Err(Error::InvalidPath(format!("segment {k} is in collision")));
            }
        }
        Ok(())
    }
}

/// Per-scenario precomputation shared by planners, the demonstrator and the
/// metrics: collision layer and obstacle distance field.
#[derive(Debug, Clone)]
pub struct World<'a> {
    pub scenario: &'a Scenario,
    pub space: FreeSpace,
    pub field: DistanceField,
    pub features: FeatureConfig,
}

impl<'a> World<'a> {
    pub fn new(scenario: &'a Scenario, features: FeatureConfig) -> Self {
        Self {
            scenario,
            space: scenario.free_space(),
            field: DistanceField::build(&scenario.grid),
            features,
        }
    }

    pub fn features_at(&self, p: Point) -> crate::features::FeatureVector {
        crate::features::extract_features(self.scenario, &self.field, &self.features, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        for a in [-10.0, -PI, -1.0, 0.0, 3.0, PI, 7.5, 100.0] {
            let w = wrap_angle(a);
            assert!((-PI..PI).contains(&w), "{a} -> {w}");
            assert!((libm::cos(w) - libm::cos(a)).abs() < 1e-9);
        }
        assert_eq!(wrap_angle(PI), -PI);
    }

    #[test]
    fn single_point_path_rejected() {
        let p = Path {
            scenario_id: "s".into(),
            source: PathSource::DemoHuman,
            points: alloc::vec![Point::new(1.0, 1.0)],
        };
        assert!(matches!(p.check_shape(), Err(Error::InvalidPath(_))));
    }
}
