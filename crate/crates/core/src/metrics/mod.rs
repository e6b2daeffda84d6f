//! Path comparison metrics: area dissimilarity, feature difference and
//! homotopy rate.

mod hsig;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use hsig::{reduce, HSignature, HomotopyObstacles};

use crate::features::FEATURE_DIM;
use crate::geometry::{point_segment_dist, resample_uniform, subdivide, Point};
use crate::scenario::{Path, Scenario, World};
use crate::{Error, Result};

/// Resampled point count of the first path in [`dissimilarity`].
pub const DISSIMILARITY_SAMPLES: usize = 100;
/// Spacing (m) used to aggregate features along a path.
pub const FEATURE_SPACING: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsConfig {
    /// Treat pedestrians as homotopy obstacles.
    pub pedestrians_as_obstacles: bool,
    /// Average dissimilarity over both directions.
    pub symmetric_dissimilarity: bool,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            pedestrians_as_obstacles: true,
            symmetric_dissimilarity: false,
        }
    }
}

fn dist_to_polyline(p: Point, line: &[Point]) -> f64 {
    if line.len() == 1 {
        return p.dist(line[0]);
    }
    line.windows(2)
        .map(|w| point_segment_dist(p, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Trapezoidal area between `a` (resampled) and `b`, divided by the
/// number of resampled segments of `a`.
pub fn dissimilarity_directed(a: &[Point], b: &[Point]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidPath(
            "dissimilarity needs two points per path".into(),
        ));
    }
    if a == b {
        // projection round-off would otherwise leave ~1e-17 residue
        return Ok(0.0);
    }
    let n = DISSIMILARITY_SAMPLES;
    let pts = resample_uniform(a, n);
    let d: Vec<f64> = pts.iter().map(|&p| dist_to_polyline(p, b)).collect();
    let area: f64 = (0..n - 1)
        .map(|k| (d[k] + d[k + 1]) * pts[k].dist(pts[k + 1]) / 2.0)
        .sum();
    Ok(area / (n - 1) as f64)
}

pub fn dissimilarity(a: &[Point], b: &[Point], symmetric: bool) -> Result<f64> {
    let ab = dissimilarity_directed(a, b)?;
    if symmetric {
        Ok(0.5 * (ab + dissimilarity_directed(b, a)?))
    } else {
        Ok(ab)
    }
}

/// Mean of each feature over the path subdivided at [`FEATURE_SPACING`].
pub fn path_features(world: &World, points: &[Point]) -> [f64; FEATURE_DIM] {
    let samples = subdivide(points, FEATURE_SPACING);
    let mut acc = [0.0; FEATURE_DIM];
    for &p in &samples {
        for (a, v) in acc.iter_mut().zip(world.features_at(p).to_array()) {
            *a += v;
        }
    }
    acc.map(|a| a / samples.len() as f64)
}

/// `(1/5)·Σ_j |a_j − b_j|`.
pub fn mean_abs_gap(a: &[f64; FEATURE_DIM], b: &[f64; FEATURE_DIM]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / FEATURE_DIM as f64
}

/// Feature gap between a demo and a plan in one scenario.
pub fn feature_gap(world: &World, demo: &Path, plan: &Path) -> f64 {
    mean_abs_gap(
        &path_features(world, &demo.points),
        &path_features(world, &plan.points),
    )
}

fn check_pairing(worlds: &[World], demos: &[Path], plans: &[Path]) -> Result<()> {
    if worlds.len() != demos.len() || worlds.len() != plans.len() {
        return Err(Error::Mismatch(alloc::format!(
            "{} scenarios, {} demos, {} plans",
            worlds.len(),
            demos.len(),
            plans.len()
        )));
    }
    if worlds.is_empty() {
        return Err(Error::Mismatch("no scenarios".into()));
    }
    for ((w, d), p) in worlds.iter().zip(demos).zip(plans) {
        if d.scenario_id != w.scenario.id || p.scenario_id != w.scenario.id {
            return Err(Error::Mismatch(alloc::format!(
                "scenario `{}` paired with demo `{}` and plan `{}`",
                w.scenario.id,
                d.scenario_id,
                p.scenario_id
            )));
        }
    }
    Ok(())
}

/// `F_fd = 1/(5S) Σ_i Σ_j |f_demo(i,j) − f_plan(i,j)|`.
pub fn feature_difference(worlds: &[World], demos: &[Path], plans: &[Path]) -> Result<f64> {
    check_pairing(worlds, demos, plans)?;
    let total: f64 = worlds
        .iter()
        .zip(demos)
        .zip(plans)
        .map(|((w, d), p)| feature_gap(w, d, p))
        .sum();
    Ok(total / worlds.len() as f64)
}

fn close_to_goal(scenario: &Scenario, start: Point, points: &[Point]) -> Vec<Point> {
    let mut v = Vec::with_capacity(points.len() + 2);
    if points[0] != start {
        v.push(start);
    }
    v.extend_from_slice(points);
    if *v.last().unwrap() != scenario.goal {
        v.push(scenario.goal);
    }
    v
}

pub fn h_signature(scenario: &Scenario, path: &Path, config: &MetricsConfig) -> Result<HSignature> {
    HomotopyObstacles::for_scenario(scenario, config.pedestrians_as_obstacles)
        .signature(&path.points)
}

/// True iff the two paths, each closed to the goal center, share a
/// reduced h-signature.
pub fn same_homotopy_with(
    scenario: &Scenario,
    obstacles: &HomotopyObstacles,
    a: &Path,
    b: &Path,
) -> Result<bool> {
    a.check_shape()?;
    b.check_shape()?;
    let tol = scenario.goal_radius;
    let (a0, b0) = (a.points[0], b.points[0]);
    let (a1, b1) = (*a.points.last().unwrap(), *b.points.last().unwrap());
    if a0.dist(b0) > tol {
        return Err(Error::EndpointMismatch(alloc::format!(
            "starts differ by {:.3} m",
            a0.dist(b0)
        )));
    }
    if a1.dist(scenario.goal) > tol || b1.dist(scenario.goal) > tol {
        return Err(Error::EndpointMismatch(
            "a path ends outside the goal region".into(),
        ));
    }
    let sa = obstacles.signature(&close_to_goal(scenario, a0, &a.points))?;
    let sb = obstacles.signature(&close_to_goal(scenario, a0, &b.points))?;
    Ok(sa == sb)
}

pub fn same_homotopy(
    scenario: &Scenario,
    a: &Path,
    b: &Path,
    config: &MetricsConfig,
) -> Result<bool> {
    let obstacles = HomotopyObstacles::for_scenario(scenario, config.pedestrians_as_obstacles);
    same_homotopy_with(scenario, &obstacles, a, b)
}

pub fn homotopy_rate(
    worlds: &[World],
    demos: &[Path],
    plans: &[Path],
    config: &MetricsConfig,
) -> Result<f64> {
    check_pairing(worlds, demos, plans)?;
    let mut hits = 0usize;
    for ((w, d), p) in worlds.iter().zip(demos).zip(plans) {
        hits += same_homotopy(w.scenario, d, p, config)? as usize;
    }
    Ok(hits as f64 / worlds.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub scenario_id: String,
    pub dissimilarity: f64,
    pub feature_difference: f64,
    pub homotopic: bool,
    pub path_length_demo: f64,
    pub path_length_plan: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub homotopy_rate: f64,
    pub mean_dissimilarity: f64,
    pub feature_difference: f64,
}

pub fn evaluate_pair(
    world: &World,
    demo: &Path,
    plan: &Path,
    config: &MetricsConfig,
) -> Result<MetricReport> {
    if demo.scenario_id != world.scenario.id || plan.scenario_id != world.scenario.id {
        return Err(Error::Mismatch(alloc::format!(
            "paths do not belong to `{}`",
            world.scenario.id
        )));
    }
    Ok(MetricReport {
        scenario_id: world.scenario.id.clone(),
        dissimilarity: dissimilarity(&plan.points, &demo.points, config.symmetric_dissimilarity)?,
        feature_difference: feature_gap(world, demo, plan),
        homotopic: same_homotopy(world.scenario, demo, plan, config)?,
        path_length_demo: demo.length(),
        path_length_plan: plan.length(),
    })
}

/// Aggregate over per-scenario reports; `None` when `reports` is empty.
pub fn aggregate(reports: &[MetricReport]) -> Option<Aggregate> {
    if reports.is_empty() {
        return None;
    }
    let n = reports.len() as f64;
    Some(Aggregate {
        homotopy_rate: reports.iter().filter(|r| r.homotopic).count() as f64 / n,
        mean_dissimilarity: reports.iter().map(|r| r.dissimilarity).sum::<f64>() / n,
        feature_difference: reports.iter().map(|r| r.feature_difference).sum::<f64>() / n,
    })
}
