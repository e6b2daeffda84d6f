//! The five socially aware node features.
//!
//! * `f1` distance to goal over the map diagonal,
//! * `f2` clamped clearance to the nearest static obstacle,
//! * `f3`/`f4` front/back proxemic Gaussians of the nearest-threat pedestrian,
//! * `f5` right-side Gaussian (pedestrian frame, `y' <= 0`).
//!
//! Pedestrian terms aggregate by max so every component stays in `[0, 1]`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::scenario::{squared_edt, OccupancyGrid, Scenario};

pub const FEATURE_DIM: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
    pub f5: f64,
}

impl FeatureVector {
    pub fn to_array(self) -> [f64; FEATURE_DIM] {
        [self.f1, self.f2, self.f3, self.f4, self.f5]
    }

    pub fn from_array(a: [f64; FEATURE_DIM]) -> Self {
        Self {
            f1: a[0],
            f2: a[1],
            f3: a[2],
            f4: a[3],
            f5: a[4],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub sigma_front: f64,
    pub sigma_back: f64,
    pub sigma_side: f64,
    pub sigma_side_lon: f64,
    pub d_clamp: f64,
    /// Use both lateral sides for `f5` instead of the right side only.
    pub lateral_symmetric: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            sigma_front: 1.2,
            sigma_back: 0.6,
            sigma_side: 0.45,
            sigma_side_lon: 0.9,
            d_clamp: 2.0,
            lateral_symmetric: false,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> crate::Result<()> {
        for (field, v) in [
            ("sigma_front", self.sigma_front),
            ("sigma_back", self.sigma_back),
            ("sigma_side", self.sigma_side),
            ("sigma_side_lon", self.sigma_side_lon),
            ("d_clamp", self.d_clamp),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(crate::Error::InvalidConfig {
                    field,
                    detail: alloc::format!("must be positive, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// Euclidean distance (meters) from each cell center to the nearest
/// occupied cell center; `+inf` when the grid has no obstacles.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    width: usize,
    height: usize,
    resolution: f64,
    dist: Vec<f64>,
}

impl DistanceField {
    pub fn build(grid: &OccupancyGrid) -> Self {
        let sq = squared_edt(grid.width(), grid.height(), |i, j| {
            grid.occupied(i as isize, j as isize)
        });
        let r = grid.resolution();
        Self {
            width: grid.width(),
            height: grid.height(),
            resolution: r,
            dist: sq.into_iter().map(|d| libm::sqrt(d) * r).collect(),
        }
    }

    pub fn at_cell(&self, i: usize, j: usize) -> f64 {
        self.dist[j * self.width + i]
    }

    /// Value of the cell containing `p` (clamped to the grid).
    pub fn at(&self, p: Point) -> f64 {
        let i = libm::floor(p.x / self.resolution).clamp(0.0, (self.width - 1) as f64) as usize;
        let j = libm::floor(p.y / self.resolution).clamp(0.0, (self.height - 1) as f64) as usize;
        self.at_cell(i, j)
    }
}

#[inline]
fn gauss(x: f64, y: f64, sx: f64, sy: f64) -> f64 {
    libm::exp(-(x * x / (2.0 * sx * sx) + y * y / (2.0 * sy * sy)))
}

/// Pedestrian terms `(f3, f4, f5)` at `p`.
pub fn pedestrian_terms(scenario: &Scenario, cfg: &FeatureConfig, p: Point) -> (f64, f64, f64) {
    let (mut f3, mut f4, mut f5) = (0.0f64, 0.0f64, 0.0f64);
    for ped in &scenario.pedestrians {
        let dx = p.x - ped.x;
        let dy = p.y - ped.y;
        let (s, c) = libm::sincos(ped.heading);
        let fwd = dx * c + dy * s;
        let left = -dx * s + dy * c;
        if fwd >= 0.0 {
            f3 = f3.max(gauss(fwd, left, cfg.sigma_front, cfg.sigma_side));
        } else {
            f4 = f4.max(gauss(fwd, left, cfg.sigma_back, cfg.sigma_side));
        }
        if cfg.lateral_symmetric || left <= 0.0 {
            f5 = f5.max(gauss(fwd, left, cfg.sigma_side_lon, cfg.sigma_side));
        }
    }
    (f3, f4, f5)
}

pub fn extract_features(
    scenario: &Scenario,
    field: &DistanceField,
    cfg: &FeatureConfig,
    p: Point,
) -> FeatureVector {
    let diag = scenario.grid.diagonal();
    let f1 = (p.dist(scenario.goal) / diag).min(1.0);
    let f2 = field.at(p).min(cfg.d_clamp) / cfg.d_clamp;
    let (f3, f4, f5) = pedestrian_terms(scenario, cfg, p);
    FeatureVector { f1, f2, f3, f4, f5 }
}
