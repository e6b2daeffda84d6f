use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{Aabb, Point};
use crate::{Error, Result};

pub const MIN_SIDE: usize = 8;

/// Row-major binary occupancy; row 0 spans `y ∈ [0, resolution)`.
/// Queries outside the grid report occupied.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    cells: Vec<u8>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, resolution: f64, cells: Vec<u8>) -> Result<Self> {
        if width < MIN_SIDE || height < MIN_SIDE {
            return Err(Error::InvalidGrid(alloc::format!(
                "dimensions {width}x{height} below the {MIN_SIDE}x{MIN_SIDE} minimum"
            )));
        }
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::InvalidGrid(alloc::format!(
                "resolution must be positive, got {resolution}"
            )));
        }
        if cells.len() != width * height {
            return Err(Error::InvalidGrid(alloc::format!(
                "expected {} cells, got {}",
                width * height,
                cells.len()
            )));
        }
        if let Some(v) = cells.iter().find(|&&v| v > 1) {
            return Err(Error::InvalidGrid(alloc::format!(
                "cell value {v} is not binary"
            )));
        }
        Ok(Self {
            width,
            height,
            resolution,
            cells,
        })
    }

    pub fn empty(width: usize, height: usize, resolution: f64) -> Result<Self> {
        Self::new(width, height, resolution, vec![0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn width_m(&self) -> f64 {
        self.width as f64 * self.resolution
    }

    pub fn height_m(&self) -> f64 {
        self.height as f64 * self.resolution
    }

    pub fn diagonal(&self) -> f64 {
        libm::hypot(self.width_m(), self.height_m())
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    #[inline]
    pub fn occupied(&self, i: isize, j: isize) -> bool {
        if i < 0 || j < 0 || i >= self.width as isize || j >= self.height as isize {
            return true;
        }
        self.cells[j as usize * self.width + i as usize] != 0
    }

    pub fn set(&mut self, i: usize, j: usize, occupied: bool) {
        let k = self.index(i, j);
        self.cells[k] = occupied as u8;
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= self.width_m() && p.y <= self.height_m()
    }

    /// Cell holding `p`; points on the far map edge belong to the last cell.
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        if !p.is_finite() || !self.contains(p) {
            return None;
        }
        let i = ((p.x / self.resolution) as usize).min(self.width - 1);
        let j = ((p.y / self.resolution) as usize).min(self.height - 1);
        Some((i, j))
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point {
        Point::new(
            (i as f64 + 0.5) * self.resolution,
            (j as f64 + 0.5) * self.resolution,
        )
    }

    pub fn cell_box(&self, i: isize, j: isize) -> Aabb {
        let r = self.resolution;
        Aabb {
            min: Point::new(i as f64 * r, j as f64 * r),
            max: Point::new((i + 1) as f64 * r, (j + 1) as f64 * r),
        }
    }

    /// Inclusive cell index range overlapping `[lo, hi]` along one axis,
    /// clamped to `[0, n)`.
    pub(crate) fn span(&self, lo: f64, hi: f64, n: usize) -> Option<(usize, usize)> {
        let a = libm::floor(lo / self.resolution);
        let b = libm::floor(hi / self.resolution);
        if b < 0.0 || a >= n as f64 {
            return None;
        }
        Some((a.max(0.0) as usize, (b as usize).min(n - 1)))
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c != 0).count()
    }
}
