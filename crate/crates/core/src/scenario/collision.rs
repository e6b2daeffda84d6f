//! Disk-robot collision checks against an occupancy grid.
//!
//! A point is free when its distance to every occupied cell square (and to
//! the region outside the map) exceeds the robot radius. [`FreeSpace`] adds
//! a precomputed dilated grid: a cell is *blocked* when any point inside it
//! is not free, so an unblocked cell certifies all of its points.

use alloc::vec::Vec;

use super::edt::squared_edt;
use super::grid::OccupancyGrid;
use crate::geometry::Point;

fn border_clear(grid: &OccupancyGrid, radius: f64, p: Point) -> bool {
    let d =
        p.x.min(p.y)
            .min(grid.width_m() - p.x)
            .min(grid.height_m() - p.y);
    d > radius
}

/// Exact circle-over-grid membership test for `X_free`.
pub fn is_free(grid: &OccupancyGrid, radius: f64, p: Point) -> bool {
    if !p.is_finite() || !grid.contains(p) || !border_clear(grid, radius, p) {
        return false;
    }
    let Some((i0, i1)) = grid.span(p.x - radius, p.x + radius, grid.width()) else {
        return false;
    };
    let Some((j0, j1)) = grid.span(p.y - radius, p.y + radius, grid.height()) else {
        return false;
    };
    for j in j0..=j1 {
        for i in i0..=i1 {
            if grid.occupied(i as isize, j as isize)
                && grid.cell_box(i as isize, j as isize).dist_to_point(p) <= radius
            {
                return false;
            }
        }
    }
    true
}

/// Exact test that every point of segment `ab` is free.
pub fn segment_free_exact(grid: &OccupancyGrid, radius: f64, a: Point, b: Point) -> bool {
    // the clear region inside the border is convex: endpoints suffice
    if !a.is_finite() || !b.is_finite() || !grid.contains(a) || !grid.contains(b) {
        return false;
    }
    if !border_clear(grid, radius, a) || !border_clear(grid, radius, b) {
        return false;
    }
    let Some((i0, i1)) = grid.span(a.x.min(b.x) - radius, a.x.max(b.x) + radius, grid.width())
    else {
        return false;
    };
    let Some((j0, j1)) = grid.span(a.y.min(b.y) - radius, a.y.max(b.y) + radius, grid.height())
    else {
        return false;
    };
    for j in j0..=j1 {
        for i in i0..=i1 {
            if grid.occupied(i as isize, j as isize)
                && grid.cell_box(i as isize, j as isize).dist_to_segment(a, b) <= radius
            {
                return false;
            }
        }
    }
    true
}

/// Grid plus robot radius with the dilated (blocked) cell layer.
#[derive(Debug, Clone)]
pub struct FreeSpace {
    grid: OccupancyGrid,
    radius: f64,
    blocked: Vec<bool>,
}

impl FreeSpace {
    pub fn new(grid: OccupancyGrid, radius: f64) -> Self {
        let (w, h) = (grid.width(), grid.height());
        // Distance between cell squares equals the center distance to the
        // nearest cell of the one-cell Chebyshev dilation of the obstacle.
        let near_occupied = |i: usize, j: usize| {
            let (i, j) = (i as isize, j as isize);
            (-1..=1).any(|dj| {
                (-1..=1).any(|di| {
                    let (x, y) = (i + di, j + dj);
                    x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && grid.occupied(x, y)
                })
            })
        };
        let sq = squared_edt(w, h, near_occupied);
        let res = grid.resolution();
        let mut blocked = alloc::vec![false; w * h];
        for j in 0..h {
            for i in 0..w {
                let edge = i.min(j).min(w - 1 - i).min(h - 1 - j) as f64 * res;
                let k = j * w + i;
                blocked[k] = grid.occupied(i as isize, j as isize)
                    || edge <= radius
                    || sq[k] * res * res <= radius * radius;
            }
        }
        Self {
            grid,
            radius,
            blocked,
        }
    }

    pub fn grid(&self) -> &OccupancyGrid {
        &self.grid
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    #[inline]
    pub fn blocked(&self, i: usize, j: usize) -> bool {
        self.blocked[j * self.grid.width() + i]
    }

    pub fn blocked_cells(&self) -> &[bool] {
        &self.blocked
    }

    pub fn point_in_unblocked_cell(&self, p: Point) -> bool {
        match self.grid.cell_of(p) {
            Some((i, j)) => !self.blocked(i, j),
            None => false,
        }
    }

    pub fn is_free(&self, p: Point) -> bool {
        match self.grid.cell_of(p) {
            None => false,
            Some((i, j)) if !self.blocked(i, j) => true,
            Some(_) => is_free(&self.grid, self.radius, p),
        }
    }

    /// Supercover traversal over the blocked layer, falling back to the exact
    /// test only when the segment touches a blocked cell.
    pub fn segment_free(&self, a: Point, b: Point) -> bool {
        let g = &self.grid;
        if !a.is_finite() || !b.is_finite() || !g.contains(a) || !g.contains(b) {
            return false;
        }
        // canonical endpoint order keeps the traversal symmetric
        let (a, b) = if (a.x, a.y) <= (b.x, b.y) {
            (a, b)
        } else {
            (b, a)
        };
        let res = g.resolution();
        let last_col = g.width() - 1;
        let last_row = g.height() - 1;
        let i0 = ((a.x / res) as usize).min(last_col);
        let i1 = ((b.x / res) as usize).min(last_col);
        let dx = b.x - a.x;
        let mut touches_blocked = false;
        'cols: for i in i0..=i1 {
            let (y_lo, y_hi) = if dx == 0.0 {
                (a.y.min(b.y), a.y.max(b.y))
            } else {
                let xa = a.x.max(i as f64 * res);
                let xb = b.x.min((i + 1) as f64 * res);
                let ya = a.y + (b.y - a.y) * ((xa - a.x) / dx);
                let yb = a.y + (b.y - a.y) * ((xb - a.x) / dx);
                (ya.min(yb), ya.max(yb))
            };
            let j0 = ((y_lo.max(0.0) / res) as usize).min(last_row);
            let j1 = ((y_hi.max(0.0) / res) as usize).min(last_row);
            for j in j0..=j1 {
                if self.blocked(i, j) {
                    touches_blocked = true;
                    break 'cols;
                }
            }
        }
        !touches_blocked || segment_free_exact(g, self.radius, a, b)
    }
}
