//! Homotopy-class signatures from signed crossings of vertical rays.
//!
//! Each obstacle owns a ray cast upward (+y) from a representative point
//! strictly inside it. Walking the path, a crossing of ray `k` in the +x
//! direction appends `+k`, in the −x direction `−k`; the word is then
//! freely reduced. Equal reduced words mean equal homotopy classes for
//! paths sharing both endpoints.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::scenario::{squared_edt, OccupancyGrid, Scenario};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct HSignature {
    pub word: Vec<i32>,
}

impl HSignature {
    pub fn is_reduced(&self) -> bool {
        self.word.windows(2).all(|w| w[0] != -w[1])
    }
}

/// Stack-based free reduction (cancels adjacent `k, −k`).
pub fn reduce(word: impl IntoIterator<Item = i32>) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::new();
    for s in word {
        if out.last() == Some(&-s) {
            out.pop();
        } else {
            out.push(s);
        }
    }
    out
}

/// Representative points of the homotopy obstacles, identifier `k + 1` for
/// entry `k`: occupied 4-connected components in scanline order of their
/// representative cells, then pedestrians in list order.
#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyObstacles {
    pub reps: Vec<Point>,
    width_m: f64,
    height_m: f64,
}

impl HomotopyObstacles {
    pub fn from_grid(grid: &OccupancyGrid) -> Self {
        let (w, h) = (grid.width(), grid.height());
        let occ = |i: usize, j: usize| grid.cells()[j * w + i] != 0;
        // depth inside an obstacle = distance to the nearest free cell
        let depth = squared_edt(w, h, |i, j| !occ(i, j));
        let mut label = vec![usize::MAX; w * h];
        let mut reps: Vec<(usize, usize)> = Vec::new();
        let mut stack = Vec::new();
        for j in 0..h {
            for i in 0..w {
                if !occ(i, j) || label[j * w + i] != usize::MAX {
                    continue;
                }
                let id = reps.len();
                let mut best = (i, j);
                label[j * w + i] = id;
                stack.push((i, j));
                while let Some((ci, cj)) = stack.pop() {
                    let d = depth[cj * w + ci];
                    let bd = depth[best.1 * w + best.0];
                    if d > bd || (d == bd && (cj, ci) < (best.1, best.0)) {
                        best = (ci, cj);
                    }
                    let nbrs = [
                        (ci.wrapping_sub(1), cj),
                        (ci + 1, cj),
                        (ci, cj.wrapping_sub(1)),
                        (ci, cj + 1),
                    ];
                    for (ni, nj) in nbrs {
                        if ni < w && nj < h && occ(ni, nj) && label[nj * w + ni] == usize::MAX {
                            label[nj * w + ni] = id;
                            stack.push((ni, nj));
                        }
                    }
                }
                reps.push(best);
            }
        }
        reps.sort_by_key(|&(i, j)| (j, i));
        Self {
            reps: reps
                .into_iter()
                .map(|(i, j)| grid.cell_center(i, j))
                .collect(),
            width_m: grid.width_m(),
            height_m: grid.height_m(),
        }
    }

    pub fn for_scenario(scenario: &Scenario, include_pedestrians: bool) -> Self {
        let mut o = Self::from_grid(&scenario.grid);
        if include_pedestrians {
            o.reps
                .extend(scenario.pedestrians.iter().map(|p| p.position()));
        }
        o
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn signature(&self, points: &[Point]) -> Result<HSignature> {
        if let Some(k) = points.iter().position(|p| {
            !(p.is_finite()
                && p.x >= 0.0
                && p.y >= 0.0
                && p.x <= self.width_m
                && p.y <= self.height_m)
        }) {
            return Err(Error::OutOfBounds(k));
        }
        let mut raw = Vec::new();
        let mut hits: Vec<(f64, i32)> = Vec::new();
        for w in points.windows(2) {
            let (p, q) = (w[0], w[1]);
            hits.clear();
            for (k, r) in self.reps.iter().enumerate() {
                let (sp, sq) = (p.x >= r.x, q.x >= r.x);
                if sp == sq {
                    continue;
                }
                let t = (r.x - p.x) / (q.x - p.x);
                let y = p.y + t * (q.y - p.y);
                if y > r.y {
                    let id = k as i32 + 1;
                    hits.push((t, if q.x > p.x { id } else { -id }));
                }
            }
            // coincident rays are ordered as if shifted right by their id
            let forward = q.x > p.x;
            hits.sort_by(|a, b| {
                a.0.total_cmp(&b.0).then_with(|| {
                    let o = a.1.abs().cmp(&b.1.abs());
                    if forward {
                        o
                    } else {
                        o.reverse()
                    }
                })
            });
            raw.extend(hits.iter().map(|h| h.1));
        }
        Ok(HSignature { word: reduce(raw) })
    }
}
