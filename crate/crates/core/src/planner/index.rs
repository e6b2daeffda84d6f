//! Uniform bucket grid for nearest / radius queries. Results are identical
//! to a linear scan: minimum squared distance, ties to the lowest index,
//! radius hits in ascending index order.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::Point;

#[derive(Debug, Clone)]
pub struct BucketIndex {
    size: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<usize>>,
    points: Vec<Point>,
}

impl BucketIndex {
    pub fn new(width_m: f64, height_m: f64, size: f64) -> Self {
        let cols = (libm::ceil(width_m / size) as usize).max(1);
        let rows = (libm::ceil(height_m / size) as usize).max(1);
        Self {
            size,
            cols,
            rows,
            buckets: vec![Vec::new(); cols * rows],
            points: Vec::new(),
        }
    }

    fn bucket(&self, p: Point) -> (usize, usize) {
        let c = libm::floor(p.x / self.size).clamp(0.0, (self.cols - 1) as f64) as usize;
        let r = libm::floor(p.y / self.size).clamp(0.0, (self.rows - 1) as f64) as usize;
        (c, r)
    }

    /// Points must be inserted with consecutive indices starting at 0.
    pub fn insert(&mut self, p: Point) -> usize {
        let idx = self.points.len();
        let (c, r) = self.bucket(p);
        self.buckets[r * self.cols + c].push(idx);
        self.points.push(p);
        idx
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn nearest(&self, q: Point) -> Option<usize> {
        if self.points.is_empty() {
            return None;
        }
        let (qc, qr) = self.bucket(q);
        let mut best: Option<(f64, usize)> = None;
        let max_ring = self.cols.max(self.rows);
        for k in 0..=max_ring {
            if let Some((d, _)) = best {
                // everything in ring k lies at least (k-1)·size away
                let bound = (k as f64 - 1.0) * self.size;
                if bound > 0.0 && libm::sqrt(d) < bound {
                    break;
                }
            }
            self.for_ring(qc, qr, k, |idx| {
                let d = self.points[idx].dist_sq(q);
                match best {
                    Some((bd, bi)) if d > bd || (d == bd && idx > bi) => {}
                    _ => best = Some((d, idx)),
                }
            });
        }
        best.map(|(_, i)| i)
    }

    /// Indices with `dist(q, p) <= radius`, ascending.
    pub fn within(&self, q: Point, radius: f64, out: &mut Vec<usize>) {
        out.clear();
        let r2 = radius * radius;
        let c0 = libm::floor((q.x - radius) / self.size).max(0.0) as usize;
        let r0 = libm::floor((q.y - radius) / self.size).max(0.0) as usize;
        let c1 = (libm::floor((q.x + radius) / self.size).max(0.0) as usize).min(self.cols - 1);
        let r1 = (libm::floor((q.y + radius) / self.size).max(0.0) as usize).min(self.rows - 1);
        for r in r0..=r1 {
            for c in c0..=c1 {
                for &idx in &self.buckets[r * self.cols + c] {
                    if self.points[idx].dist_sq(q) <= r2 {
                        out.push(idx);
                    }
                }
            }
        }
        out.sort_unstable();
    }

    fn for_ring(&self, qc: usize, qr: usize, k: usize, mut f: impl FnMut(usize)) {
        let (qc, qr, k) = (qc as isize, qr as isize, k as isize);
        for r in qr - k..=qr + k {
            if r < 0 || r >= self.rows as isize {
                continue;
            }
            let edge_row = r == qr - k || r == qr + k;
            let mut c = qc - k;
            while c <= qc + k {
                if c >= 0 && c < self.cols as isize {
                    for &idx in &self.buckets[r as usize * self.cols + c as usize] {
                        f(idx);
                    }
                }
                c += if edge_row || k == 0 { 1 } else { 2 * k };
            }
        }
    }
}
