//! Planar points, segments and polyline helpers.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotates about the origin by `angle` radians (counter-clockwise).
    pub fn rotated(self, angle: f64) -> Point {
        let (s, c) = libm::sincos(angle);
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

/// Distance from `p` to the closed segment `ab`.
pub fn point_segment_dist(p: Point, a: Point, b: Point) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len_sq = dx * dx + dy * dy;
    if len_sq == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len_sq).clamp(0.0, 1.0);
    p.dist(Point::new(a.x + t * dx, a.y + t * dy))
}

/// Axis-aligned box `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn dist_to_point(&self, p: Point) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        libm::hypot(dx, dy)
    }

    /// Liang-Barsky style clip; true when the closed segment touches the box.
    pub fn intersects_segment(&self, a: Point, b: Point) -> bool {
        let d = Point::new(b.x - a.x, b.y - a.y);
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        for (p, q) in [
            (-d.x, a.x - self.min.x),
            (d.x, self.max.x - a.x),
            (-d.y, a.y - self.min.y),
            (d.y, self.max.y - a.y),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }

    pub fn dist_to_segment(&self, a: Point, b: Point) -> f64 {
        if self.intersects_segment(a, b) {
            return 0.0;
        }
        let corners = [
            self.min,
            Point::new(self.max.x, self.min.y),
            self.max,
            Point::new(self.min.x, self.max.y),
        ];
        let mut best = self.dist_to_point(a).min(self.dist_to_point(b));
        for c in corners {
            best = best.min(point_segment_dist(c, a, b));
        }
        best
    }
}

pub fn polyline_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Subdivides every segment into `ceil(len / spacing)` equal pieces, keeping
/// the original vertices. Applying it twice with the same spacing is a no-op.
pub fn subdivide(points: &[Point], spacing: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(points.len());
    let Some(&first) = points.first() else {
        return out;
    };
    out.push(first);
    for w in points.windows(2) {
        let len = w[0].dist(w[1]);
        let pieces = libm::ceil(len / spacing - 1e-9).max(1.0) as usize;
        for k in 1..pieces {
            out.push(w[0].lerp(w[1], k as f64 / pieces as f64));
        }
        out.push(w[1]);
    }
    out
}

/// `n` points spaced uniformly by arc length, including both ends.
pub fn resample_uniform(points: &[Point], n: usize) -> Vec<Point> {
    assert!(n >= 2 && !points.is_empty());
    let total = polyline_length(points);
    if total == 0.0 {
        return alloc::vec![points[0]; n];
    }
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    let mut walked = 0.0;
    for k in 0..n {
        let target = total * k as f64 / (n - 1) as f64;
        loop {
            let len = points[seg].dist(points[seg + 1]);
            if walked + len >= target || seg + 2 == points.len() {
                let t = if len > 0.0 {
                    ((target - walked) / len).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                out.push(points[seg].lerp(points[seg + 1], t));
                break;
            }
            walked += len;
            seg += 1;
        }
    }
    // the last sample lands on the endpoint modulo rounding
    out[n - 1] = *points.last().unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subdivide_counts_and_idempotence() {
        let p = [Point::new(0.0, 0.0), Point::new(2.0, 0.0)];
        let s = subdivide(&p, 0.2);
        assert_eq!(s.len(), 11);
        let bent = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.3),
            Point::new(1.7, 1.9),
        ];
        let once = subdivide(&bent, 0.2);
        let twice = subdivide(&once, 0.2);
        assert_eq!(once.len(), twice.len());
        for (a, b) in once.iter().zip(&twice) {
            assert!(a.dist(*b) < 1e-9);
        }
    }

    #[test]
    fn uniform_resample_spacing() {
        let p = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
        ];
        let r = resample_uniform(&p, 5);
        assert_eq!(r.len(), 5);
        assert!(r[2].dist(Point::new(1.0, 0.0)) < 1e-12);
        assert_eq!(r[4], Point::new(1.0, 1.0));
    }

    #[test]
    fn box_segment_distance() {
        let b = Aabb {
            min: Point::new(0.0, 0.0),
            max: Point::new(1.0, 1.0),
        };
        assert_eq!(
            b.dist_to_segment(Point::new(-1.0, 0.5), Point::new(2.0, 0.5)),
            0.0
        );
        let d = b.dist_to_segment(Point::new(-1.0, 2.0), Point::new(2.0, 2.0));
        assert!((d - 1.0).abs() < 1e-12);
        let d = b.dist_to_segment(Point::new(2.0, 3.0), Point::new(3.0, 2.0));
        assert!((d - 3.0 / libm::sqrt(2.0)).abs() < 1e-12);
        assert!((b.dist_to_point(Point::new(2.0, 2.0)) - libm::sqrt(2.0)).abs() < 1e-12);
    }
}
