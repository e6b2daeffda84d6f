//! Brute-force homotopy test on 4-connected cell paths.
//!
//! Free cells are vertices, side-adjacent free cells are edges and every
//! all-free 2×2 block is a square face. Two paths with the same endpoints
//! are homotopic iff one deforms into the other by square flips (moving the
//! corner of a turn across a free 2×2 block) and backtrack insertions or
//! removals. The square complex of a planar grid is nonpositively curved,
//! so a path that is not a geodesic of the universal cover always has a
//! flip-equivalent with an adjacent backtrack. Reduction therefore searches
//! the flip class until a backtrack shows up, cancels it and repeats; the
//! result is a geodesic. Two geodesics are homotopic iff a flip search
//! connects them.

use std::collections::{HashSet, VecDeque};

/// Search cap per flip class; hitting it aborts the test rather than guessing.
const MAX_STATES: usize = 4_000_000;

pub struct CellGrid {
    pub w: usize,
    pub h: usize,
    pub blocked: Vec<bool>,
}

impl CellGrid {
    pub fn free(&self, i: isize, j: isize) -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < self.w
            && (j as usize) < self.h
            && !self.blocked[j as usize * self.w + i as usize]
    }

    fn xy(&self, c: u16) -> (isize, isize) {
        (
            (c as usize % self.w) as isize,
            (c as usize / self.w) as isize,
        )
    }

    fn at(&self, i: isize, j: isize) -> u16 {
        (j as usize * self.w + i as usize) as u16
    }

    /// All paths one square flip away from `p`.
    fn flips<'a>(&'a self, p: &'a [u16]) -> impl Iterator<Item = Vec<u16>> + 'a {
        (1..p.len().saturating_sub(1)).filter_map(move |k| {
            let (a, b, c) = (self.xy(p[k - 1]), self.xy(p[k]), self.xy(p[k + 1]));
            if (a.0 - c.0).abs() != 1 || (a.1 - c.1).abs() != 1 {
                return None;
            }
            let x = (a.0 + c.0 - b.0, a.1 + c.1 - b.1);
            if !self.free(x.0, x.1) {
                return None;
            }
            let mut q = p.to_vec();
            q[k] = self.at(x.0, x.1);
            Some(q)
        })
    }

    /// Cancels every `u v u` pattern with a stack pass.
    fn free_reduce(p: &[u16]) -> Vec<u16> {
        let mut out: Vec<u16> = Vec::with_capacity(p.len());
        for &c in p {
            if out.len() >= 2 && out[out.len() - 2] == c {
                out.pop();
            } else {
                out.push(c);
            }
        }
        out
    }

    fn has_backtrack(p: &[u16]) -> bool {
        p.windows(3).any(|w| w[0] == w[2])
    }

    /// Geodesic representative of the homotopy class of `p`.
    pub fn reduce(&self, p: &[u16]) -> Vec<u16> {
        let mut cur = Self::free_reduce(p);
        'outer: loop {
            let mut seen: HashSet<Vec<u16>> = HashSet::new();
            let mut queue = VecDeque::new();
            seen.insert(cur.clone());
            queue.push_back(cur.clone());
            while let Some(q) = queue.pop_front() {
                for n in self.flips(&q) {
                    if Self::has_backtrack(&n) {
                        cur = Self::free_reduce(&n);
                        continue 'outer;
                    }
                    if seen.insert(n.clone()) {
                        assert!(seen.len() < MAX_STATES, "flip class too large");
                        queue.push_back(n);
                    }
                }
            }
            return cur;
        }
    }

    pub fn homotopic(&self, a: &[u16], b: &[u16]) -> bool {
        assert_eq!(a.first(), b.first());
        assert_eq!(a.last(), b.last());
        let (ra, rb) = (self.reduce(a), self.reduce(b));
        if ra.len() != rb.len() {
            return false;
        }
        let mut seen: HashSet<Vec<u16>> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(ra.clone());
        queue.push_back(ra);
        while let Some(q) = queue.pop_front() {
            if q == rb {
                return true;
            }
            for n in self.flips(&q) {
                if seen.insert(n.clone()) {
                    assert!(seen.len() < MAX_STATES, "flip class too large");
                    queue.push_back(n);
                }
            }
        }
        false
    }
}
