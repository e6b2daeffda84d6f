//! 8-connected Dijkstra over grid cells.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    cell: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.cell.cmp(&other.cell))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub const NEIGHBORS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Result of a grid search: the cell sequence from source to target and its
/// accumulated cost.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub cells: Vec<(usize, usize)>,
    pub cost: f64,
}

/// Shortest path between two cells. `passable` gates cells; diagonal moves
/// additionally require both orthogonal neighbours to be passable.
/// `step_cost(from, to, length_in_cells)` must be positive. Ties resolve
/// toward the lower row-major cell index.
pub fn dijkstra(
    width: usize,
    height: usize,
    source: (usize, usize),
    target: (usize, usize),
    passable: impl Fn(usize, usize) -> bool,
    mut step_cost: impl FnMut((usize, usize), (usize, usize), f64) -> f64,
) -> Option<GridPath> {
    if !passable(source.0, source.1) || !passable(target.0, target.1) {
        return None;
    }
    let n = width * height;
    let idx = |(i, j): (usize, usize)| j * width + i;
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[idx(source)] = 0.0;
    heap.push(Reverse(Entry {
        cost: 0.0,
        cell: idx(source),
    }));
    let goal = idx(target);
    while let Some(Reverse(Entry { cost, cell })) = heap.pop() {
        if done[cell] {
            continue;
        }
        done[cell] = true;
        if cell == goal {
            break;
        }
        let (ci, cj) = ((cell % width) as isize, (cell / width) as isize);
        for (di, dj) in NEIGHBORS {
            let (ni, nj) = (ci + di, cj + dj);
            if ni < 0 || nj < 0 || ni >= width as isize || nj >= height as isize {
                continue;
            }
            let (ni, nj) = (ni as usize, nj as usize);
            if !passable(ni, nj) {
                continue;
            }
            let diagonal = di != 0 && dj != 0;
            if diagonal && !(passable(ci as usize, nj) && passable(ni, cj as usize)) {
                continue;
            }
            let next = nj * width + ni;
            if done[next] {
                continue;
            }
            let len = if diagonal {
                core::f64::consts::SQRT_2
            } else {
                1.0
            };
            let c = cost + step_cost((ci as usize, cj as usize), (ni, nj), len);
            if c < dist[next] || (c == dist[next] && cell < prev[next]) {
                dist[next] = c;
                prev[next] = cell;
                heap.push(Reverse(Entry {
                    cost: c,
                    cell: next,
                }));
            }
        }
    }
    if !dist[goal].is_finite() {
        return None;
    }
    let mut cells = Vec::new();
    let mut at = goal;
    while at != usize::MAX {
        cells.push((at % width, at / width));
        at = prev[at];
    }
    cells.reverse();
    Some(GridPath {
        cells,
        cost: dist[goal],
    })
}
