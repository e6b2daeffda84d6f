//! Exact squared Euclidean distance transform on the cell lattice
//! (lower envelope of parabolas, separable in x then y).

use alloc::vec;
use alloc::vec::Vec;

pub const INF: f64 = f64::INFINITY;

fn transform_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    let mut first = None;
    for (q, &fq) in f.iter().enumerate() {
        if fq.is_finite() {
            first = Some(q);
            break;
        }
    }
    let Some(first) = first else {
        out.iter_mut().for_each(|o| *o = INF);
        return;
    };
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = INF;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let s =
                ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                // the previous parabola is never the lowest
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = INF;
            break;
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Squared distance (in cells) from every cell center to the nearest seed
/// cell center. `INF` everywhere when there are no seeds.
pub fn squared_edt(width: usize, height: usize, seed: impl Fn(usize, usize) -> bool) -> Vec<f64> {
    let n = width.max(height);
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut col_in = vec![0.0f64; height];
    let mut col_out = vec![0.0f64; height];
    let mut stage = vec![INF; width * height];
    for i in 0..width {
        for (j, c) in col_in.iter_mut().enumerate() {
            *c = if seed(i, j) { 0.0 } else { INF };
        }
        transform_1d(&col_in, &mut col_out, &mut v, &mut z);
        for j in 0..height {
            stage[j * width + i] = col_out[j];
        }
    }
    let mut out = vec![INF; width * height];
    for j in 0..height {
        let row = &stage[j * width..(j + 1) * width];
        transform_1d(row, &mut out[j * width..(j + 1) * width], &mut v, &mut z);
    }
    out
}
