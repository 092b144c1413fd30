#![allow(dead_code)]

use bkm_core::jet::{MULTI_INDICES, N_COEFFS};

// 7-point central stencils on offsets -3..=3.
const D: [[f64; 7]; 4] = [
    [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
    [-1.0 / 60.0, 9.0 / 60.0, -45.0 / 60.0, 0.0, 45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0],
    [2.0 / 180.0, -27.0 / 180.0, 270.0 / 180.0, -490.0 / 180.0, 270.0 / 180.0, -27.0 / 180.0, 2.0 / 180.0],
    [1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0],
];
const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];

/// Taylor coefficients of `f` at `(t, x)` by tensor-product central differences.
pub fn fd_taylor(f: impl Fn(f64, f64) -> f64, t: f64, x: f64, h: f64) -> [f64; N_COEFFS] {
    let mut grid = [[0.0; 7]; 7];
    for (i, row) in grid.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = f(t + (i as f64 - 3.0) * h, x + (j as f64 - 3.0) * h);
        }
    }
    let mut out = [0.0; N_COEFFS];
    for (k, &(a, b)) in MULTI_INDICES.iter().enumerate() {
        let mut acc = 0.0;
        for i in 0..7 {
            for j in 0..7 {
                acc += D[a][i] * D[b][j] * grid[i][j];
            }
        }
        out[k] = acc / (h.powi((a + b) as i32) * FACT[a] * FACT[b]);
    }
    out
}

/// Worst relative difference, each coefficient judged against the larger of itself
/// and the largest coefficient of the same total order.
pub fn worst_rel(a: &[f64; N_COEFFS], b: &[f64; N_COEFFS]) -> f64 {
    let mut scale = [0.0f64; 4];
    for (k, &(p, q)) in MULTI_INDICES.iter().enumerate() {
        scale[p + q] = scale[p + q].max(a[k].abs()).max(b[k].abs());
    }
    MULTI_INDICES
        .iter()
        .enumerate()
        .map(|(k, &(p, q))| {
            let s = scale[p + q];
            if s == 0.0 {
                (a[k] - b[k]).abs()
            } else {
                (a[k] - b[k]).abs() / s
            }
        })
        .fold(0.0, f64::max)
}

pub fn psi1(z: f64, x: f64) -> f64 {
    (2.0 * z.hypot(x).cosh()).ln()
}

pub fn psi2(t: f64, x: f64) -> f64 {
    (2.0 * t.cosh() + 2.0 * (t * t + 4.0 * x * x).sqrt().cosh()).ln()
}

pub fn psi3(t: f64, x: f64, first: f64) -> f64 {
    let a = 2.0 * (t * t + t * x + x * x).sqrt();
    let b = 2.0 * (t * t - t * x + x * x).sqrt();
    (first * (-t).exp() * x.cosh() + 2.0 * (t - x).exp() * a.cosh() + 2.0 * (t + x).exp() * b.cosh())
        .ln()
}
