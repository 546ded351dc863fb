use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;

/// A grid cell whose corner values of both components of a planar map
/// change sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignChangeCell {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl SignChangeCell {
    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x.0 + self.x.1), 0.5 * (self.y.0 + self.y.1))
    }

    /// Geometric center, for cells laid out on logarithmic grids.
    pub fn log_center(&self) -> (f64, f64) {
        ((self.x.0 * self.x.1).sqrt(), (self.y.0 * self.y.1).sqrt())
    }
}

/// Brute-force scan of `f` over the tensor grid `xs × ys`.
///
/// Grid points where `f` fails are treated as missing, and cells touching
/// them are skipped. Evaluation is parallel; the returned cells are in
/// row-major order of `(x, y)` and do not depend on the thread count.
pub fn sign_change_cells<F>(f: F, xs: &[f64], ys: &[f64]) -> Vec<SignChangeCell>
where
    F: Fn(f64, f64) -> Result<(f64, f64)> + Sync,
{
    let values: Vec<Option<(f64, f64)>> = xs
        .par_iter()
        .flat_map_iter(|&x| ys.iter().map(move |&y| (x, y)))
        .map(|(x, y)| f(x, y).ok())
        .collect();
    let at = |i: usize, j: usize| values[i * ys.len() + j];

    let mut cells = Vec::new();
    for i in 0..xs.len().saturating_sub(1) {
        for j in 0..ys.len().saturating_sub(1) {
            let corners = [at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)];
            let Some(corners) = corners.into_iter().collect::<Option<Vec<_>>>() else {
                continue;
            };
            let changes = |pick: fn(&(f64, f64)) -> f64| {
                let lo = corners.iter().map(pick).fold(f64::INFINITY, f64::min);
                let hi = corners.iter().map(pick).fold(f64::NEG_INFINITY, f64::max);
                lo <= 0.0 && hi >= 0.0
            };
            if changes(|v| v.0) && changes(|v| v.1) {
                cells.push(SignChangeCell {
                    x: (xs[i], xs[i + 1]),
                    y: (ys[j], ys[j + 1]),
                });
            }
        }
    }
    cells
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}
