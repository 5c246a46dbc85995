use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::BaselineGrid;
use crate::error::{Error, Result};
use crate::neighborhoods::{Metric, RadialIndex};
use crate::sampler::SensorGrid;

/// Smallest neighbourhood for which the index is meaningful.
const MIN_K: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnisotropySample {
    pub index: usize,
    /// Visual eccentricity of the query element, degrees.
    pub r: f64,
    pub value: f64,
}

/// `σ₁² / σ₂²` of the centred coordinates, `σ` the singular values. Collinear
/// or coincident sets give `+∞`.
pub fn anisotropy_of(coords: &[[f64; 2]]) -> f64 {
    let n = coords.len() as f64;
    let (mx, my) = coords.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
    let (mx, my) = (mx / n, my / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in coords {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let half_trace = 0.5 * (sxx + syy);
    let disc = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
    let (l1, l2) = (half_trace + disc, half_trace - disc);
    if l1.is_nan() || l1 <= 0.0 || l2 <= 1e-12 * l1 {
        return f64::INFINITY;
    }
    l1 / l2
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k < MIN_K || k > n {
        return Err(Error::invalid(format!("k must lie in [{MIN_K}, {n}], got {k}")));
    }
    Ok(())
}

fn k_smallest(n: usize, k: usize, dist: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut order: Vec<(f64, usize)> = (0..n).map(|i| (dist(i), i)).collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < n {
        order.select_nth_unstable_by(k - 1, cmp);
        order.truncate(k);
    }
    order.into_iter().map(|(_, i)| i).collect()
}

/// Index of the `k` points nearest to `query` in visual space.
pub fn anisotropy_index(points: &[[f64; 2]], query: [f64; 2], k: usize) -> Result<f64> {
    check_k(k, points.len())?;
    let nn = k_smallest(points.len(), k, |i| (points[i][0] - query[0]).hypot(points[i][1] - query[1]));
    let coords: Vec<[f64; 2]> = nn.iter().map(|&i| points[i]).collect();
    Ok(anisotropy_of(&coords))
}

/// Index of the visual footprint of the `k` elements nearest to element `i`
/// on the sensor manifold.
pub fn grid_anisotropy(grid: &SensorGrid, indices: &[usize], k: usize) -> Result<Vec<AnisotropySample>> {
    check_k(k, grid.len())?;
    let index = RadialIndex::new(grid);
    indices
        .par_iter()
        .map(|&i| {
            let p = grid.points.get(i).ok_or_else(|| Error::invalid(format!("point {i} out of range")))?;
            let coords: Vec<[f64; 2]> = index
                .nearest_indices(p, k, Metric::Chord)
                .into_iter()
                .map(|j| {
                    let q = &grid.points[j as usize];
                    [q.x, q.y]
                })
                .collect();
            Ok(AnisotropySample {
                index: i,
                r: p.r,
                value: anisotropy_of(&coords),
            })
        })
        .collect()
}

/// As [`grid_anisotropy`], with neighbours taken on the baseline's array.
pub fn baseline_anisotropy(grid: &BaselineGrid, indices: &[usize], k: usize) -> Result<Vec<AnisotropySample>> {
    check_k(k, grid.len())?;
    indices
        .par_iter()
        .map(|&i| {
            if i >= grid.len() {
                return Err(Error::invalid(format!("element {i} out of range")));
            }
            let nn = k_smallest(grid.len(), k, |j| grid.sensor_distance(i, j));
            let coords: Vec<[f64; 2]> = nn.iter().map(|&j| grid.points[j]).collect();
            Ok(AnisotropySample {
                index: i,
                r: grid.points[i][0].hypot(grid.points[i][1]),
                value: anisotropy_of(&coords),
            })
        })
        .collect()
}

/// `count` distinct active points with cortical position in `[lo, hi]`,
/// drawn reproducibly.
pub fn interior_loci(grid: &SensorGrid, lo: f64, hi: f64, count: usize, seed: u64) -> Vec<usize> {
    let pool: Vec<usize> = grid.active_indices().filter(|&i| (lo..=hi).contains(&grid.points[i].w)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, pool.len(), count.min(pool.len()))
        .into_iter()
        .map(|j| pool[j])
        .collect();
    picked.sort_unstable();
    picked
}
