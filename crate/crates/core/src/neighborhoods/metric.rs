use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::cmf::CmfParams;
use crate::sampler::{SensorGrid, SensorPoint};

/// Short-range distance on the sensor manifold, in cortical units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// `sqrt(Δw² + 4 ρ₁ ρ₂ sin²(Δθ/2))` with `ρ = r M(r)`: the chord between
    /// the two points when each ring is laid out as a circle of radius `ρ`.
    /// Exact for uniform sampling and needs no special case at the pole.
    #[default]
    Chord,
    /// `sqrt(Δw² + (ρ(r̄) Δθ)²)` with `r̄` the mean eccentricity.
    MeanEccentricity,
}

/// Angular gap in `[0, π]`, symmetric in its arguments.
pub(crate) fn wrapped_gap(t1: f64, t2: f64) -> f64 {
    let d = (t1 - t2).abs() % TAU;
    if d > PI {
        TAU - d
    } else {
        d
    }
}

pub(crate) fn point_distance(params: &CmfParams, metric: Metric, p: &SensorPoint, q: &SensorPoint) -> f64 {
    let dw = p.w - q.w;
    let gap = wrapped_gap(p.theta, q.theta);
    match metric {
        Metric::Chord => {
            let rho = params.manifold_radius(p.r) * params.manifold_radius(q.r);
            let s = (0.5 * gap).sin();
            (dw * dw + 4.0 * rho * s * s).sqrt()
        }
        Metric::MeanEccentricity => {
            let arc = params.manifold_radius(0.5 * (p.r + q.r)) * gap;
            (dw * dw + arc * arc).sqrt()
        }
    }
}

/// Distance between points `i` and `j` of `grid` under the default metric.
pub fn local_manifold_distance(grid: &SensorGrid, i: usize, j: usize) -> f64 {
    point_distance(&grid.params, Metric::Chord, &grid.points[i], &grid.points[j])
}

pub fn local_manifold_distance_with(grid: &SensorGrid, i: usize, j: usize, metric: Metric) -> f64 {
    point_distance(&grid.params, metric, &grid.points[i], &grid.points[j])
}
