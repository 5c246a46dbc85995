use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{BaselineGrid, BaselineKind};
use crate::error::{Error, Result};
use crate::sampler::SensorGrid;

/// Innermost log-polar ring, as a fraction of `r_max`. The log mapping is
/// singular at the pole, so sampling starts just outside it.
pub const LOGPOLAR_INNER_FRACTION: f64 = 1e-3;

/// `n_r × n_theta` array: rows uniform in `ln(r + a)`, columns uniform in angle.
pub fn logpolar_grid(a: f64, n_r: usize, n_theta: usize, r_max: f64) -> Result<BaselineGrid> {
    if n_r < 2 || n_theta < 2 {
        return Err(Error::invalid(format!("log-polar counts must be >= 2, got {n_r} × {n_theta}")));
    }
    if !(a.is_finite() && a > 0.0 && r_max.is_finite() && r_max > 0.0) {
        return Err(Error::invalid(format!("log-polar needs a > 0 and r_max > 0, got a={a}, r_max={r_max}")));
    }
    let radii = logpolar_radii(a, n_r, r_max);
    let mut points = Vec::with_capacity(n_r * n_theta);
    let mut sensor = Vec::with_capacity(n_r * n_theta);
    for (row, &r) in radii.iter().enumerate() {
        for col in 0..n_theta {
            let theta = TAU * col as f64 / n_theta as f64;
            points.push([r * theta.cos(), r * theta.sin()]);
            sensor.push([row as f64, col as f64]);
        }
    }
    Ok(BaselineGrid {
        kind: BaselineKind::LogPolar,
        rows: n_r,
        cols: n_theta,
        r_max,
        a: Some(a),
        points,
        sensor,
    })
}

fn logpolar_radii(a: f64, n_r: usize, r_max: f64) -> Vec<f64> {
    // work in u = ln(1 + r/a) so that huge a keeps full precision
    let u0 = (LOGPOLAR_INNER_FRACTION * r_max / a).ln_1p();
    let u1 = (r_max / a).ln_1p();
    (0..n_r)
        .map(|i| {
            if i == n_r - 1 {
                r_max
            } else {
                a * (u0 + (u1 - u0) * i as f64 / (n_r - 1) as f64).exp_m1()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrDthetaSample {
    pub ring: usize,
    pub r: f64,
    pub ratio: f64,
}

/// Radial gap to the next ring over the arc between neighbouring angles. The
/// outermost ring uses the gap to the ring inside it.
pub fn dr_dtheta_profile(grid: &BaselineGrid) -> Result<Vec<DrDthetaSample>> {
    if grid.kind != BaselineKind::LogPolar {
        return Err(Error::invalid(format!("dr/dθ profile needs a log-polar grid, got {}", grid.kind)));
    }
    let radii: Vec<f64> = (0..grid.rows).map(|row| {
        let [x, y] = grid.points[row * grid.cols];
        x.hypot(y)
    }).collect();
    let dtheta = TAU / grid.cols as f64;
    let n = radii.len();
    Ok((0..n)
        .map(|ring| {
            let dr = if ring + 1 < n { radii[ring + 1] - radii[ring] } else { radii[ring] - radii[ring - 1] };
            let r = radii[ring];
            DrDthetaSample {
                ring,
                r,
                ratio: dr / (r * dtheta),
            }
        })
        .collect())
}

/// The same profile for a foveated grid, whose rings carry their own counts.
/// The pole is skipped.
pub fn sensor_dr_dtheta_profile(grid: &SensorGrid) -> Result<Vec<DrDthetaSample>> {
    let Some(scheme) = &grid.scheme else {
        return Err(Error::invalid("dr/dθ profile needs a ring layout"));
    };
    let mut radii = scheme.radii[..scheme.n_r].to_vec();
    // the ring past the edge, when padding is absent, comes from the chart
    radii.push(
        scheme
            .radii
            .get(scheme.n_r)
            .copied()
            .unwrap_or_else(|| grid.params.invert_unchecked(1.0 + scheme.delta_w)),
    );
    Ok((1..scheme.n_r)
        .map(|ring| {
            let r = radii[ring];
            DrDthetaSample {
                ring,
                r,
                ratio: (radii[ring + 1] - r) / (r * TAU / grid.ring_counts[ring] as f64),
            }
        })
        .collect())
}
