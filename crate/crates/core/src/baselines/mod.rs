//! Log-polar and warped-Cartesian comparison samplers, plus the anisotropy
//! diagnostics used to compare them with the foveated grids.

mod anisotropy;
mod logpolar;
mod warped;

pub use anisotropy::{anisotropy_index, anisotropy_of, baseline_anisotropy, grid_anisotropy, interior_loci, AnisotropySample};
pub use logpolar::{dr_dtheta_profile, logpolar_grid, sensor_dr_dtheta_profile, DrDthetaSample, LOGPOLAR_INNER_FRACTION};
pub use warped::{warped_cartesian_grid, WarpProfile};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    LogPolar,
    WarpedCartesian,
}

impl std::fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::LogPolar => "log-polar",
            Self::WarpedCartesian => "warped-cartesian",
        })
    }
}

/// A rectangular sensor array together with the visual position of each of
/// its elements. Points are stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineGrid {
    pub kind: BaselineKind,
    pub rows: usize,
    pub cols: usize,
    pub r_max: f64,
    /// Foveation constant of the profile; `None` for an unwarped lattice.
    pub a: Option<f64>,
    /// Visual `(x, y)` in degrees.
    pub points: Vec<[f64; 2]>,
    /// Sensor-array coordinates. Log-polar: `(ring, angle)` in index units,
    /// the angle axis periodic. Warped: lattice position in `[-1, 1]²`.
    pub sensor: Vec<[f64; 2]>,
}

impl BaselineGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance between two elements on the sensor array.
    pub fn sensor_distance(&self, i: usize, j: usize) -> f64 {
        let (p, q) = (self.sensor[i], self.sensor[j]);
        let mut d1 = (p[1] - q[1]).abs();
        if self.kind == BaselineKind::LogPolar {
            d1 = d1.min(self.cols as f64 - d1);
        }
        (p[0] - q[0]).hypot(d1)
    }

    /// Element closest to normalized sensor radius `rn` along the sensor's
    /// first axis (ring fraction for log-polar, lattice radius for warped).
    pub fn element_at_radius(&self, rn: f64) -> usize {
        match self.kind {
            BaselineKind::LogPolar => {
                let row = (rn.clamp(0.0, 1.0) * (self.rows - 1) as f64).round() as usize;
                row * self.cols
            }
            BaselineKind::WarpedCartesian => (0..self.len())
                .min_by(|&i, &j| {
                    let score = |k: usize| {
                        let s = self.sensor[k];
                        (s[0].hypot(s[1]) - rn).abs() + s[1].abs() + if s[0] < 0.0 { 1.0 } else { 0.0 }
                    };
                    score(i).total_cmp(&score(j))
                })
                .unwrap_or(0),
        }
    }
}
