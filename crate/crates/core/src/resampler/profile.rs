use serde::{Deserialize, Serialize};

use super::foveate::FixationSpec;
use crate::error::{Error, Result};
use crate::sampler::SensorGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionSample {
    pub ring: usize,
    /// Eccentricity in degrees.
    pub r: f64,
    /// Sensor samples per native pixel, along one dimension.
    pub ratio: f64,
}

/// Local linear sampling density of the sensor relative to the native pixel
/// grid, per active ring. The sensor places `M(r) / Δw` samples per degree;
/// the image has `scale · min(H, W) / (2 r_max)` pixels per degree.
pub fn local_resolution_profile(grid: &SensorGrid, native_w: usize, native_h: usize, fix: &FixationSpec) -> Result<Vec<ResolutionSample>> {
    if native_w == 0 || native_h == 0 {
        return Err(Error::shape("degenerate native image size"));
    }
    let ppd = fix.pixels_per_degree(grid.params.r_max, native_w, native_h);
    let per_native = |r: f64| grid.params.magnification_unchecked(r) / grid.delta_w / ppd;
    let radii: Vec<f64> = match &grid.scheme {
        Some(scheme) => scheme.radii[..scheme.n_r].to_vec(),
        None => {
            // lattice: nearest point of each square ring
            let mut inner = Vec::<f64>::new();
            for p in grid.points.iter().filter(|p| !p.is_padding) {
                let ring = p.ring as usize;
                if inner.len() <= ring {
                    inner.resize(ring + 1, f64::INFINITY);
                }
                inner[ring] = inner[ring].min(p.r);
            }
            inner
        }
    };
    Ok(radii
        .into_iter()
        .enumerate()
        .map(|(ring, r)| ResolutionSample { ring, r, ratio: per_native(r) })
        .collect())
}

/// Eccentricity where the profile falls through 1 (native resolution), by
/// linear interpolation between rings.
pub fn native_crossing(profile: &[ResolutionSample]) -> Option<f64> {
    profile.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        (a.ratio >= 1.0 && b.ratio < 1.0).then(|| a.r + (a.ratio - 1.0) / (a.ratio - b.ratio) * (b.r - a.r))
    })
}
