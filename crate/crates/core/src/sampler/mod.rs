//! Foveated sensor grids: rings equally spaced in the cortical coordinate,
//! each carrying as many angular samples as local isotropy demands.

mod grid;
mod search;

pub use grid::{GridOptions, Hemifield, Layout, SensorGrid, SensorPoint, POINT_RECORD_BYTES};
pub use search::{
    active_count, search_resolution, solve_a_for_exact_n, ExactSolution, SearchResult, SolveOptions,
};

use serde::{Deserialize, Serialize};

use crate::cmf::CmfParams;
use crate::error::{Error, Result};

/// How many angular samples a ring receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsotropyRule {
    /// `ceil(2π r_i / Δr_i)` with `Δr_i` the mean of the visual gaps to the
    /// previous and next ring. The ring past the last one is extrapolated.
    #[default]
    FiniteDifference,
    /// `max(1, round_half_even(2π r_i M(r_i) / Δw))`, the continuum form.
    Differential,
}

/// Cortical positions and visual radii of every ring, padding included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialScheme {
    /// Number of rings inside the field of view, the pole included.
    pub n_r: usize,
    pub pad_rings: usize,
    pub w_values: Vec<f64>,
    pub radii: Vec<f64>,
    pub delta_w: f64,
    pub includes_pole: bool,
}

impl RadialScheme {
    pub fn ring_count(&self) -> usize {
        self.w_values.len()
    }

    pub fn is_padding_ring(&self, ring: usize) -> bool {
        ring >= self.n_r
    }
}

/// Rings at `w = i / (n_r - 1)` for `i = 0 .. n_r + pad_rings`. Ring 0 is the
/// pole and ring `n_r - 1` sits exactly on the field-of-view edge.
pub fn build_radial_scheme(params: &CmfParams, n_r: usize, pad_rings: usize) -> Result<RadialScheme> {
    if n_r < 2 {
        return Err(Error::invalid(format!("n_r must be >= 2, got {n_r}")));
    }
    let delta_w = 1.0 / (n_r - 1) as f64;
    let total = n_r + pad_rings;
    let mut w_values = Vec::with_capacity(total);
    let mut radii = Vec::with_capacity(total);
    for i in 0..total {
        let w = if i == n_r - 1 { 1.0 } else { i as f64 * delta_w };
        let r = if i == n_r - 1 {
            params.r_max
        } else {
            params.invert_unchecked(w)
        };
        w_values.push(w);
        radii.push(r);
    }
    Ok(RadialScheme {
        n_r,
        pad_rings,
        w_values,
        radii,
        delta_w,
        includes_pole: true,
    })
}

/// Samples per ring under `rule`. The pole always gets exactly one.
pub fn angular_counts(scheme: &RadialScheme, params: &CmfParams, rule: IsotropyRule) -> Vec<u32> {
    let radii = &scheme.radii;
    let total = radii.len();
    let mut counts = Vec::with_capacity(total);
    for (i, &r) in radii.iter().enumerate() {
        if i == 0 || r == 0.0 {
            counts.push(1);
            continue;
        }
        let c = match rule {
            IsotropyRule::FiniteDifference => {
                let next = if i + 1 < total {
                    radii[i + 1]
                } else {
                    params.invert_unchecked(scheme.w_values[i] + scheme.delta_w)
                };
                let dr = ((r - radii[i - 1]) + (next - r)) / 2.0;
                (std::f64::consts::TAU * r / dr).ceil()
            }
            IsotropyRule::Differential => {
                let c = std::f64::consts::TAU * params.manifold_radius(r) / scheme.delta_w;
                c.round_ties_even().max(1.0)
            }
        };
        counts.push(c as u32);
    }
    counts
}

/// Default padding depth for grids serving neighbourhoods up to `k_max`.
pub fn default_pad_rings(k_max: usize) -> usize {
    ((k_max as f64).sqrt() / 2.0).ceil() as usize + 1
}
