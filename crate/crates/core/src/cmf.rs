//! The cortical magnification function `M(r) = k_a / (r + a)`, its integral
//! (the cortical coordinate `w`) and the inverse map back to eccentricity.
//!
//! `k_a` normalizes the area under `M` on `[0, r_max]` to one, so `w` runs
//! from 0 at the center of gaze to 1 at the edge of the field of view for
//! every foveation strength `a`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest cortical coordinate accepted by [`CmfParams::invert`]. Values in
/// `(1, MAX_CORTICAL_EXTENT]` address padding rings outside the field of view.
pub const MAX_CORTICAL_EXTENT: f64 = 4.0;

/// Parameters of the normalized magnification model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CmfParams {
    /// Foveation parameter in degrees; smaller is more strongly foveated.
    pub a: f64,
    /// Field-of-view radius in degrees.
    pub r_max: f64,
    /// Normalization constant `1 / ln((r_max + a) / a)`.
    pub k_a: f64,
}

impl CmfParams {
    pub fn new(a: f64, r_max: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::domain(format!("foveation parameter a must be > 0, got {a}")));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::domain(format!("field-of-view radius must be > 0, got {r_max}")));
        }
        // ln_1p keeps k_a accurate in the near-uniform regime (a >> r_max).
        let k_a = 1.0 / (r_max / a).ln_1p();
        Ok(Self { a, r_max, k_a })
    }

    /// Build from a field-of-view diameter, the usual way sensors are specified.
    pub fn from_fov(a: f64, fov_degrees: f64) -> Result<Self> {
        Self::new(a, fov_degrees / 2.0)
    }

    /// Normalized magnification `k_a / (r + a)` in 1/degrees.
    pub fn magnification(&self, r: f64) -> Result<f64> {
        check_eccentricity(r)?;
        Ok(self.magnification_unchecked(r))
    }

    /// Cortical coordinate `w(r) = k_a ln((r + a) / a)`.
    pub fn integrate(&self, r: f64) -> Result<f64> {
        check_eccentricity(r)?;
        Ok(self.integrate_unchecked(r))
    }

    /// Eccentricity at cortical coordinate `w`: `r = a (exp(w / k_a) - 1)`.
    pub fn invert(&self, w: f64) -> Result<f64> {
        if !(w.is_finite() && (0.0..=MAX_CORTICAL_EXTENT).contains(&w)) {
            return Err(Error::domain(format!(
                "cortical coordinate must lie in [0, {MAX_CORTICAL_EXTENT}], got {w}"
            )));
        }
        Ok(self.invert_unchecked(w))
    }

    pub(crate) fn magnification_unchecked(&self, r: f64) -> f64 {
        self.k_a / (r + self.a)
    }

    pub(crate) fn integrate_unchecked(&self, r: f64) -> f64 {
        self.k_a * (r / self.a).ln_1p()
    }

    pub(crate) fn invert_unchecked(&self, w: f64) -> f64 {
        self.a * (w / self.k_a).exp_m1()
    }

    /// Circumferential radius of the sensor manifold at eccentricity `r`,
    /// `r M(r)`: a ring of visual radius `r` has manifold length `2π r M(r)`.
    pub fn manifold_radius(&self, r: f64) -> f64 {
        r * self.magnification_unchecked(r)
    }
}

fn check_eccentricity(r: f64) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("eccentricity must be finite and >= 0, got {r}")))
    }
}
