use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::{BaselineGrid, BaselineKind};
use crate::error::{Error, Result};

/// Magnification profile used to warp a Cartesian lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WarpProfile {
    /// Constant magnification: the lattice is left unwarped.
    Uniform,
    /// `m(r) = 1 / (r + a)`.
    Hyperbolic { a: f64 },
}

impl WarpProfile {
    /// Cumulative magnification `∫₀ʳ m`, up to a constant factor.
    fn cumulative(&self, r: f64) -> f64 {
        match *self {
            Self::Uniform => r,
            Self::Hyperbolic { a } => (r / a).ln_1p(),
        }
    }

    fn inverse_cumulative(&self, c: f64) -> f64 {
        match *self {
            Self::Uniform => c,
            Self::Hyperbolic { a } => a * c.exp_m1(),
        }
    }

    fn foveation(&self) -> Option<f64> {
        match *self {
            Self::Uniform => None,
            Self::Hyperbolic { a } => Some(a),
        }
    }
}

/// `side × side` lattice on `[-1, 1]²` whose radii are remapped through the
/// inverse cumulative profile, angles kept. The lattice corner lands on the
/// visual corner at `r_max·√2`, so the profile is normalized over the diagonal
/// of a square image of half-width `r_max`.
pub fn warped_cartesian_grid(profile: WarpProfile, side: usize, r_max: f64) -> Result<BaselineGrid> {
    if side < 2 {
        return Err(Error::invalid(format!("lattice side must be >= 2, got {side}")));
    }
    if let WarpProfile::Hyperbolic { a } = profile {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::invalid(format!("profile constant must be > 0, got {a}")));
        }
    }
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Error::invalid(format!("r_max must be > 0, got {r_max}")));
    }
    let corner = profile.cumulative(r_max * SQRT_2);
    let mut points = Vec::with_capacity(side * side);
    let mut sensor = Vec::with_capacity(side * side);
    for row in 0..side {
        for col in 0..side {
            let u = (col as f64 + 0.5) / side as f64 * 2.0 - 1.0;
            let v = (row as f64 + 0.5) / side as f64 * 2.0 - 1.0;
            let rho = u.hypot(v);
            let r = profile.inverse_cumulative(rho / SQRT_2 * corner);
            let scale = if rho > 0.0 { r / rho } else { 0.0 };
            points.push([u * scale, v * scale]);
            sensor.push([u, v]);
        }
    }
    Ok(BaselineGrid {
        kind: BaselineKind::WarpedCartesian,
        rows: side,
        cols: side,
        r_max,
        a: profile.foveation(),
        points,
        sensor,
    })
}
