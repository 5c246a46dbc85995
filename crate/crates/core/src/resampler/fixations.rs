use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::foveate::FixationSpec;
use crate::error::{Error, Result};

/// Central disc from which random fixation centres are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixationZone {
    /// Disc radius as a fraction of the image size, in `[0, 0.5]`.
    pub radius: f64,
    pub count: usize,
    pub seed: u64,
}

impl FixationZone {
    pub fn new(radius: f64, count: usize, seed: u64) -> Result<Self> {
        if !(0.0..=0.5).contains(&radius) {
            return Err(Error::invalid(format!("fixation zone radius must lie in [0, 0.5], got {radius}")));
        }
        if count == 0 {
            return Err(Error::invalid("fixation count must be >= 1"));
        }
        Ok(Self { radius, count, seed })
    }
}

/// `zone.count` fixations uniform over the disc, reproducible from the seed.
pub fn sample_fixations(zone: &FixationZone, scale: f64) -> Vec<FixationSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(zone.seed);
    (0..zone.count)
        .map(|_| {
            let rho = zone.radius * rng.random::<f64>().sqrt();
            let phi = TAU * rng.random::<f64>();
            FixationSpec {
                cx: 0.5 + rho * phi.cos(),
                cy: 0.5 + rho * phi.sin(),
                scale,
            }
        })
        .collect()
}
