use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neighborhoods::NeighborhoodSet;

/// Geometry of the shared Cartesian reference kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceKernelSpec {
    pub k: usize,
    /// Side length in samples, `res_multiplier · round(√k)`.
    pub s: usize,
    /// Side length in cortical units.
    pub extent: f64,
    pub res_multiplier: usize,
}

impl ReferenceKernelSpec {
    /// Kernel spanning `√k · Δw` of the input grid.
    pub fn new(k: usize, res_multiplier: usize, input_delta_w: f64) -> Result<Self> {
        Self::with_extent(k, res_multiplier, (k as f64).sqrt() * input_delta_w)
    }

    pub fn with_extent(k: usize, res_multiplier: usize, extent: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be positive"));
        }
        if !matches!(res_multiplier, 1 | 2) {
            return Err(Error::invalid(format!("res_multiplier must be 1 or 2, got {res_multiplier}")));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::invalid(format!("kernel extent must be > 0, got {extent}")));
        }
        let s = res_multiplier * ((k as f64).sqrt().round() as usize).max(1);
        Ok(Self {
            k,
            s,
            extent,
            res_multiplier,
        })
    }

    pub fn pitch(&self) -> f64 {
        self.extent / self.s as f64
    }

    pub fn center(&self) -> f64 {
        (self.s as f64 - 1.0) / 2.0
    }
}

/// Bilinear gather table: for each `(output unit, slot)` four flat indices
/// into the `s × s` reference kernel and their weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMapTable {
    pub n_out: usize,
    pub k: usize,
    pub s: usize,
    /// `n_out × k × 4`, row-major.
    pub indices: Vec<u32>,
    /// `n_out × k × 4`, row-major.
    pub weights: Vec<f32>,
    /// `n_out × k`; 1 when the slot falls outside the kernel.
    pub out_of_extent: Vec<u8>,
}

impl KernelMapTable {
    pub fn slot(&self, j: usize, i: usize) -> (&[u32], &[f32]) {
        let o = (j * self.k + i) * 4;
        (&self.indices[o..o + 4], &self.weights[o..o + 4])
    }

    pub fn is_out_of_extent(&self, j: usize, i: usize) -> bool {
        self.out_of_extent[j * self.k + i] != 0
    }

    /// Number of slots falling outside the kernel.
    pub fn dropped(&self) -> usize {
        self.out_of_extent.iter().filter(|&&f| f != 0).count()
    }
}

/// Kernel-grid position `(u, v)` of every neighbour of unit `j`. `u` runs
/// along visual x (columns), `v` along visual y (rows).
pub fn neighborhood_reference_coords(nbhd: &NeighborhoodSet, spec: &ReferenceKernelSpec, j: usize) -> Vec<(f64, f64)> {
    let (pitch, c) = (spec.pitch(), spec.center());
    nbhd.row_dists(j)
        .iter()
        .zip(nbhd.row_thetas(j))
        .map(|(&d, &t)| {
            let rho = d as f64 / pitch;
            let (sin, cos) = (t as f64).sin_cos();
            (c + rho * cos, c + rho * sin)
        })
        .collect()
}

/// Bilinear corners and weights for kernel position `(u, v)`, or `None` when
/// it lies more than half a sample outside the kernel.
pub(crate) fn bilinear(u: f64, v: f64, s: usize) -> Option<([u32; 4], [f32; 4])> {
    let hi = s as f64 - 1.0;
    if !(-0.5..=hi + 0.5).contains(&u) || !(-0.5..=hi + 0.5).contains(&v) {
        return None;
    }
    if s == 1 {
        return Some(([0; 4], [1.0, 0.0, 0.0, 0.0]));
    }
    let (u, v) = (u.clamp(0.0, hi), v.clamp(0.0, hi));
    let u0 = (u.floor() as usize).min(s - 2);
    let v0 = (v.floor() as usize).min(s - 2);
    let (fu, fv) = (u - u0 as f64, v - v0 as f64);
    let base = (v0 * s + u0) as u32;
    let s32 = s as u32;
    Some((
        [base, base + 1, base + s32, base + s32 + 1],
        [
            ((1.0 - fu) * (1.0 - fv)) as f32,
            (fu * (1.0 - fv)) as f32,
            ((1.0 - fu) * fv) as f32,
            (fu * fv) as f32,
        ],
    ))
}

pub fn build_kernel_map(nbhd: &NeighborhoodSet, spec: &ReferenceKernelSpec) -> Result<KernelMapTable> {
    if spec.k != nbhd.k {
        return Err(Error::shape(format!("kernel spec k={} but neighbourhoods have k={}", spec.k, nbhd.k)));
    }
    let rows: Vec<(Vec<u32>, Vec<f32>, Vec<u8>)> = (0..nbhd.n_out)
        .into_par_iter()
        .map(|j| {
            let mut idx = Vec::with_capacity(nbhd.k * 4);
            let mut wts = Vec::with_capacity(nbhd.k * 4);
            let mut flags = Vec::with_capacity(nbhd.k);
            for (u, v) in neighborhood_reference_coords(nbhd, spec, j) {
                match bilinear(u, v, spec.s) {
                    Some((i4, w4)) => {
                        idx.extend_from_slice(&i4);
                        wts.extend_from_slice(&w4);
                        flags.push(0);
                    }
                    None => {
                        idx.extend_from_slice(&[0; 4]);
                        wts.extend_from_slice(&[0.0; 4]);
                        flags.push(1);
                    }
                }
            }
            (idx, wts, flags)
        })
        .collect();
    let mut table = KernelMapTable {
        n_out: nbhd.n_out,
        k: nbhd.k,
        s: spec.s,
        indices: Vec::with_capacity(nbhd.n_out * nbhd.k * 4),
        weights: Vec::with_capacity(nbhd.n_out * nbhd.k * 4),
        out_of_extent: Vec::with_capacity(nbhd.n_out * nbhd.k),
    };
    for (idx, wts, flags) in rows {
        table.indices.extend(idx);
        table.weights.extend(wts);
        table.out_of_extent.extend(flags);
    }
    Ok(table)
}

/// Per-slot values of `reference` (an `s × s` kernel) as seen by unit `j`.
pub fn render_mapped_kernel(table: &KernelMapTable, reference: &[f64], j: usize) -> Result<Vec<f64>> {
    if reference.len() != table.s * table.s {
        return Err(Error::shape(format!(
            "reference kernel has {} values, expected {}",
            reference.len(),
            table.s * table.s
        )));
    }
    if j >= table.n_out {
        return Err(Error::invalid(format!("unit {j} out of range (n_out={})", table.n_out)));
    }
    Ok((0..table.k)
        .map(|i| {
            let (idx, w) = table.slot(j, i);
            idx.iter().zip(w).map(|(&q, &w)| w as f64 * reference[q as usize]).sum()
        })
        .collect())
}
