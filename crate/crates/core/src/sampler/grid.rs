use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{angular_counts, build_radial_scheme, IsotropyRule, RadialScheme};
use crate::cmf::CmfParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hemifield {
    Left = 0,
    Right = 1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorPoint {
    pub x: f64,
    pub y: f64,
    pub r: f64,
    pub theta: f64,
    pub w: f64,
    pub ring: u32,
    pub flat_u: f64,
    pub flat_v: f64,
    pub hemifield: Hemifield,
    pub is_padding: bool,
}

/// Arrangement of the points of a [`SensorGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Layout {
    /// Isotropic rings, ordered ring-major then by angle.
    Rings,
    /// A `side × side` square lattice centred on the fovea with `pad` rows of
    /// padding points on every side, ordered row-major from the bottom row.
    /// Intended for the near-uniform regime, where it is the exact
    /// counterpart of an ordinary pixel grid.
    Lattice { side: usize, pad: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridOptions {
    pub pad_rings: usize,
    /// Rotate odd rings by half their angular spacing.
    pub stagger: bool,
    pub rule: IsotropyRule,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            pad_rings: 0,
            stagger: false,
            rule: IsotropyRule::FiniteDifference,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorGrid {
    pub params: CmfParams,
    pub layout: Layout,
    /// Options the grid was built with; lattices record their padding here.
    pub options: GridOptions,
    /// Present for ring layouts.
    pub scheme: Option<RadialScheme>,
    /// Cortical spacing between neighbouring samples.
    pub delta_w: f64,
    pub points: Vec<SensorPoint>,
    pub n_active: usize,
    /// Angular phase of each ring (ring layouts only).
    pub ring_offsets: Vec<f64>,
    pub ring_counts: Vec<u32>,
    /// Index of the first point of each ring, plus a final end marker.
    pub ring_starts: Vec<usize>,
}

impl SensorGrid {
    /// Isotropic foveated grid with `n_r` rings inside the field of view.
    pub fn build(params: CmfParams, n_r: usize, opts: GridOptions) -> Result<Self> {
        let scheme = build_radial_scheme(&params, n_r, opts.pad_rings)?;
        let counts = angular_counts(&scheme, &params, opts.rule);
        let total: usize = counts.iter().map(|&c| c as usize).sum();
        let mut points = Vec::with_capacity(total);
        let mut ring_offsets = Vec::with_capacity(counts.len());
        let mut ring_starts = Vec::with_capacity(counts.len() + 1);
        for (ring, (&count, (&r, &w))) in counts
            .iter()
            .zip(scheme.radii.iter().zip(scheme.w_values.iter()))
            .enumerate()
        {
            ring_starts.push(points.len());
            let offset = if opts.stagger && ring % 2 == 1 {
                TAU / (2.0 * count as f64)
            } else {
                0.0
            };
            ring_offsets.push(offset);
            let is_padding = scheme.is_padding_ring(ring);
            for j in 0..count {
                let mut theta = offset + TAU * j as f64 / count as f64;
                if theta >= TAU {
                    theta -= TAU;
                }
                let (x, y) = if r == 0.0 { (0.0, 0.0) } else { (r * theta.cos(), r * theta.sin()) };
                let (flat_u, flat_v, hemifield) = flat_coords(&params, x, y);
                points.push(SensorPoint {
                    x,
                    y,
                    r,
                    theta,
                    w,
                    ring: ring as u32,
                    flat_u,
                    flat_v,
                    hemifield,
                    is_padding,
                });
            }
        }
        ring_starts.push(points.len());
        let n_active = points.iter().filter(|p| !p.is_padding).count();
        Ok(Self {
            params,
            layout: Layout::Rings,
            options: opts,
            delta_w: scheme.delta_w,
            scheme: Some(scheme),
            points,
            n_active,
            ring_offsets,
            ring_counts: counts,
            ring_starts,
        })
    }

    /// Square lattice of `side × side` active points spanning `[-r_max, r_max]²`
    /// with a border of `pad` padding rows.
    pub fn lattice(params: CmfParams, side: usize, pad: usize) -> Result<Self> {
        if side < 2 {
            return Err(Error::invalid(format!("lattice side must be >= 2, got {side}")));
        }
        let h = 2.0 * params.r_max / side as f64;
        let c = (side as f64 - 1.0) / 2.0;
        let full = side + 2 * pad;
        let mut points = Vec::with_capacity(full * full);
        for row in 0..full {
            for col in 0..full {
                let (ix, iy) = (col as f64 - pad as f64, row as f64 - pad as f64);
                let x = (ix - c) * h;
                let y = (iy - c) * h;
                let r = x.hypot(y);
                let mut theta = y.atan2(x);
                if theta < 0.0 {
                    theta += TAU;
                }
                if theta >= TAU {
                    theta = 0.0;
                }
                let is_padding = row < pad || col < pad || row >= pad + side || col >= pad + side;
                let ring = (ix - c).abs().max((iy - c).abs()).floor() as u32;
                let (flat_u, flat_v, hemifield) = flat_coords(&params, x, y);
                points.push(SensorPoint {
                    x,
                    y,
                    r,
                    theta,
                    w: params.integrate_unchecked(r),
                    ring,
                    flat_u,
                    flat_v,
                    hemifield,
                    is_padding,
                });
            }
        }
        let n_active = side * side;
        Ok(Self {
            params,
            layout: Layout::Lattice { side, pad },
            options: GridOptions {
                pad_rings: pad,
                ..Default::default()
            },
            scheme: None,
            delta_w: params.integrate_unchecked(h),
            points,
            n_active,
            ring_offsets: Vec::new(),
            ring_counts: Vec::new(),
            ring_starts: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ring_total(&self) -> usize {
        self.ring_counts.len()
    }

    pub fn ring_points(&self, ring: usize) -> &[SensorPoint] {
        &self.points[self.ring_starts[ring]..self.ring_starts[ring + 1]]
    }

    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_padding)
            .map(|(i, _)| i)
    }

    /// `(ring, |arc − Δw| / Δw)` for every active ring other than the pole and
    /// the outermost ring, with arc the angular spacing measured on the manifold.
    pub fn ring_isotropy_errors(&self) -> Vec<(usize, f64)> {
        let Some(scheme) = &self.scheme else {
            return Vec::new();
        };
        (1..scheme.n_r.saturating_sub(1))
            .map(|ring| {
                let r = scheme.radii[ring];
                let arc = TAU * self.params.manifold_radius(r) / self.ring_counts[ring] as f64;
                (ring, (arc - self.delta_w).abs() / self.delta_w)
            })
            .collect()
    }

    /// Little-endian per-point records, 62 bytes each (see `docs/FORMATS.md`).
    pub fn record_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.points.len() * POINT_RECORD_BYTES);
        for p in &self.points {
            for v in [p.x, p.y, p.r, p.theta, p.w, p.flat_u, p.flat_v] {
                out.extend_from_slice(&v.to_le_bytes());
            }
            out.extend_from_slice(&p.ring.to_le_bytes());
            out.push(p.hemifield as u8);
            out.push(p.is_padding as u8);
        }
        out
    }

    /// SHA-256 of the point records, used as the grid identity.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.record_bytes()))
    }
}

pub const POINT_RECORD_BYTES: usize = 7 * 8 + 4 + 1 + 1;

/// Complex-log chart per hemifield: `k_a (log(|x| + i y + a) − log a)`, with
/// the real part mirrored for the left hemifield.
pub(crate) fn flat_coords(params: &CmfParams, x: f64, y: f64) -> (f64, f64, Hemifield) {
    let a = params.a;
    let hemifield = if x < 0.0 { Hemifield::Left } else { Hemifield::Right };
    let ax = x.abs();
    let log_mod = 0.5 * ((2.0 * a * ax + ax * ax + y * y) / (a * a)).ln_1p();
    let u = params.k_a * log_mod;
    let v = params.k_a * y.atan2(ax + a);
    match hemifield {
        Hemifield::Left => (-u, v, hemifield),
        Hemifield::Right => (u, v, hemifield),
    }
}
