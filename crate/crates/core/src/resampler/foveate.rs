use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::image::Image;
use crate::error::{Error, Result};
use crate::neighborhoods::{Metric, RadialIndex};
use crate::sampler::{Hemifield, SensorGrid, SensorPoint};

/// Where the sensor looks and how large it is relative to the image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixationSpec {
    /// Fixation centre, normalized: x from the left edge, y from the top edge.
    pub cx: f64,
    pub cy: f64,
    /// Fraction of `min(H, W)` covered by the field-of-view diameter.
    pub scale: f64,
}

impl FixationSpec {
    pub fn new(cx: f64, cy: f64, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(format!("fixation scale must be > 0, got {scale}")));
        }
        if !((0.0..=1.0).contains(&cx) && (0.0..=1.0).contains(&cy)) {
            return Err(Error::invalid(format!("fixation centre ({cx}, {cy}) outside the image")));
        }
        Ok(Self { cx, cy, scale })
    }

    pub fn centered(scale: f64) -> Self {
        Self { cx: 0.5, cy: 0.5, scale }
    }

    /// Pixels per visual degree for an image of the given size.
    pub fn pixels_per_degree(&self, r_max: f64, width: usize, height: usize) -> f64 {
        self.scale * width.min(height) as f64 / (2.0 * r_max)
    }

    /// Continuous pixel position of visual point `(x, y)`; visual y points up.
    pub fn to_pixel(&self, r_max: f64, width: usize, height: usize, x: f64, y: f64) -> (f64, f64) {
        let ppd = self.pixels_per_degree(r_max, width, height);
        (self.cx * width as f64 + x * ppd, self.cy * height as f64 - y * ppd)
    }

    /// Inverse of [`FixationSpec::to_pixel`].
    pub fn to_visual(&self, r_max: f64, width: usize, height: usize, px: f64, py: f64) -> (f64, f64) {
        let ppd = self.pixels_per_degree(r_max, width, height);
        ((px - self.cx * width as f64) / ppd, (self.cy * height as f64 - py) / ppd)
    }
}

/// Feature values of every sensor point for one fixation, `n × channels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoveatedSignal {
    pub grid_id: String,
    pub fixation: FixationSpec,
    pub n: usize,
    pub channels: usize,
    pub source_width: usize,
    pub source_height: usize,
    pub values: Vec<f32>,
}

impl FoveatedSignal {
    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.channels..(i + 1) * self.channels]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }
}

/// Bilinearly sample `image` at every active sensor point. Padding points and
/// points falling outside the image get zero.
pub fn foveate(image: &Image, grid: &SensorGrid, fix: &FixationSpec) -> Result<FoveatedSignal> {
    if image.width == 0 || image.height == 0 || image.channels == 0 {
        return Err(Error::shape("degenerate image"));
    }
    let c = image.channels;
    let r_max = grid.params.r_max;
    let mut values = vec![0f32; grid.len() * c];
    values.par_chunks_mut(c).zip(grid.points.par_iter()).for_each_init(
        || vec![0.0f64; c],
        |buf, (out, p)| {
            if p.is_padding {
                return;
            }
            let (px, py) = fix.to_pixel(r_max, image.width, image.height, p.x, p.y);
            if image.sample_bilinear(px, py, buf) {
                for (o, &v) in out.iter_mut().zip(buf.iter()) {
                    *o = v as f32;
                }
            }
        },
    );
    Ok(FoveatedSignal {
        grid_id: grid.fingerprint(),
        fixation: *fix,
        n: grid.len(),
        channels: c,
        source_width: image.width,
        source_height: image.height,
        values,
    })
}

/// Nearest active sensor for every pixel of an `out_w × out_h` canvas spanning
/// the source image; `None` outside the field of view.
pub fn voronoi_labels(grid: &SensorGrid, fix: &FixationSpec, src_w: usize, src_h: usize, out_w: usize, out_h: usize) -> Vec<Option<u32>> {
    let index = RadialIndex::new(grid);
    let params = grid.params;
    (0..out_w * out_h)
        .into_par_iter()
        .map(|pix| {
            let (col, row) = (pix % out_w, pix / out_w);
            let sx = (col as f64 + 0.5) * src_w as f64 / out_w as f64;
            let sy = (row as f64 + 0.5) * src_h as f64 / out_h as f64;
            let (x, y) = fix.to_visual(params.r_max, src_w, src_h, sx, sy);
            let r = x.hypot(y);
            if r > params.r_max {
                return None;
            }
            let mut theta = y.atan2(x);
            if theta < 0.0 {
                theta += TAU;
            }
            let q = SensorPoint {
                x,
                y,
                r,
                theta,
                w: params.integrate_unchecked(r),
                ring: 0,
                flat_u: 0.0,
                flat_v: 0.0,
                hemifield: Hemifield::Right,
                is_padding: false,
            };
            index
                .nearest_indices(&q, 8, Metric::Chord)
                .into_iter()
                .find(|&i| !grid.points[i as usize].is_padding)
        })
        .collect()
}

/// Nearest-sensor rendering of `signal` onto an `out_w × out_h` canvas
/// covering the source image. The extra last channel is 1 inside the field
/// of view and 0 outside, where the feature channels are 0.
pub fn backproject(signal: &FoveatedSignal, grid: &SensorGrid, out_w: usize, out_h: usize) -> Result<Image> {
    if signal.n != grid.len() {
        return Err(Error::shape(format!("signal has {} points, grid {}", signal.n, grid.len())));
    }
    if !signal.grid_id.is_empty() && signal.grid_id != grid.fingerprint() {
        return Err(Error::invalid("signal was produced on a different grid"));
    }
    let c = signal.channels;
    let labels = voronoi_labels(grid, &signal.fixation, signal.source_width, signal.source_height, out_w, out_h);
    let mut data = vec![0f32; out_w * out_h * (c + 1)];
    for (px, label) in data.chunks_mut(c + 1).zip(labels) {
        if let Some(i) = label {
            px[..c].copy_from_slice(signal.row(i as usize));
            px[c] = 1.0;
        }
    }
    Image::new(out_w, out_h, c + 1, data)
}
