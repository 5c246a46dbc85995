use crate::error::{Error, Result};

/// Interleaved `height × width × channels` image, top row first.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(Error::shape(format!("degenerate image {width}×{height}×{channels}")));
        }
        if data.len() != width * height * channels {
            return Err(Error::shape(format!(
                "image data has {} values, expected {width}×{height}×{channels}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f32) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    pub fn from_fn(width: usize, height: usize, channels: usize, mut f: impl FnMut(usize, usize, usize) -> f32) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for row in 0..height {
            for col in 0..width {
                for c in 0..channels {
                    data.push(f(col, row, c));
                }
            }
        }
        Self::new(width, height, channels, data)
    }

    pub fn pixel(&self, col: usize, row: usize) -> &[f32] {
        let o = (row * self.width + col) * self.channels;
        &self.data[o..o + self.channels]
    }

    pub fn pixel_mut(&mut self, col: usize, row: usize) -> &mut [f32] {
        let o = (row * self.width + col) * self.channels;
        &mut self.data[o..o + self.channels]
    }

    /// Bilinear sample at continuous pixel coordinates, pixel centres at
    /// `i + 0.5`. Positions outside `[0, W] × [0, H]` return `None`; inside the
    /// outer half-pixel band the nearest edge centre is used.
    pub fn sample_bilinear(&self, px: f64, py: f64, out: &mut [f64]) -> bool {
        let (w, h) = (self.width as f64, self.height as f64);
        if !(px >= 0.0 && px <= w && py >= 0.0 && py <= h) {
            return false;
        }
        let fx = (px - 0.5).clamp(0.0, w - 1.0);
        let fy = (py - 0.5).clamp(0.0, h - 1.0);
        let x0 = (fx.floor() as usize).min(self.width.saturating_sub(2));
        let y0 = (fy.floor() as usize).min(self.height.saturating_sub(2));
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
        let weights = [(1.0 - tx) * (1.0 - ty), tx * (1.0 - ty), (1.0 - tx) * ty, tx * ty];
        let corners = [(x0, y0), (x1, y0), (x0, y1), (x1, y1)];
        out.iter_mut().for_each(|v| *v = 0.0);
        for (&(cx, cy), &wt) in corners.iter().zip(&weights) {
            if wt == 0.0 {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(self.pixel(cx, cy)) {
                *o += wt * p as f64;
            }
        }
        true
    }
}
