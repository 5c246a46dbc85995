//! Minimal scatter and line charts rasterised straight to an [`Image`].
//! No text: axes are drawn as a frame plus the zero lines when in range.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resampler::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesStyle {
    Scatter,
    Line,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub points: Vec<[f64; 2]>,
    pub color: [u8; 3],
    pub style: SeriesStyle,
}

impl Series {
    pub fn scatter(points: Vec<[f64; 2]>, color: [u8; 3]) -> Self {
        Self { points, color, style: SeriesStyle::Scatter }
    }

    pub fn line(points: Vec<[f64; 2]>, color: [u8; 3]) -> Self {
        Self { points, color, style: SeriesStyle::Line }
    }
}

/// Data range covered by a plot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Bounds {
    /// Tight bounds of all finite points, widened by 5% on each side.
    pub fn fit(series: &[Series]) -> Option<Self> {
        let mut it = series.iter().flat_map(|s| s.points.iter()).filter(|p| p[0].is_finite() && p[1].is_finite());
        let first = it.next()?;
        let mut b = Bounds { x: [first[0]; 2], y: [first[1]; 2] };
        for p in it {
            b.x = [b.x[0].min(p[0]), b.x[1].max(p[0])];
            b.y = [b.y[0].min(p[1]), b.y[1].max(p[1])];
        }
        let widen = |r: [f64; 2]| {
            let pad = if r[1] > r[0] { 0.05 * (r[1] - r[0]) } else { 0.5 * r[0].abs().max(1.0) };
            [r[0] - pad, r[1] + pad]
        };
        Some(Bounds { x: widen(b.x), y: widen(b.y) })
    }

    /// Square bounds centred on the data, for plots of visual positions.
    pub fn square(self) -> Self {
        let half = 0.5 * (self.x[1] - self.x[0]).max(self.y[1] - self.y[0]);
        let (cx, cy) = (0.5 * (self.x[0] + self.x[1]), 0.5 * (self.y[0] + self.y[1]));
        Bounds { x: [cx - half, cx + half], y: [cy - half, cy + half] }
    }
}

const MARGIN: usize = 12;
const FRAME: [u8; 3] = [90, 90, 90];
const ZERO: [u8; 3] = [200, 200, 200];

struct Canvas {
    img: Image,
    bounds: Bounds,
}

impl Canvas {
    fn put(&mut self, x: i64, y: i64, c: [u8; 3]) {
        if x < 0 || y < 0 || x as usize >= self.img.width || y as usize >= self.img.height {
            return;
        }
        let px = self.img.pixel_mut(x as usize, y as usize);
        for (dst, &v) in px.iter_mut().zip(&c) {
            *dst = v as f32 / 255.0;
        }
    }

    fn to_px(&self, p: [f64; 2]) -> (f64, f64) {
        let (w, h) = ((self.img.width - 2 * MARGIN) as f64, (self.img.height - 2 * MARGIN) as f64);
        let b = self.bounds;
        let fx = (p[0] - b.x[0]) / (b.x[1] - b.x[0]);
        let fy = (p[1] - b.y[0]) / (b.y[1] - b.y[0]);
        (MARGIN as f64 + fx * w, MARGIN as f64 + (1.0 - fy) * h)
    }

    fn segment(&mut self, a: (f64, f64), b: (f64, f64), c: [u8; 3]) {
        let steps = (b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil().clamp(1.0, 1e5) as usize;
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            self.put((a.0 + t * (b.0 - a.0)).round() as i64, (a.1 + t * (b.1 - a.1)).round() as i64, c);
        }
    }
}

/// Render `series` over `bounds` (or their fitted bounds) on a white
/// `width × height` RGB canvas.
pub fn render_plot(series: &[Series], width: usize, height: usize, bounds: Option<Bounds>) -> Result<Image> {
    if width <= 2 * MARGIN + 1 || height <= 2 * MARGIN + 1 {
        return Err(Error::invalid(format!("plot of {width}×{height} is too small")));
    }
    let bounds = bounds.or_else(|| Bounds::fit(series)).ok_or_else(|| Error::invalid("nothing to plot"))?;
    if !(bounds.x[1] > bounds.x[0] && bounds.y[1] > bounds.y[0]) {
        return Err(Error::invalid("plot bounds are empty"));
    }
    let mut cv = Canvas { img: Image::filled(width, height, 3, 1.0)?, bounds };
    let (x0, x1) = (bounds.x[0], bounds.x[1]);
    let (y0, y1) = (bounds.y[0], bounds.y[1]);
    if x0 < 0.0 && x1 > 0.0 {
        cv.segment(cv.to_px([0.0, y0]), cv.to_px([0.0, y1]), ZERO);
    }
    if y0 < 0.0 && y1 > 0.0 {
        cv.segment(cv.to_px([x0, 0.0]), cv.to_px([x1, 0.0]), ZERO);
    }
    let corners = [[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]];
    for w in corners.windows(2) {
        cv.segment(cv.to_px(w[0]), cv.to_px(w[1]), FRAME);
    }
    for s in series {
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter(|p| p[0].is_finite() && p[1].is_finite())
            .map(|&p| cv.to_px(p))
            .collect();
        match s.style {
            SeriesStyle::Line => {
                for w in pts.windows(2) {
                    cv.segment(w[0], w[1], s.color);
                }
            }
            SeriesStyle::Scatter => {
                for &(x, y) in &pts {
                    let (x, y) = (x.round() as i64, y.round() as i64);
                    for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                        cv.put(x + dx, y + dy, s.color);
                    }
                }
            }
        }
    }
    Ok(cv.img)
}
