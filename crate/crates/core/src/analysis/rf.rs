use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{linear_fit, LinearFit};
use super::stack::{rf_backproject, LayerStack};
use crate::error::{Error, Result};

/// How an RF's point set is reduced to a diameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiameterStatistic {
    /// Largest distance between two member points.
    #[default]
    MaxExtent,
    /// `4σ` of the fitted Gaussian, `σ²` the mean covariance eigenvalue.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfRecord {
    pub layer: usize,
    pub unit: usize,
    /// Eccentricity of the unit itself, degrees.
    pub eccentricity: f64,
    pub diameter: f64,
    pub aspect: f64,
    pub size: usize,
    pub touches_padding: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRfProfile {
    pub layer: usize,
    pub records: Vec<RfRecord>,
    /// Fit over the units whose back-projection never meets padding.
    pub fit: Option<LinearFit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeFit {
    /// `sqrt(λ₁/λ₂)` of the covariance; `+∞` when degenerate.
    pub aspect: f64,
    /// Angle of the principal axis, radians in `(-π/2, π/2]`.
    pub orientation: f64,
}

fn covariance(points: &[[f64; 2]], weights: Option<&[f64]>) -> Result<[f64; 3]> {
    if let Some(w) = weights {
        if w.len() != points.len() {
            return Err(Error::shape(format!("{} weights for {} points", w.len(), points.len())));
        }
        if w.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid("weights must be finite and non-negative"));
        }
    }
    let wt = |i: usize| weights.map_or(1.0, |w| w[i]);
    let total: f64 = (0..points.len()).map(wt).sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::invalid("weights sum to zero"));
    }
    let (mut mx, mut my) = (0.0, 0.0);
    for (i, p) in points.iter().enumerate() {
        mx += wt(i) * p[0];
        my += wt(i) * p[1];
    }
    let (mx, my) = (mx / total, my / total);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (i, p) in points.iter().enumerate() {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        sxx += wt(i) * dx * dx;
        sxy += wt(i) * dx * dy;
        syy += wt(i) * dy * dy;
    }
    Ok([sxx / total, sxy / total, syy / total])
}

fn eigen(c: [f64; 3]) -> (f64, f64, f64) {
    let [sxx, sxy, syy] = c;
    let half_trace = 0.5 * (sxx + syy);
    let disc = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    (half_trace + disc, (half_trace - disc).max(0.0), angle)
}

/// Bivariate Gaussian fitted by (weighted) second moments.
pub fn rf_shape_fit(points: &[[f64; 2]], weights: Option<&[f64]>) -> Result<ShapeFit> {
    if points.len() < 8 {
        return Err(Error::invalid(format!("shape fit needs >= 8 points, got {}", points.len())));
    }
    let (l1, l2, mut orientation) = eigen(covariance(points, weights)?);
    if orientation <= -std::f64::consts::FRAC_PI_2 {
        orientation += std::f64::consts::PI;
    }
    let aspect = if l1.is_nan() || l1 <= 0.0 || l2 <= 1e-12 * l1 { f64::INFINITY } else { (l1 / l2).sqrt() };
    Ok(ShapeFit { aspect, orientation })
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull, counter-clockwise, collinear points dropped.
pub(crate) fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Largest pairwise distance, found on the convex hull.
pub fn max_extent(points: &[[f64; 2]]) -> f64 {
    let hull = convex_hull(points);
    let mut best = 0.0f64;
    for (i, p) in hull.iter().enumerate() {
        for q in &hull[i + 1..] {
            best = best.max((p[0] - q[0]).hypot(p[1] - q[1]));
        }
    }
    best
}

fn diameter(points: &[[f64; 2]], stat: DiameterStatistic) -> f64 {
    match stat {
        DiameterStatistic::MaxExtent => max_extent(points),
        DiameterStatistic::Gaussian => match covariance(points, None) {
            Ok(c) => 4.0 * (0.5 * (c[0] + c[2])).sqrt(),
            Err(_) => 0.0,
        },
    }
}

/// RF diameter and shape of every non-padding unit of every processing layer,
/// with a linear fit of diameter against eccentricity per layer.
pub fn rf_diameter_profile(stack: &LayerStack, stat: DiameterStatistic) -> Result<Vec<LayerRfProfile>> {
    let visual: Vec<[f64; 2]> = stack.input.points.iter().map(|p| [p.x, p.y]).collect();
    (1..stack.depth())
        .map(|layer| {
            let grid = stack.grid(layer);
            let records: Vec<RfRecord> = grid
                .active_indices()
                .collect::<Vec<_>>()
                .into_par_iter()
                .map(|unit| {
                    let trace = rf_backproject(stack, layer, unit)?;
                    let pts: Vec<[f64; 2]> = trace.points.iter().map(|&i| visual[i as usize]).collect();
                    let aspect = if pts.len() >= 8 { rf_shape_fit(&pts, None)?.aspect } else { f64::INFINITY };
                    Ok(RfRecord {
                        layer,
                        unit,
                        eccentricity: grid.points[unit].r,
                        diameter: diameter(&pts, stat),
                        aspect,
                        size: pts.len(),
                        touches_padding: trace.touches_padding,
                    })
                })
                .collect::<Result<_>>()?;
            let (xs, ys): (Vec<f64>, Vec<f64>) = records
                .iter()
                .filter(|r| !r.touches_padding)
                .map(|r| (r.eccentricity, r.diameter))
                .unzip();
            let fit = linear_fit(&xs, &ys).ok();
            Ok(LayerRfProfile { layer, records, fit })
        })
        .collect()
}

/// Counts per bin of `[edges[i], edges[i + 1])`; values outside are dropped.
pub fn histogram(values: &[f64], edges: &[f64]) -> Vec<usize> {
    let mut counts = vec![0; edges.len().saturating_sub(1)];
    for &v in values {
        if let Some(i) = edges.windows(2).position(|e| v >= e[0] && v < e[1]) {
            counts[i] += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_a_square_with_interior() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5], [0.5, 0.0]];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert!((max_extent(&pts) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn extent_matches_brute_force() {
        let pts: Vec<[f64; 2]> = (0..50).map(|i| {
            let t = i as f64 * 0.7;
            [t.sin() * (1.0 + 0.3 * t.cos()), (1.3 * t).cos()]
        }).collect();
        let mut brute = 0.0f64;
        for p in &pts {
            for q in &pts {
                brute = brute.max((p[0] - q[0]).hypot(p[1] - q[1]));
            }
        }
        assert!((max_extent(&pts) - brute).abs() < 1e-12);
    }

    #[test]
    fn degenerate_shapes() {
        let line: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, 0.0]).collect();
        assert_eq!(rf_shape_fit(&line, None).unwrap().aspect, f64::INFINITY);
        assert!(rf_shape_fit(&line[..5], None).is_err());
        assert!(rf_shape_fit(&line, Some(&[1.0; 3])).is_err());
        assert_eq!(max_extent(&line), 9.0);
    }

    #[test]
    fn histogram_bins() {
        assert_eq!(histogram(&[1.0, 1.05, 1.2, 2.0, 0.5], &[1.0, 1.1, 1.3]), vec![2, 1]);
    }
}
