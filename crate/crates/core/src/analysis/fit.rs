use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n: usize,
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::shape(format!("{} x values against {} y values", xs.len(), ys.len())));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::invalid(format!("a line needs >= 2 points, got {n}")));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::domain("all x values coincide"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn powerlaw_fit(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    if xs.len() < 3 {
        return Err(Error::invalid(format!("a power law needs >= 3 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::domain("power-law data must be positive and finite"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let fit = linear_fit(&lx, &ly)?;
    Ok(PowerLawFit {
        exponent: fit.slope,
        prefactor: fit.intercept.exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 5.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12 && (f.intercept - 3.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quartic() {
        let xs: Vec<f64> = (1..10).map(|i| i as f64 * 1.7).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x.powi(4)).collect();
        let f = powerlaw_fit(&xs, &ys).unwrap();
        assert!((f.exponent - 4.0).abs() < 1e-9);
        assert!((f.prefactor - 2.5).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_data() {
        assert!(powerlaw_fit(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(powerlaw_fit(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]).is_err());
        assert!(powerlaw_fit(&[1.0, -2.0, 3.0], &[1.0, 1.0, 2.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 2.0]).is_err());
        assert!(linear_fit(&[1.0], &[0.0, 2.0]).is_err());
    }
}
