use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::{angular_counts, build_radial_scheme, IsotropyRule};
use crate::cmf::CmfParams;
use crate::error::{Error, Result};

/// Highest ring count tried by [`search_resolution`].
const MAX_RINGS: usize = 100_000;

/// Number of non-padding points in a grid with `n_r` rings.
pub fn active_count(params: &CmfParams, n_r: usize, rule: IsotropyRule) -> Result<usize> {
    let scheme = build_radial_scheme(params, n_r, 0)?;
    Ok(angular_counts(&scheme, params, rule)
        .iter()
        .map(|&c| c as usize)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub n_r: usize,
    pub n_active: usize,
}

/// Ring count whose grid is closest to `target_n` without exceeding it.
///
/// Rings are added until the grid overshoots the target; the best size seen
/// before that wins, ties going to the smaller ring count.
pub fn search_resolution(params: &CmfParams, target_n: usize, rule: IsotropyRule) -> Result<SearchResult> {
    if target_n < 4 {
        return Err(Error::invalid(format!("target must be >= 4, got {target_n}")));
    }
    let minimum = active_count(params, 2, rule)?;
    if minimum > target_n {
        return Err(Error::Unreachable {
            target: target_n,
            minimum,
        });
    }
    let mut best = SearchResult {
        n_r: 2,
        n_active: minimum,
    };
    for n_r in 3..=MAX_RINGS {
        let n = active_count(params, n_r, rule)?;
        if n > target_n {
            break;
        }
        if n > best.n_active {
            best = SearchResult { n_r, n_active: n };
        }
    }
    Ok(best)
}

/// An interval of `a` over which a grid with `n_r` rings has exactly the
/// requested number of points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub n_r: usize,
    /// Lower end of the interval (the transition into the target count).
    pub a: f64,
    /// Upper end of the interval (the transition out of it).
    pub a_upper: f64,
    /// Smallest two-decimal value inside the interval, or `a` rounded to two
    /// decimals when the interval holds none.
    pub display: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub n_r_range: RangeInclusive<usize>,
    pub r_max: f64,
    /// Search domain for `a`, in degrees.
    pub a_min: f64,
    pub a_max: f64,
    /// Bisection tolerance on `log10(a)`.
    pub tol: f64,
    pub rule: IsotropyRule,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            n_r_range: 2..=64,
            r_max: 8.0,
            a_min: 0.01,
            a_max: 1000.0,
            tol: 1e-6,
            rule: IsotropyRule::FiniteDifference,
        }
    }
}

/// Values of `a` producing exactly `target_n` points, one per ring count for
/// which the target is crossed inside the search domain, sorted ascending.
///
/// For fixed `n_r` the grid size is a nondecreasing step function of `a`, so
/// each ring count contributes at most one interval.
pub fn solve_a_for_exact_n(target_n: usize, opts: &SolveOptions) -> Result<Vec<ExactSolution>> {
    if target_n < 4 {
        return Err(Error::invalid(format!("target must be >= 4, got {target_n}")));
    }
    if !(opts.a_min > 0.0 && opts.a_max > opts.a_min) {
        return Err(Error::invalid("a search domain must satisfy 0 < a_min < a_max"));
    }
    let size = |log_a: f64, n_r: usize| -> Result<usize> {
        let params = CmfParams::new(10f64.powf(log_a), opts.r_max)?;
        active_count(&params, n_r, opts.rule)
    };
    let (lo0, hi0) = (opts.a_min.log10(), opts.a_max.log10());
    let mut out = Vec::new();
    for n_r in opts.n_r_range.clone() {
        if n_r < 2 {
            continue;
        }
        if size(lo0, n_r)? >= target_n || size(hi0, n_r)? < target_n {
            continue;
        }
        let lower = bisect(lo0, hi0, opts.tol, |m| Ok(size(m, n_r)? >= target_n))?;
        if size(lower, n_r)? != target_n {
            continue;
        }
        let upper = if size(hi0, n_r)? == target_n {
            hi0
        } else {
            bisect(lower, hi0, opts.tol, |m| Ok(size(m, n_r)? > target_n))?
        };
        let (a, a_upper) = (10f64.powf(lower), 10f64.powf(upper));
        let display = display_value(a, a_upper, |v| Ok(size(v.log10(), n_r)? == target_n))?;
        out.push(ExactSolution {
            n_r,
            a,
            a_upper,
            display,
        });
    }
    out.sort_by(|p, q| p.a.total_cmp(&q.a));
    Ok(out)
}

/// Smallest `x` in `[lo, hi]` (to within `tol`) with `pred(x)` true, given a
/// predicate that is false below some threshold and true above it.
fn bisect(mut lo: f64, mut hi: f64, tol: f64, mut pred: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn display_value(a: f64, a_upper: f64, mut exact: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    let mut cents = (a * 100.0).ceil();
    while cents / 100.0 < a_upper {
        let v = cents / 100.0;
        if v >= a && exact(v)? {
            return Ok(v);
        }
        cents += 1.0;
        if cents > (a * 100.0).ceil() + 1e6 {
            break;
        }
    }
    Ok((a * 100.0).round() / 100.0)
}
