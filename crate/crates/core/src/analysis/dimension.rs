//! Box-counting dimension of point clouds.

use std::collections::HashSet;

use serde::Serialize;

use super::stats::{fit_line, LineFit};
use crate::{Error, Point, Result, MAX_DIM};

/// Smallest cloud accepted by [`box_dimension`].
pub const MIN_POINTS: usize = 100_000;

#[derive(Clone, Debug, Serialize)]
pub struct DimensionFit {
    pub slope: f64,
    /// `(r, N(r))` at every scale, largest `r` first.
    pub counts: Vec<(f64, usize)>,
    /// Fit over all but the largest and the smallest scale.
    pub fit: LineFit,
    pub decades: f64,
}

/// Number of grid boxes of side `r` meeting the cloud, for each `r`.
pub fn box_counts(points: &[Point], scales: &[f64]) -> Vec<(f64, usize)> {
    scales
        .iter()
        .map(|&r| {
            let mut seen: HashSet<[i64; MAX_DIM]> = HashSet::with_capacity(points.len().min(1 << 20));
            for p in points {
                let mut key = [0i64; MAX_DIM];
                for (k, x) in key.iter_mut().zip(p.as_slice()) {
                    *k = (x / r).floor() as i64;
                }
                seen.insert(key);
            }
            (r, seen.len())
        })
        .collect()
}

/// Slope of `log N(r)` against `log(1/r)` at the scales `r_max 2^{-k}` down to
/// `r_min`, dropping the two extreme scales from the fit.
pub fn box_dimension(points: &[Point], r_min: f64, r_max: f64, min_decades: f64) -> Result<DimensionFit> {
    if points.len() < MIN_POINTS {
        return Err(Error::Degenerate(format!("{} points, need at least {MIN_POINTS}", points.len())));
    }
    if !(r_min > 0.0 && r_max > r_min) {
        return Err(crate::error::param(format!("scale range [{r_min}, {r_max}] is empty")));
    }
    let decades = (r_max / r_min).log10();
    if decades < min_decades {
        return Err(Error::Degenerate(format!("scales span {decades:.2} decades, need {min_decades}")));
    }
    let mut scales = Vec::new();
    let mut r = r_max;
    while r >= r_min * (1.0 - 1e-12) {
        scales.push(r);
        r /= 2.0;
    }
    if scales.len() < 5 {
        return Err(Error::Degenerate("fewer than five scales".into()));
    }
    let counts = box_counts(points, &scales);
    let inner = &counts[1..counts.len() - 1];
    let xs: Vec<f64> = inner.iter().map(|(r, _)| -r.ln()).collect();
    let ys: Vec<f64> = inner.iter().map(|(_, n)| (*n as f64).ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    Ok(DimensionFit { slope: fit.slope, counts, fit, decades })
}
