//! Regression, moment and goodness-of-fit helpers.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::curves::{base_digits, Cursor, CurveSpec, Family};
use crate::{rng, Error, Result};

/// Least-squares line `y = slope x + intercept`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n: usize,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(crate::error::param("fit_line needs equally long inputs"));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::Degenerate(format!("{n} points cannot determine a line")));
    }
    let mx = pairwise_sum(xs) / n as f64;
    let my = pairwise_sum(ys) / n as f64;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx <= 0.0 {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(LineFit { slope, intercept: my - slope * mx, r2, n })
}

/// Sum by recursive halving; the result does not depend on how the input
/// was produced, only on its order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

pub fn mean_se(xs: &[f64]) -> MeanSe {
    let n = xs.len();
    if n == 0 {
        return MeanSe { mean: f64::NAN, se: f64::NAN, n };
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return MeanSe { mean, se: f64::NAN, n };
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    MeanSe { mean, se: (var / n as f64).sqrt(), n }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub counts: Vec<u64>,
}

/// Pearson test of `counts` against the uniform distribution.
pub fn chi_square_uniform(counts: &[u64]) -> Result<ChiSquareResult> {
    let k = counts.len();
    let total: u64 = counts.iter().sum();
    if k < 2 || total == 0 {
        return Err(Error::Degenerate("chi-square needs two cells and at least one observation".into()));
    }
    let expected = total as f64 / k as f64;
    let statistic: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((k - 1) as f64).map_err(|e| Error::Dependency(e.to_string()))?;
    Ok(ChiSquareResult { statistic, dof: k - 1, p_value: dist.sf(statistic), counts: counts.to_vec() })
}

/// Checks that uniform times land uniformly in the `2^{d level}` dyadic cells
/// of the cube.
pub fn measure_preservation_test(
    curve: &CurveSpec,
    level: usize,
    samples: usize,
    seed: u64,
) -> Result<ChiSquareResult> {
    let mut r = rng::stream(seed, 0);
    measure_preservation_with(curve, level, samples, || rng::uniform(&mut r))
}

/// As [`measure_preservation_test`] with a caller-supplied time sampler.
pub fn measure_preservation_with(
    curve: &CurveSpec,
    level: usize,
    samples: usize,
    mut sample_t: impl FnMut() -> f64,
) -> Result<ChiSquareResult> {
    if curve.family() != Family::Standard {
        return Err(Error::Precondition("measure preservation applies to the standard family".into()));
    }
    let d = curve.d();
    if level == 0 || d * level > 20 {
        return Err(crate::error::param(format!("{level} levels in d = {d} is not a usable cell count")));
    }
    // deep enough that the cell center is strictly inside its level-`level` cell
    let depth = (level + 2).max(52 / d);
    let cells = 1usize << (d * level);
    let mut counts = vec![0u64; cells];
    let scale = (1u64 << level) as f64;
    for _ in 0..samples {
        let t = sample_t();
        let p = Cursor::from_digits(curve, &base_digits(t, d, depth))?.center();
        let mut index = 0usize;
        for i in 0..d {
            let k = ((p[i] * scale).floor() as usize).min((1 << level) - 1);
            index = (index << level) | k;
        }
        counts[index] += 1;
    }
    chi_square_uniform(&counts)
}
