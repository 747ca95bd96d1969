//! Brownian paths on dyadic grids, built by midpoint refinement.
//!
//! `B_0 = 0`, `B_1 ~ N(0, I)`, and the midpoint of a level-`l` interval
//! (length `2^{-l}`) is the average of its endpoints plus `N(0, 2^{-(l+2)} I)`.
//! The noise at every node is keyed by `(seed, node)`, so a path is fully
//! determined by its seed: refining further, in any order and on any thread,
//! never changes a value already produced.

use serde::Serialize;

use crate::point::Point;
use crate::rng::KeyedNormals;
use crate::{check_dim, Error, Result, MAX_DIM};

/// Deepest stored grid.
pub const MAX_LEVEL: usize = 24;

/// Deepest level reached by on-demand refinement; below it values are
/// interpolated linearly (the remaining fluctuation is of order `2^{-20}`).
pub const MAX_REFINE_LEVEL: usize = 40;

/// Node key of the midpoint of interval `position` at `level`.
#[inline]
fn node_key(level: usize, position: u64) -> u64 {
    (1u64 << level) + position
}

/// Key of the endpoint value `B_1`.
const ENDPOINT_KEY: u64 = 0;

/// A Brownian path stored on the grid `k 2^{-level}`.
#[derive(Clone, Debug)]
pub struct PathSample {
    d: usize,
    level: usize,
    seed: u64,
    scale: f64,
    noise: KeyedNormals,
    values: Vec<f64>,
}

/// Metadata written next to a path dump.
#[derive(Clone, Debug, Serialize)]
pub struct PathManifest {
    pub d: usize,
    pub level: usize,
    pub seed: u64,
    pub noise_scale: f64,
    pub version: &'static str,
}

/// Samples a standard Brownian path on the level-`level` grid.
pub fn sample_path(d: usize, level: usize, seed: u64) -> Result<PathSample> {
    sample_path_scaled(d, level, seed, 1.0)
}

/// As [`sample_path`] with every noise term multiplied by `scale`;
/// `scale = 0` gives the constant path `B = 0`.
pub fn sample_path_scaled(d: usize, level: usize, seed: u64, scale: f64) -> Result<PathSample> {
    check_dim(d)?;
    if level > MAX_LEVEL {
        return Err(Error::Resource(format!("grid level {level} exceeds {MAX_LEVEL}")));
    }
    if !(scale.is_finite() && scale >= 0.0) {
        return Err(crate::error::param(format!("noise scale {scale} must be finite and non-negative")));
    }
    let noise = KeyedNormals::new(seed);
    let n = 1usize << level;
    let mut values = vec![0.0; (n + 1) * d];
    let mut z = [0.0; MAX_DIM];
    noise.normals(ENDPOINT_KEY, &mut z[..d]);
    for i in 0..d {
        values[n * d + i] = scale * z[i];
    }
    for l in 0..level {
        let step = n >> l;
        let half = step / 2;
        let sd = scale * 0.5f64.powi(l as i32 + 2).sqrt();
        for p in 0..(1usize << l) {
            let lo = p * step;
            let mid = lo + half;
            noise.normals(node_key(l, p as u64), &mut z[..d]);
            for i in 0..d {
                values[mid * d + i] = 0.5 * (values[lo * d + i] + values[(lo + step) * d + i]) + sd * z[i];
            }
        }
    }
    Ok(PathSample { d, level, seed, scale, noise, values })
}

impl PathSample {
    /// A path given by its grid values, e.g. a rescaled copy of another path.
    /// Refinement below the grid uses the noise of `seed`.
    pub fn from_grid(d: usize, level: usize, seed: u64, values: Vec<f64>) -> Result<Self> {
        check_dim(d)?;
        if level > MAX_LEVEL || values.len() != ((1usize << level) + 1) * d {
            return Err(crate::error::param("grid values do not match the level"));
        }
        Ok(PathSample { d, level, seed, scale: 1.0, noise: KeyedNormals::new(seed), values })
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn level(&self) -> usize {
        self.level
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn noise_scale(&self) -> f64 {
        self.scale
    }

    /// Number of grid intervals, `2^level`.
    #[inline]
    pub fn intervals(&self) -> usize {
        1 << self.level
    }

    /// Grid spacing `2^{-level}`.
    pub fn spacing(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    /// Value at grid index `k`.
    #[inline]
    pub fn value(&self, k: usize) -> Point {
        Point::from_slice(&self.values[k * self.d..(k + 1) * self.d])
    }

    #[inline]
    pub fn coord(&self, k: usize, i: usize) -> f64 {
        self.values[k * self.d + i]
    }

    /// Flat grid values, `d` per grid time.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn manifest(&self) -> PathManifest {
        PathManifest { d: self.d, level: self.level, seed: self.seed, noise_scale: self.scale, version: crate::VERSION }
    }

    /// `B_t`. Grid times return stored values; other times are refined with
    /// the same keyed noise the grid would have used, down to
    /// [`MAX_REFINE_LEVEL`].
    pub fn evaluate_at(&self, t: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&t) {
            return Err(crate::error::param(format!("time {t} outside [0, 1]")));
        }
        let n = self.intervals();
        let x = t * n as f64;
        let k = (x.floor() as usize).min(n - 1);
        let mut frac = x - k as f64;
        if frac == 0.0 {
            return Ok(self.value(k));
        }
        if frac == 1.0 {
            return Ok(self.value(k + 1));
        }
        let d = self.d;
        let mut left = self.value(k);
        let mut right = self.value(k + 1);
        let mut position = k as u64;
        let mut z = [0.0; MAX_DIM];
        for l in self.level..MAX_REFINE_LEVEL {
            let sd = self.scale * 0.5f64.powi(l as i32 + 2).sqrt();
            self.noise.normals(node_key(l, position), &mut z[..d]);
            let mut mid = left;
            for i in 0..d {
                mid[i] = 0.5 * (left[i] + right[i]) + sd * z[i];
            }
            // frac is exact: it only ever doubles and drops its integer part
            frac *= 2.0;
            if frac == 1.0 {
                return Ok(mid);
            }
            if frac < 1.0 {
                right = mid;
                position *= 2;
            } else {
                left = mid;
                frac -= 1.0;
                position = 2 * position + 1;
            }
        }
        Ok(left.add(&right.sub(&left).scale(frac)))
    }

    /// The path restricted to the grid of a coarser level.
    pub fn coarsen(&self, level: usize) -> Result<PathSample> {
        if level > self.level {
            return Err(crate::error::param("cannot coarsen to a finer level"));
        }
        let step = 1usize << (self.level - level);
        let mut values = Vec::with_capacity(((1 << level) + 1) * self.d);
        for k in (0..=self.intervals()).step_by(step) {
            values.extend_from_slice(&self.values[k * self.d..(k + 1) * self.d]);
        }
        Ok(PathSample { values, level, ..self.clone() })
    }
}

/// `max |B_{t+s} - B_t| / sqrt(s log(1/s))` over grid pairs with lag
/// `0 < s <= s_max`.
pub fn modulus_constant(p: &PathSample, s_max: f64) -> Result<f64> {
    if !(s_max > 0.0 && s_max < (-1.0f64).exp()) {
        return Err(crate::error::param(format!("s_max = {s_max} must lie in (0, 1/e)")));
    }
    let n = p.intervals();
    let max_lag = ((s_max * n as f64).floor() as usize).min(n);
    let d = p.d;
    // one contiguous array per coordinate so the inner loops vectorize
    let coords: Vec<Vec<f64>> = (0..d).map(|i| (0..=n).map(|k| p.values[k * d + i]).collect()).collect();
    let mut sq = vec![0.0f64; n];
    let mut best: f64 = 0.0;
    for h in 1..=max_lag {
        let len = n + 1 - h;
        let sq = &mut sq[..len];
        sq.fill(0.0);
        for x in &coords {
            for (acc, (a, b)) in sq.iter_mut().zip(x[h..].iter().zip(&x[..len])) {
                let diff = a - b;
                *acc += diff * diff;
            }
        }
        let mut lanes = [0.0f64; 8];
        let mut chunks = sq.chunks_exact(8);
        for c in &mut chunks {
            for (l, v) in lanes.iter_mut().zip(c) {
                *l = if *v > *l { *v } else { *l };
            }
        }
        let worst = chunks.remainder().iter().chain(&lanes).fold(0.0f64, |m, &v| if v > m { v } else { m });
        let s = h as f64 / n as f64;
        best = best.max(worst.sqrt() / (s * (1.0 / s).ln()).sqrt());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_at_zero_and_is_prefix_stable() {
        let fine = sample_path(2, 10, 3).unwrap();
        let coarse = sample_path(2, 9, 3).unwrap();
        assert_eq!(fine.value(0), Point::zeros(2));
        assert_eq!(fine.coarsen(9).unwrap().values(), coarse.values());
    }

    #[test]
    fn evaluate_on_grid_and_off_grid() {
        let p = sample_path(3, 8, 11).unwrap();
        assert_eq!(p.evaluate_at(5.0 / 256.0).unwrap(), p.value(5));
        assert_eq!(p.evaluate_at(1.0).unwrap(), p.value(256));
        let t = 0.123_456_789;
        let a = p.evaluate_at(t).unwrap();
        assert_eq!(a, p.evaluate_at(t).unwrap());
        // refinement agrees with a finer stored grid
        let fine = sample_path(3, 12, 11).unwrap();
        let k = 1234;
        let t = k as f64 / 4096.0;
        assert_eq!(p.evaluate_at(t).unwrap(), fine.value(k));
        assert_eq!(fine.evaluate_at(t + 1e-9).unwrap(), p.evaluate_at(t + 1e-9).unwrap());
    }

    #[test]
    fn zero_noise_path() {
        let p = sample_path_scaled(2, 6, 1, 0.0).unwrap();
        assert!(p.values().iter().all(|&x| x == 0.0));
        assert_eq!(modulus_constant(&p, 0.1).unwrap(), 0.0);
        assert_eq!(p.evaluate_at(0.3).unwrap(), Point::zeros(2));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(sample_path(2, 25, 0), Err(Error::Resource(_))));
        let p = sample_path(2, 4, 0).unwrap();
        assert!(modulus_constant(&p, 0.5).is_err());
        assert!(p.evaluate_at(-0.1).is_err());
    }
}
