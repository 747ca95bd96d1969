//! Collars of the dyadic skeletons `W_n` and the good set built from them.
//!
//! `W_n` is the union of the boundaries of the level-`n` dyadic cubes, so the
//! distance from `x` to `W_n` is the smallest distance of a coordinate of
//! `x` to the grid `2^{-n} Z`. The good set keeps the points at distance more
//! than `c 2^{-n d a}` from every `W_n`, `n <= N`.

use rand::RngCore;
use serde::Serialize;

use super::stats::mean_se;
use crate::curves::{Cursor, CurveSpec};
use crate::{check_dim, rng, Error, Point, Result};

/// Distance from `x` to `W_n`.
#[inline]
fn skeleton_distance(x: &[f64], n: usize) -> f64 {
    let scale = (1u64 << n) as f64;
    x.iter()
        .map(|&xi| {
            let f = xi * scale;
            let frac = f - f.floor();
            frac.min(1.0 - frac) / scale
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeEstimate {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub samples: usize,
    pub estimate: f64,
    pub se: f64,
    /// `1 - (1 - min(1, 2^{1-m}))^d`.
    pub exact: f64,
    /// `2 d 2^{-m}`.
    pub bound: f64,
}

impl VolumeEstimate {
    /// The estimate stays below the bound up to three standard errors.
    pub fn within_bound(&self) -> bool {
        self.estimate <= self.bound + 3.0 * self.se
    }
}

/// Monte Carlo volume of the collar `B(W_n, 2^{-n-m})` in `[0,1]^d`.
pub fn boundary_volume(d: usize, n: usize, m: usize, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    check_dim(d)?;
    if n + m > 50 {
        return Err(crate::error::param("n + m must stay below 50"));
    }
    if samples < 2 {
        return Err(crate::error::param("need at least two samples"));
    }
    let r = 0.5f64.powi((n + m) as i32);
    let mut g = rng::stream(seed, ((d as u64) << 16) | ((n as u64) << 8) | m as u64);
    let mut hits = 0usize;
    let mut x = [0.0; crate::MAX_DIM];
    for _ in 0..samples {
        for xi in &mut x[..d] {
            *xi = rng::uniform(&mut g);
        }
        if skeleton_distance(&x[..d], n) <= r {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let per_coord = (2.0 * 0.5f64.powi(m as i32)).min(1.0);
    Ok(VolumeEstimate {
        d,
        n,
        m,
        samples,
        estimate: p,
        se: (p * (1.0 - p) / (samples - 1) as f64).sqrt(),
        exact: 1.0 - (1.0 - per_coord).powi(d as i32),
        bound: 2.0 * d as f64 * 0.5f64.powi(m as i32),
    })
}

/// Whether `x` avoids `B(W_n, c 2^{-n d alpha_exp})` for every `n <= n_max`.
pub fn good_set_membership(x: &Point, c: f64, alpha_exp: f64, n_max: usize) -> bool {
    let d = x.dim() as f64;
    (0..=n_max).all(|n| skeleton_distance(x.as_slice(), n) > c * 2f64.powf(-(n as f64) * d * alpha_exp))
}

fn check_good_set_args(d: usize, c: f64, alpha_exp: f64, n_max: usize) -> Result<()> {
    check_dim(d)?;
    if !(c >= 0.0 && c.is_finite()) {
        return Err(crate::error::param(format!("c = {c} must be non-negative")));
    }
    if !(alpha_exp > 1.0 / d as f64 && alpha_exp < 1.0) {
        return Err(crate::error::param(format!("exponent {alpha_exp} must lie in (1/d, 1)")));
    }
    if n_max > 20 {
        return Err(Error::Resource(format!("truncation level {n_max} exceeds 20")));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct GoodSetEstimate {
    pub d: usize,
    pub c: f64,
    pub alpha_exp: f64,
    pub n_max: usize,
    pub samples: usize,
    /// Fraction of uniform times `t` with `H(t)` in the good set.
    pub estimate: f64,
    pub se: f64,
    /// `1 - c sum_{n<=N} 2^{-n(d a - 1)}`.
    pub series_bound: f64,
    /// `1 - 2 d c sum_{n<=N} 2^{-n(d a - 1)}`, the bound the collar volumes give.
    pub collar_bound: f64,
    /// Exact volume of the truncated good set.
    pub exact: f64,
}

/// Depth at which `H(t)` is evaluated when sampling the good set.
fn sample_depth(d: usize) -> usize {
    60 / d
}

/// Uniform `t` as random base-`2^d` digits.
fn random_digits(g: &mut impl RngCore, d: usize, depth: usize, out: &mut Vec<u8>) {
    out.clear();
    let mask = (1u64 << d) - 1;
    let mut bits = 0u64;
    let mut left = 0usize;
    for _ in 0..depth {
        if left < d {
            bits = g.next_u64();
            left = 64;
        }
        out.push((bits & mask) as u8);
        bits >>= d;
        left -= d;
    }
}

fn series(d: usize, alpha_exp: f64, n_max: usize) -> f64 {
    (0..=n_max).map(|n| 2f64.powf(-(n as f64) * (d as f64 * alpha_exp - 1.0))).sum()
}

/// Estimates the measure of `H^{-1}(K^c)` by sampling uniform times.
pub fn good_set_measure(
    d: usize,
    c: f64,
    alpha_exp: f64,
    n_max: usize,
    samples: usize,
    seed: u64,
) -> Result<GoodSetEstimate> {
    check_good_set_args(d, c, alpha_exp, n_max)?;
    let spec = CurveSpec::standard(d)?;
    let depth = sample_depth(d);
    let mut g = rng::stream(seed, 1);
    let mut digits = Vec::with_capacity(depth);
    let mut flags = Vec::with_capacity(samples);
    for _ in 0..samples {
        random_digits(&mut g, d, depth, &mut digits);
        let x = Cursor::from_digits(&spec, &digits)?.center();
        flags.push(if good_set_membership(&x, c, alpha_exp, n_max) { 1.0 } else { 0.0 });
    }
    let m = mean_se(&flags);
    let s = series(d, alpha_exp, n_max);
    Ok(GoodSetEstimate {
        d,
        c,
        alpha_exp,
        n_max,
        samples,
        estimate: m.mean,
        se: m.se,
        series_bound: 1.0 - c * s,
        collar_bound: 1.0 - 2.0 * d as f64 * c * s,
        exact: good_set_measure_exact(d, c, alpha_exp, n_max)?,
    })
}

/// The good set is a product of identical one-dimensional sets, so its
/// volume is `A^d` with `A` the length left after removing the intervals
/// `[k 2^{-n} - r_n, k 2^{-n} + r_n]`.
pub fn good_set_measure_exact(d: usize, c: f64, alpha_exp: f64, n_max: usize) -> Result<f64> {
    check_good_set_args(d, c, alpha_exp, n_max)?;
    let mut intervals = Vec::new();
    for n in 0..=n_max {
        let r = c * 2f64.powf(-(n as f64) * d as f64 * alpha_exp);
        let k_max = 1u64 << n;
        for k in 0..=k_max {
            let x = k as f64 / k_max as f64;
            intervals.push(((x - r).max(0.0), (x + r).min(1.0)));
        }
    }
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut removed = 0.0;
    let (mut lo, mut hi) = intervals[0];
    for &(a, b) in &intervals[1..] {
        if a > hi {
            removed += hi - lo;
            lo = a;
            hi = b;
        } else {
            hi = hi.max(b);
        }
    }
    removed += hi - lo;
    Ok((1.0 - removed).max(0.0).powi(d as i32))
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub pairs: usize,
    /// Rejected draws until both times were in the good set.
    pub rejected: usize,
    /// Pairs with `|H(s) - H(t)| < 2 c 2^{-n d a}`.
    pub violations: usize,
    /// Pairs with `|H(s) - H(t)| < C |s - t|^a`, `C = 2^{1 - d a} c`.
    pub holder_violations: usize,
    /// Smallest `|H(s) - H(t)| / (2 c 2^{-n d a})`.
    pub min_ratio: f64,
}

/// Samples pairs of good times that share a common prefix of random length
/// below `n_max` and checks the separation the collars force.
pub fn reverse_holder_pairs(
    d: usize,
    c: f64,
    alpha_exp: f64,
    n_max: usize,
    pairs: usize,
    seed: u64,
) -> Result<PairCheck> {
    check_good_set_args(d, c, alpha_exp, n_max)?;
    if c == 0.0 || n_max == 0 {
        return Err(crate::error::param("pairs need c > 0 and n_max >= 1"));
    }
    let spec = CurveSpec::standard(d)?;
    let depth = sample_depth(d);
    let base = 1u64 << d;
    let big_c = 2f64.powf(1.0 - d as f64 * alpha_exp) * c;
    let mut g = rng::stream(seed, 2);
    let (mut s, mut t) = (Vec::new(), Vec::new());
    let mut out = PairCheck { pairs, rejected: 0, violations: 0, holder_violations: 0, min_ratio: f64::INFINITY };
    for _ in 0..pairs {
        let common = (g.next_u64() % n_max as u64) as usize;
        let (x, y) = loop {
            random_digits(&mut g, d, depth, &mut s);
            random_digits(&mut g, d, depth, &mut t);
            t[..common].copy_from_slice(&s[..common]);
            if t[common] == s[common] {
                t[common] = ((u64::from(s[common]) + 1 + g.next_u64() % (base - 1)) % base) as u8;
            }
            let x = Cursor::from_digits(&spec, &s)?.center();
            let y = Cursor::from_digits(&spec, &t)?.center();
            if good_set_membership(&x, c, alpha_exp, n_max) && good_set_membership(&y, c, alpha_exp, n_max) {
                break (x, y);
            }
            out.rejected += 1;
            if out.rejected > 1000 * pairs.max(1) {
                return Err(Error::Degenerate("the good set is too thin to sample pairs".into()));
            }
        };
        let n = common + 1;
        let floor = 2.0 * c * 2f64.powf(-(n as f64) * d as f64 * alpha_exp);
        let dist = x.dist(&y);
        out.min_ratio = out.min_ratio.min(dist / floor);
        if dist < floor {
            out.violations += 1;
        }
        let gap = (spec.time_of(&s) - spec.time_of(&t)).abs();
        if dist < big_c * gap.powf(alpha_exp) {
            out.holder_violations += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skeleton_distance_examples() {
        assert!((skeleton_distance(&[0.3, 0.9], 0) - 0.1).abs() < 1e-15);
        assert!((skeleton_distance(&[0.3, 0.6], 1) - 0.1).abs() < 1e-15);
        assert_eq!(skeleton_distance(&[0.5, 0.5], 1), 0.0);
    }

    #[test]
    fn whole_cube_when_m_is_zero() {
        for n in 0..4 {
            let v = boundary_volume(2, n, 0, 1000, 1).unwrap();
            assert_eq!(v.estimate, 1.0);
            assert_eq!(v.exact, 1.0);
            assert!(v.within_bound());
        }
    }

    #[test]
    fn collar_volume_matches_closed_form() {
        let v = boundary_volume(3, 2, 3, 200_000, 7).unwrap();
        assert!((v.estimate - v.exact).abs() < 4.0 * v.se, "{v:?}");
        assert!(v.estimate <= 0.75);
        let v = boundary_volume(2, 0, 6, 200_000, 8).unwrap();
        assert!((v.exact - (1.0 - (1.0 - 2f64.powi(-5)).powi(2))).abs() < 1e-15);
        assert!(v.exact <= 4.0 * 2f64.powi(-6));
    }

    #[test]
    fn empty_collars_keep_everything() {
        let g = good_set_measure(3, 0.0, 0.4, 6, 2000, 1).unwrap();
        assert_eq!(g.estimate, 1.0);
        assert_eq!(g.exact, 1.0);
    }

    #[test]
    fn exact_measure_oracle() {
        // one level: the collar of W_0 is two intervals of length c
        let e = good_set_measure_exact(2, 0.1, 0.6, 0).unwrap();
        assert!((e - 0.8f64.powi(2)).abs() < 1e-15);
        // two levels add the middle plane with radius c 2^{-d a}
        let r1 = 0.1 * 2f64.powf(-1.2);
        let e = good_set_measure_exact(2, 0.1, 0.6, 1).unwrap();
        assert!((e - (0.8 - 2.0 * r1).powi(2)).abs() < 1e-15);
        let g = good_set_measure(3, 0.05, 0.4, 6, 100_000, 3).unwrap();
        assert!((g.estimate - g.exact).abs() < 3.5 * g.se, "{g:?}");
        assert!(g.estimate >= g.collar_bound);
    }

    #[test]
    fn good_pairs_are_separated() {
        let p = reverse_holder_pairs(3, 0.05, 0.4, 6, 300, 9).unwrap();
        assert_eq!(p.violations, 0);
        assert_eq!(p.holder_violations, 0);
        assert!(p.min_ratio >= 1.0);
    }
}
