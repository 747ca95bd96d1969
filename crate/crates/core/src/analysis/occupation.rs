//! Occupation time `T_eps` of a small ball by `B_t - H(t)` and its moments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lemma::good_set_membership;
use super::stats::{fit_line, mean_se, pairwise_sum, LineFit};
use crate::brownian::{sample_path, PathSample};
use crate::curves::{Cursor, CurveSpec};
use crate::{check_dim, rng, Error, Point, Result};

/// Parameters of an occupation-time experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentParams {
    pub d: usize,
    /// Grid level of both the path and the time integration.
    pub level: usize,
    pub x: Vec<f64>,
    /// Times below `delta` are ignored.
    pub delta: f64,
    /// Collar constant and exponent of the good set.
    pub c: f64,
    pub alpha_exp: f64,
    pub n_max: usize,
    pub eps: Vec<f64>,
}

impl MomentParams {
    /// `d = 3`, `x = -(1/2, 1/2, 1/2)`, exponent 0.35 (inside `(1/3, 3/8)`).
    pub fn default_3d() -> Self {
        MomentParams {
            d: 3,
            level: 16,
            x: vec![-0.5; 3],
            delta: 0.05,
            c: 0.005,
            alpha_exp: 0.35,
            n_max: 8,
            eps: vec![0.02, 0.03, 0.045, 0.067, 0.1],
        }
    }

    /// Constant of the reverse-Hölder bound on the good set, `2^{1 - d a} c`.
    pub fn holder_constant(&self) -> f64 {
        2f64.powf(1.0 - self.d as f64 * self.alpha_exp) * self.c
    }

    fn validate(&self) -> Result<()> {
        check_dim(self.d)?;
        if self.x.len() != self.d {
            return Err(crate::error::param("x must have d coordinates"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(crate::error::param(format!("delta = {} must lie in (0, 1)", self.delta)));
        }
        if self.level > crate::brownian::MAX_LEVEL || self.level < self.d {
            return Err(crate::error::param(format!("grid level {} out of range", self.level)));
        }
        if self.eps.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return Err(crate::error::param("eps values must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Stream key of the within-step jitter; shared by every grid so that all
/// paths are integrated against the same sample times.
const JITTER_KEY: u64 = 0x6a69_7474;

/// `H` at one time `t_k = (k + u_k) 2^{-level}` per grid step, `u_k` uniform,
/// together with the good-set filter.
///
/// Dyadic times are mapped to dyadic points, which all lie on some skeleton
/// `W_n`, so the filter is evaluated at jittered times instead. `B(t_k)` is
/// interpolated linearly between the grid values around `t_k`.
#[derive(Clone, Debug)]
pub struct OccupationGrid {
    d: usize,
    level: usize,
    first: usize,
    times: Vec<f64>,
    jitter: Vec<f64>,
    values: Vec<Point>,
    good: Vec<bool>,
}

impl OccupationGrid {
    pub fn new(params: &MomentParams) -> Result<Self> {
        params.validate()?;
        let d = params.d;
        let spec = CurveSpec::standard(d)?;
        // at most 52 bits so that t_k is an exact double
        let depth = 52 / d;
        let bits = d * depth;
        let sub = bits - params.level;
        let n = 1usize << params.level;
        let mask = (1u64 << d) - 1;
        let mut g = rng::stream(JITTER_KEY, params.level as u64);
        let mut times = Vec::with_capacity(n);
        let mut jitter = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        let mut digits = vec![0u8; depth];
        for k in 0..n {
            let frac = ((rng::uniform(&mut g) * (1u64 << sub) as f64) as u64).min((1u64 << sub) - 1);
            let fixed = ((k as u64) << sub) | frac;
            for (i, a) in digits.iter_mut().enumerate() {
                *a = ((fixed >> (bits - d * (i + 1))) & mask) as u8;
            }
            times.push(fixed as f64 / (1u64 << bits) as f64);
            jitter.push(frac as f64 / (1u64 << sub) as f64);
            values.push(Cursor::from_digits(&spec, &digits)?.center());
        }
        let good = values.iter().map(|h| good_set_membership(h, params.c, params.alpha_exp, params.n_max)).collect();
        let first = (params.delta * n as f64).ceil() as usize;
        Ok(OccupationGrid { d, level: params.level, first, times, jitter, values, good })
    }

    pub fn dt(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    /// Lebesgue measure of the grid times counted: `[delta, 1]` within the good set.
    pub fn counted_measure(&self) -> f64 {
        self.good[self.first..].iter().filter(|&&g| g).count() as f64 * self.dt()
    }

    /// The sample time `t_k` of step `k`.
    pub fn time(&self, k: usize) -> f64 {
        self.times[k]
    }

    /// `H(t_k)`.
    pub fn value(&self, k: usize) -> Point {
        self.values[k]
    }

    /// `(step index, |B(t_k) - H(t_k) - x|)` for every counted step.
    fn distances(&self, path: &PathSample, x: &Point) -> Result<Vec<(usize, f64)>> {
        if path.d() != self.d || path.level() < self.level {
            return Err(crate::error::param("path must match the grid dimension and be at least as fine"));
        }
        let step = 1usize << (path.level() - self.level);
        Ok((self.first..self.values.len())
            .filter(|&k| self.good[k])
            .map(|k| {
                let u = self.jitter[k];
                let b = path.value(k * step).scale(1.0 - u).add(&path.value((k + 1) * step).scale(u));
                (k, b.sub(&self.values[k]).sub(x).norm())
            })
            .collect())
    }
}

/// `T_eps`: time in `[delta, 1]`, within the good set, that `B_t - H(t)`
/// spends in the closed ball `B(x, eps)`, as a Riemann sum on the grid.
pub fn occupation_time(grid: &OccupationGrid, path: &PathSample, x: &Point, eps: f64) -> Result<f64> {
    let n = grid.distances(path, x)?.iter().filter(|(_, r)| *r <= eps).count();
    Ok(n as f64 * grid.dt())
}

/// Split of `int int_{s<t}` of the occupation indicators into the regimes
/// `A1`: `|H(t) - H(s)| <= 3 eps`; otherwise `A2`: `t - s >= (4 eps / C)^{1/a}`;
/// otherwise `A3`. Values are means over paths, in units of time squared.
#[derive(Clone, Debug, Serialize)]
pub struct SecondMomentSplit {
    pub eps: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub off_diagonal: f64,
    pub diagonal: f64,
    /// The three counts add up to the off-diagonal count on every path.
    pub partition_exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub params: MomentParams,
    pub seeds: Vec<u64>,
    pub counted_measure: f64,
    pub eps: Vec<f64>,
    pub mean_t: Vec<f64>,
    pub se_t: Vec<f64>,
    pub second_moment_t: Vec<f64>,
    /// `E[T]^2 / E[T^2]`, absent where every path gave zero.
    pub pz_ratio: Vec<Option<f64>>,
    /// Levels at which no path entered the ball.
    pub censored: Vec<f64>,
    /// Fit of `log E[T_eps]` against `log eps` over uncensored levels.
    pub slope: Option<LineFit>,
    pub split: Vec<SecondMomentSplit>,
    pub cauchy_schwarz: bool,
    pub monotone: bool,
    pub warnings: Vec<String>,
}

struct PathMoments {
    t: Vec<f64>,
    counts: Vec<[u64; 5]>,
    exact: bool,
}

/// First and second moments of `T_eps` over the given seeds, one path per
/// seed.
pub fn hitting_scaling(params: &MomentParams, seeds: &[u64]) -> Result<MomentReport> {
    let grid = OccupationGrid::new(params)?;
    if seeds.is_empty() {
        return Err(crate::error::param("need at least one seed"));
    }
    let mut eps = params.eps.clone();
    eps.sort_by(|a, b| a.total_cmp(b));
    let x = Point::from_slice(&params.x);
    let dt = grid.dt();
    let big_c = params.holder_constant();
    let per_path: Vec<PathMoments> = seeds
        .par_iter()
        .map(|&seed| -> Result<PathMoments> {
            let path = sample_path(params.d, params.level, seed)?;
            let dist = grid.distances(&path, &x)?;
            let mut t = Vec::with_capacity(eps.len());
            let mut counts = Vec::with_capacity(eps.len());
            let mut exact = true;
            for &e in &eps {
                let inside: Vec<usize> = dist.iter().filter(|(_, r)| *r <= e).map(|(k, _)| *k).collect();
                t.push(inside.len() as f64 * dt);
                let lag = if big_c > 0.0 { (4.0 * e / big_c).powf(1.0 / params.alpha_exp) } else { f64::INFINITY };
                let (mut a1, mut a2, mut a3) = (0u64, 0u64, 0u64);
                for (i, &s) in inside.iter().enumerate() {
                    for &u in &inside[i + 1..] {
                        if grid.values[u].dist(&grid.values[s]) <= 3.0 * e {
                            a1 += 1;
                        } else if grid.times[u] - grid.times[s] >= lag {
                            a2 += 1;
                        } else {
                            a3 += 1;
                        }
                    }
                }
                let n = inside.len() as u64;
                let off = n * n.saturating_sub(1) / 2;
                exact &= a1 + a2 + a3 == off;
                counts.push([a1, a2, a3, off, n]);
            }
            Ok(PathMoments { t, counts, exact })
        })
        .collect::<Result<_>>()?;

    let mut report = MomentReport {
        params: params.clone(),
        seeds: seeds.to_vec(),
        counted_measure: grid.counted_measure(),
        eps: eps.clone(),
        mean_t: Vec::new(),
        se_t: Vec::new(),
        second_moment_t: Vec::new(),
        pz_ratio: Vec::new(),
        censored: Vec::new(),
        slope: None,
        split: Vec::new(),
        cauchy_schwarz: true,
        monotone: per_path.iter().all(|p| p.t.windows(2).all(|w| w[0] <= w[1])),
        warnings: Vec::new(),
    };
    if dt > eps.iter().copied().filter(|&e| e > 0.0).fold(f64::INFINITY, f64::min).powi(2) {
        report.warnings.push(format!("grid step {dt:.3e} exceeds eps^2: occupation is under-resolved"));
    }
    let n_paths = per_path.len() as f64;
    for (j, &e) in eps.iter().enumerate() {
        let ts: Vec<f64> = per_path.iter().map(|p| p.t[j]).collect();
        let sq: Vec<f64> = ts.iter().map(|t| t * t).collect();
        let m = mean_se(&ts);
        let m2 = pairwise_sum(&sq) / n_paths;
        report.cauchy_schwarz &= m2 >= m.mean * m.mean * (1.0 - 1e-12);
        report.mean_t.push(m.mean);
        report.se_t.push(m.se);
        report.second_moment_t.push(m2);
        if m.mean > 0.0 {
            report.pz_ratio.push(Some(m.mean * m.mean / m2));
        } else {
            report.pz_ratio.push(None);
            report.censored.push(e);
        }
        let mean_of = |i: usize| per_path.iter().map(|p| p.counts[j][i] as f64).sum::<f64>() / n_paths * dt * dt;
        report.split.push(SecondMomentSplit {
            eps: e,
            a1: mean_of(0),
            a2: mean_of(1),
            a3: mean_of(2),
            off_diagonal: mean_of(3),
            diagonal: per_path.iter().map(|p| p.counts[j][4] as f64).sum::<f64>() / n_paths * dt * dt,
            partition_exact: per_path.iter().all(|p| p.exact),
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        eps.iter().zip(&report.mean_t).filter(|(e, m)| **e > 0.0 && **m > 0.0).map(|(e, m)| (e.ln(), m.ln())).unzip();
    report.slope = if xs.len() >= 2 { Some(fit_line(&xs, &ys)?) } else { None };
    Ok(report)
}

impl MomentReport {
    /// Whether the Paley-Zygmund ratio decays monotonically towards zero as
    /// `eps` shrinks: strictly decreasing along decreasing `eps`, and the
    /// smallest-`eps` value at most half the largest-`eps` value.
    pub fn pz_decays(&self) -> bool {
        let r: Vec<f64> = self.pz_ratio.iter().map(|r| r.unwrap_or(0.0)).collect();
        if r.len() < 2 {
            return false;
        }
        let strictly = r.windows(2).all(|w| w[0] < w[1]);
        strictly && r[0] <= 0.5 * r[r.len() - 1]
    }

    /// The slope fit, or an error when fewer than two levels were uncensored.
    pub fn slope_fit(&self) -> Result<&LineFit> {
        self.slope.as_ref().ok_or_else(|| Error::Degenerate("fewer than two uncensored eps levels".into()))
    }

    pub fn pz_floor(&self) -> f64 {
        self.pz_ratio.iter().map(|r| r.unwrap_or(0.0)).fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brownian::sample_path_scaled;
    use crate::curves::curve_eval;

    fn small() -> MomentParams {
        MomentParams { level: 12, eps: vec![0.0, 0.05, 0.1, 0.2], ..MomentParams::default_3d() }
    }

    #[test]
    fn grid_values_are_curve_values() {
        let grid = OccupationGrid::new(&small()).unwrap();
        let spec = CurveSpec::standard(3).unwrap();
        for k in [0usize, 1, 7, 1000, 4095] {
            let t = grid.time(k);
            assert!(t >= k as f64 / 4096.0 && t < (k + 1) as f64 / 4096.0);
            let v = curve_eval(t, &spec, 20).unwrap();
            assert!(v.point.dist(&grid.value(k)) <= v.err_bound + 3f64.sqrt() * 0.5f64.powi(17), "k = {k}");
        }
    }

    #[test]
    fn huge_ball_counts_all_good_time() {
        let p = small();
        let grid = OccupationGrid::new(&p).unwrap();
        let path = sample_path(3, 12, 1).unwrap();
        let x = Point::from_slice(&p.x);
        let t = occupation_time(&grid, &path, &x, 1e6).unwrap();
        assert_eq!(t, grid.counted_measure());
        assert!(t < 1.0 - p.delta + 1e-12 && t > 0.5);
        assert_eq!(occupation_time(&grid, &path, &x, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn zero_noise_occupation_is_deterministic() {
        // B = 0: T_eps is the good time with |H(t) + x| <= eps
        let p = small();
        let grid = OccupationGrid::new(&p).unwrap();
        let zero = sample_path_scaled(3, 12, 0, 0.0).unwrap();
        let x = Point::from_slice(&p.x);
        let direct =
            (grid.first..4096).filter(|&k| grid.good[k] && grid.value(k).add(&x).norm() <= 0.3).count() as f64 / 4096.0;
        assert_eq!(occupation_time(&grid, &zero, &x, 0.3).unwrap(), direct);
    }

    #[test]
    fn moments_are_consistent() {
        let r = hitting_scaling(&small(), &(0..40).collect::<Vec<_>>()).unwrap();
        assert!(r.cauchy_schwarz && r.monotone);
        assert!(r.split.iter().all(|s| s.partition_exact));
        assert_eq!(r.censored, vec![0.0]);
        for (s, m2) in r.split.iter().zip(&r.second_moment_t) {
            assert!((2.0 * s.off_diagonal + s.diagonal - m2).abs() <= 1e-12 * m2.max(1e-300));
            assert!((s.a1 + s.a2 + s.a3 - s.off_diagonal).abs() <= 1e-12 * s.off_diagonal.max(1e-300));
        }
        assert!(r.slope_fit().is_ok());
    }
}
