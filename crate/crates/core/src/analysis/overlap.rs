//! The overlap condition `beta alpha^n >= C sqrt(rho^n n log(1/rho))` and the
//! cell-by-cell covering it guarantees.

use serde::Serialize;

use super::SignConvention;
use crate::brownian::{modulus_constant, PathSample};
use crate::curves::{Cursor, CurveSpec, Family, ScaleSchedule};
use crate::{Error, Point, Result, MAX_DIM};

/// `log(beta alpha^n) - log(C sqrt(rho^n n log(1/rho)))`; the overlap
/// condition holds at level `n` iff this is non-negative.
pub fn overlap_margin(alpha: f64, rho: f64, c: f64, n: usize) -> f64 {
    let beta = (2.0 * alpha - 1.0) / 4.0;
    let n = n as f64;
    beta.ln() + n * alpha.ln() - c.ln() - 0.5 * (n * rho.ln() + n.ln() + (-rho.ln()).ln())
}

/// Smallest `n0 >= 1` such that the overlap condition holds for every
/// `n >= n0`.
pub fn min_overlap_level(alpha: f64, rho: f64, c: f64, d: usize) -> Result<usize> {
    crate::check_dim(d)?;
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(crate::error::param(format!("alpha = {alpha} must lie in (1/2, 1)")));
    }
    let rho_max = 1.0 / (1u64 << d) as f64;
    if !(rho > 0.0 && rho < rho_max) {
        return Err(crate::error::param(format!("rho = {rho} must lie in (0, {rho_max})")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(crate::error::param(format!("modulus constant {c} must be positive")));
    }
    // the margin has derivative s - 1/(2n) with s > 0 because rho < alpha^2,
    // so it is increasing from n = 1/(2s) on
    let s = alpha.ln() - 0.5 * rho.ln();
    let turn = (1.0 / (2.0 * s)).ceil().max(1.0);
    if turn > 1e8 {
        return Err(Error::Resource(format!("overlap margin turns upward only after n = {turn}")));
    }
    let mut n = turn as usize;
    while overlap_margin(alpha, rho, c, n) < 0.0 {
        n += 1;
        if n > 100_000_000 {
            return Err(Error::Resource("overlap condition not reached by n = 1e8".into()));
        }
    }
    while n > 1 && overlap_margin(alpha, rho, c, n - 1) >= 0.0 {
        n -= 1;
    }
    Ok(n)
}

/// Result of scanning a scale schedule for the overlap inequality.
#[derive(Clone, Debug, Serialize)]
pub struct OverlapScan {
    /// First index from which the inequality holds up to the end of the scan.
    pub threshold: Option<usize>,
    pub scanned: usize,
    /// Last index at which it failed.
    pub last_failure: Option<usize>,
    /// First index with `beta_{n+1} <= 0`.
    pub nonpositive_beta: Option<usize>,
    /// `beta_{n+1} prod alpha_i / sqrt(-P log P)` at the last index, `P = prod rho_i`.
    pub final_ratio: f64,
}

/// Scans `beta_{n+1} prod_{i<=n} alpha_i >= C sqrt(-(prod rho_i) log(prod rho_i))`
/// for `n = 1..=n_max`.
pub fn mixed_overlap_check(schedule: &ScaleSchedule, c: f64, n_max: usize) -> Result<OverlapScan> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(crate::error::param(format!("modulus constant {c} must be positive")));
    }
    if n_max == 0 {
        return Err(crate::error::param("scan at least one level"));
    }
    let mut log_alpha = 0.0;
    let mut log_rho = 0.0;
    let mut last_failure = None;
    let mut nonpositive_beta = None;
    let mut final_ratio = 0.0;
    for n in 1..=n_max {
        log_alpha += schedule.alpha(n).ln();
        log_rho += schedule.rho(n).ln();
        let beta = schedule.beta(n + 1);
        if beta <= 0.0 {
            nonpositive_beta.get_or_insert(n);
            last_failure = Some(n);
            final_ratio = 0.0;
            continue;
        }
        let log_ratio = beta.ln() + log_alpha - 0.5 * (log_rho + (-log_rho).ln());
        final_ratio = log_ratio.exp();
        if log_ratio < c.ln() {
            last_failure = Some(n);
        }
    }
    let threshold = match last_failure {
        Some(n) if n == n_max => None,
        Some(n) => Some(n + 1),
        None => Some(1),
    };
    Ok(OverlapScan { threshold, scanned: n_max, last_failure, nonpositive_beta, final_ratio })
}

/// Outcome of the per-level covering check along one path.
#[derive(Clone, Debug, Serialize)]
pub struct ContainmentReport {
    pub seed: u64,
    /// Modulus constant measured on grid lags up to `s_max`.
    pub grid_modulus: f64,
    /// Constant used for `n0`: the grid value, raised if a parent/child
    /// pair of the checked subtree needs more.
    pub modulus: f64,
    pub n0: usize,
    pub first_level: usize,
    pub last_level: usize,
    pub parents: usize,
    /// Shifted parents not covered by the union of their shifted children.
    pub violations: usize,
    /// Parent/child shifts larger than `beta alpha^n` (sup norm).
    pub shift_violations: usize,
    pub max_shift_ratio: f64,
}

impl ContainmentReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.shift_violations == 0
    }
}

/// For every parent cell `r` at levels `n0..=n0+extra` below the cell
/// addressed by `anchor` (repeated cyclically to length `n0`), checks that the
/// shifted parent cube of side `alpha^n`, centered at `B(t_r) - G_n(r)`, is
/// covered by its `2^d` shifted children, and that each child moved by at
/// most `beta alpha^n` relative to the parent. `n0` comes from the modulus of
/// the realized path.
pub fn containment_check(
    curve: &CurveSpec,
    path: &PathSample,
    anchor: &[u8],
    extra: usize,
    s_max: f64,
    convention: SignConvention,
) -> Result<ContainmentReport> {
    if curve.family() != Family::Generalized {
        return Err(Error::Precondition("containment is checked for the generalized family".into()));
    }
    let (alpha, rho) = match *curve.schedule() {
        ScaleSchedule::Constant { alpha, rho } => (alpha, rho),
        _ => return Err(Error::Precondition("containment needs a constant schedule".into())),
    };
    if path.d() != curve.d() {
        return Err(crate::error::param("path and curve dimensions differ"));
    }
    let grid_modulus = modulus_constant(path, s_max)?;
    let mut c = grid_modulus.max(1e-12);
    loop {
        let n0 = min_overlap_level(alpha, rho, c, curve.d())?;
        let root: Vec<u8> = (0..n0).map(|i| if anchor.is_empty() { 0 } else { anchor[i % anchor.len()] }).collect();
        let mut walk = Walk::new(curve, path, alpha, convention, n0 + extra);
        let mut cursor = Cursor::from_digits(curve, &root)?;
        let b = path.evaluate_at(curve.time_of(&root))?;
        walk.visit(&mut cursor, b)?;
        if walk.pair_modulus > c {
            c = walk.pair_modulus;
            continue;
        }
        return Ok(ContainmentReport {
            seed: path.seed(),
            grid_modulus,
            modulus: c,
            n0,
            first_level: n0,
            last_level: n0 + extra,
            parents: walk.parents,
            violations: walk.violations,
            shift_violations: walk.shift_violations,
            max_shift_ratio: walk.max_shift_ratio,
        });
    }
}

struct Walk<'a> {
    curve: &'a CurveSpec,
    path: &'a PathSample,
    alpha: f64,
    beta: f64,
    convention: SignConvention,
    last_parent: usize,
    parents: usize,
    violations: usize,
    shift_violations: usize,
    max_shift_ratio: f64,
    pair_modulus: f64,
}

impl<'a> Walk<'a> {
    fn new(curve: &'a CurveSpec, path: &'a PathSample, alpha: f64, convention: SignConvention, last: usize) -> Self {
        Walk {
            curve,
            path,
            alpha,
            beta: (2.0 * alpha - 1.0) / 4.0,
            convention,
            last_parent: last,
            parents: 0,
            violations: 0,
            shift_violations: 0,
            max_shift_ratio: 0.0,
            pair_modulus: 0.0,
        }
    }

    fn visit(&mut self, c: &mut Cursor<'_>, b: Point) -> Result<()> {
        let n = c.depth();
        let d = self.curve.d();
        let side = c.side();
        let center = self.convention.combine(&b, &c.center());
        let t = self.curve.time_of(c.digits());
        let mut kids = Vec::with_capacity(self.curve.base());
        let mut kid_b = Vec::with_capacity(self.curve.base());
        for a in 0..self.curve.base() as u8 {
            c.push(a)?;
            let tk = self.curve.time_of(c.digits());
            let bk = self.path.evaluate_at(tk)?;
            let s = tk - t;
            if s > 0.0 {
                let r = bk.dist(&b) / (s * (1.0 / s).ln()).sqrt();
                self.pair_modulus = self.pair_modulus.max(r);
            }
            let shift = bk.sup_dist(&b) / (self.beta * side);
            self.max_shift_ratio = self.max_shift_ratio.max(shift);
            if shift > 1.0 {
                self.shift_violations += 1;
            }
            kids.push((self.convention.combine(&bk, &c.center()), c.side() / 2.0));
            kid_b.push(bk);
            c.pop();
        }
        debug_assert!((c.side() * self.alpha - kids[0].1 * 2.0).abs() <= 1e-12 * c.side());
        self.parents += 1;
        if !box_covered(&center, side / 2.0, &kids, d) {
            self.violations += 1;
        }
        if n < self.last_parent {
            for (a, bk) in kid_b.into_iter().enumerate() {
                c.push(a as u8)?;
                self.visit(c, bk)?;
                c.pop();
            }
        }
        Ok(())
    }
}

/// Whether the closed cube `(center, half)` lies in the union of the closed
/// cubes `boxes`, by splitting it along every box face.
pub(crate) fn box_covered(center: &Point, half: f64, boxes: &[(Point, f64)], d: usize) -> bool {
    let mut cuts: Vec<Vec<f64>> = Vec::with_capacity(d);
    for i in 0..d {
        let (lo, hi) = (center[i] - half, center[i] + half);
        let mut v = vec![lo, hi];
        for (c, h) in boxes {
            for x in [c[i] - h, c[i] + h] {
                if x > lo && x < hi {
                    v.push(x);
                }
            }
        }
        v.sort_by(|a, b| a.total_cmp(b));
        v.dedup();
        cuts.push(v);
    }
    let mut index = [0usize; MAX_DIM];
    loop {
        let mut mid = Point::zeros(d);
        for i in 0..d {
            mid[i] = 0.5 * (cuts[i][index[i]] + cuts[i][index[i] + 1]);
        }
        if !boxes.iter().any(|(c, h)| c.sup_dist(&mid) <= *h) {
            return false;
        }
        let mut i = 0;
        loop {
            if i == d {
                return true;
            }
            index[i] += 1;
            if index[i] + 1 < cuts[i].len() {
                break;
            }
            index[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brownian::{sample_path, sample_path_scaled};

    /// Direct scan of the undisguised inequality.
    fn scan_oracle(alpha: f64, rho: f64, c: f64) -> usize {
        let beta = (2.0 * alpha - 1.0) / 4.0;
        let holds = |n: usize| {
            let n = n as f64;
            beta * alpha.powf(n) >= c * (rho.powf(n) * n * (1.0 / rho).ln()).sqrt()
        };
        let last_fail = (1..=200).rev().find(|&n| !holds(n)).unwrap_or(0);
        // the ratio keeps increasing past the crossing
        let ratio = |n: usize| beta * alpha.powi(n as i32) / (rho.powi(n as i32) * n as f64 * (1.0 / rho).ln()).sqrt();
        for n in last_fail + 1..200 {
            assert!(ratio(n + 1) > ratio(n));
        }
        last_fail + 1
    }

    #[test]
    fn min_overlap_level_matches_scan() {
        assert_eq!(scan_oracle(0.9, 0.2, 3.0), 6);
        assert_eq!(min_overlap_level(0.9, 0.2, 3.0, 2).unwrap(), 6);
        for &(a, r, c) in &[(0.6, 0.1, 1.0), (0.75, 0.2, 3.0), (0.95, 0.05, 10.0), (0.55, 0.2, 0.5)] {
            assert_eq!(min_overlap_level(a, r, c, 2).unwrap(), scan_oracle(a, r, c), "{a} {r} {c}");
        }
        assert!(min_overlap_level(0.5, 0.2, 3.0, 2).is_err());
        assert!(min_overlap_level(0.9, 0.25, 3.0, 2).is_err());
    }

    #[test]
    fn mixed_scan_reduces_to_constant() {
        let s = ScaleSchedule::constant(0.9, 0.2);
        let scan = mixed_overlap_check(&s, 3.0, 300).unwrap();
        assert_eq!(scan.threshold, Some(min_overlap_level(0.9, 0.2, 3.0, 2).unwrap()));
    }

    #[test]
    fn half_scales_never_overlap() {
        let s = ScaleSchedule::constant(0.5, 0.25);
        let scan = mixed_overlap_check(&s, 3.0, 100).unwrap();
        assert_eq!(scan.threshold, None);
        assert_eq!(scan.nonpositive_beta, Some(1));
    }

    #[test]
    fn harmonic_schedule_ratio_limit() {
        // beta_{n+1} prod alpha_i ~ e^gamma / (4 2^n) and
        // sqrt(-P log P) ~ 2^{-n} sqrt(e^{-gamma} log 4), so the ratio tends
        // to e^{3 gamma / 2} / (4 sqrt(log 4)) ~ 0.505
        let gamma = 0.577_215_664_901_532_9_f64;
        let limit = (1.5 * gamma).exp() / (4.0 * 4f64.ln().sqrt());
        let s = ScaleSchedule::harmonic(0.0, 2);
        let scan = mixed_overlap_check(&s, 3.0, 10_000).unwrap();
        assert!((scan.final_ratio - limit).abs() < 1e-3, "{} vs {limit}", scan.final_ratio);
        assert_eq!(scan.threshold, None);
        let loose = mixed_overlap_check(&s, 0.4, 10_000).unwrap();
        assert!(loose.threshold.is_some());
    }

    #[test]
    fn union_cover_geometry() {
        let p = Point::from_slice(&[0.0, 0.0]);
        let q = |x: f64, y: f64, h: f64| (Point::from_slice(&[x, y]), h);
        // four quadrant boxes cover exactly
        let kids = [q(-0.5, -0.5, 0.5), q(0.5, -0.5, 0.5), q(-0.5, 0.5, 0.5), q(0.5, 0.5, 0.5)];
        assert!(box_covered(&p, 1.0, &kids, 2));
        // a gap along one line is found
        let gap = [q(-0.5, -0.5, 0.5), q(0.51, -0.5, 0.5), q(-0.5, 0.5, 0.5), q(0.5, 0.5, 0.5)];
        assert!(!box_covered(&p, 1.0, &gap, 2));
        // a missing corner is found
        assert!(!box_covered(&p, 1.0, &kids[..3], 2));
    }

    #[test]
    fn children_cover_parent_until_shift_exceeds_beta() {
        // moving a child towards the parent center by more than beta alpha^n
        // uncovers the parent corner it was responsible for
        let alpha = 0.8;
        let beta = (2.0 * alpha - 1.0) / 4.0;
        let spec = CurveSpec::generalized(2, alpha, 0.2).unwrap();
        let c = Cursor::new(&spec);
        let kids: Vec<_> = (0..4)
            .map(|a| {
                let mut k = c.clone();
                k.push(a).unwrap();
                (k.center(), k.side() / 2.0)
            })
            .collect();
        assert!(box_covered(&c.center(), 0.5, &kids, 2));
        for (eps, covered) in [(-1e-9, true), (1e-9, false)] {
            let mut moved = kids.clone();
            let away = moved[0].0.sub(&c.center());
            let mut shift = Point::zeros(2);
            shift[0] = -(beta + eps) * away[0].signum();
            moved[0].0 = moved[0].0.add(&shift);
            assert_eq!(box_covered(&c.center(), 0.5, &moved, 2), covered, "eps {eps}");
        }
    }

    #[test]
    fn containment_holds_on_paths() {
        let spec = CurveSpec::generalized(2, 0.9, 0.2).unwrap();
        for seed in 0..3 {
            let path = sample_path(2, 12, seed).unwrap();
            let r =
                containment_check(&spec, &path, &[0, 1, 2, 3], 2, 1.0 / 64.0, SignConvention::PathMinusCurve).unwrap();
            assert!(r.passed(), "{r:?}");
            assert!(r.modulus >= r.grid_modulus);
            assert_eq!(r.parents, 1 + 4 + 16);
        }
        let zero = sample_path_scaled(2, 8, 0, 0.0).unwrap();
        let r = containment_check(&spec, &zero, &[], 1, 0.1, SignConvention::CurvePlusPath).unwrap();
        assert!(r.passed() && r.max_shift_ratio == 0.0);
    }
}
