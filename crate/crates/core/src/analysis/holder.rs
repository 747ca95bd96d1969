//! Empirical Hölder exponents and reverse-Hölder witnesses.

use serde::Serialize;

use super::stats::fit_line;
use crate::curves::{for_each_cell, tail_limit, Cursor, CurveSpec, Family};
use crate::{Error, Point, Result};

/// Curve values at the left endpoints of all cells of length `depth`: the
/// limits along a tail of zeros, in closed form for standard orientations
/// and summed to `1e-13` for the alternate curve.
pub fn endpoint_samples(spec: &CurveSpec, depth: usize) -> Result<Vec<(f64, Point)>> {
    let alpha = spec.alpha().ok_or_else(|| Error::Precondition("endpoint samples need a constant schedule".into()))?;
    let mut out = Vec::new();
    if spec.exceptional().is_some() {
        let mut prefixes = Vec::new();
        for_each_cell(spec, &[], depth, |c| prefixes.push(c.digits().to_vec()))?;
        for s in prefixes {
            let (p, _) = tail_limit(spec, &s, 0, 1e-13)?;
            out.push((spec.time_of(&s), p));
        }
        return Ok(out);
    }
    let k = 1.0 / (4.0 * (1.0 - alpha));
    for_each_cell(spec, &[], depth, |c| {
        let p = c.center().add(&c.orientation().signs(0).scale(k * c.side()));
        out.push((spec.time_of(c.digits()), p));
    })?;
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct HolderFit {
    pub exponent: f64,
    pub constant: f64,
    pub pairs: usize,
    /// `(g, w(g))` at every populated gap.
    pub bins: Vec<(f64, f64)>,
    pub r2: f64,
}

/// Fits the sampled modulus of continuity `w(g) = max_{|t - u| <= g} |f(t) - f(u)|`
/// as `K g^gamma`, at the gaps `g = lo r^k` up to `hi` (`r = bin_ratio`), using
/// all sample pairs with gap in `[lo, hi]`.
pub fn holder_estimate(samples: &[(f64, Point)], gap_range: (f64, f64), bin_ratio: f64) -> Result<HolderFit> {
    let (lo, hi) = gap_range;
    if !(lo > 0.0 && hi >= 16.0 * lo) {
        return Err(Error::Degenerate(format!("gap range [{lo}, {hi}] spans fewer than 4 octaves")));
    }
    if bin_ratio.is_nan() || bin_ratio <= 1.0 {
        return Err(crate::error::param("bin ratio must exceed 1"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let slack = 1.0 + 1e-9;
    let nbins = ((hi / lo).ln() / bin_ratio.ln() + 1e-9).floor() as usize + 1;
    let mut best = vec![0.0f64; nbins];
    let mut pairs = 0usize;
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            let gap = sorted[j].0 - sorted[i].0;
            if gap > hi * slack {
                break;
            }
            if gap < lo / slack {
                continue;
            }
            pairs += 1;
            // smallest edge lo r^b with gap <= edge
            let b = (((gap / lo).ln() / bin_ratio.ln()) - 1e-9).ceil().max(0.0) as usize;
            let b = b.min(nbins - 1);
            best[b] = best[b].max(sorted[i].1.dist(&sorted[j].1));
        }
    }
    if pairs < 1000 {
        return Err(Error::Degenerate(format!("only {pairs} pairs in the gap range")));
    }
    let mut running = 0.0f64;
    let mut bins = Vec::new();
    for (b, m) in best.iter().enumerate() {
        running = running.max(*m);
        if running > 0.0 {
            bins.push((lo * bin_ratio.powi(b as i32), running));
        }
    }
    if bins.len() < 3 {
        return Err(Error::Degenerate("fewer than three populated gap bins".into()));
    }
    let xs: Vec<f64> = bins.iter().map(|b| b.0.ln()).collect();
    let ys: Vec<f64> = bins.iter().map(|b| b.1.ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    Ok(HolderFit { exponent: fit.slope, constant: fit.intercept.exp(), pairs, bins, r2: fit.r2 })
}

#[derive(Clone, Debug, Serialize)]
pub struct ReverseHolderWitness {
    pub interval: (f64, f64),
    /// The largest base-4 interval inside the interval: `[k 4^-n, (k+1) 4^-n]`.
    pub level: usize,
    pub j_lo: f64,
    pub j_hi: f64,
    pub s: f64,
    pub t: f64,
    pub distance: f64,
    pub bound: f64,
}

impl ReverseHolderWitness {
    pub fn holds(&self) -> bool {
        self.distance >= self.bound
    }
}

/// Finds the largest base-4 interval `J` inside `[lo, hi]` and two times in
/// `J` mapped to adjacent corners of the square swept by `J`, and compares
/// their distance with `alpha^{3/2} / (2 (1 - alpha)) |I|^{log(1/alpha) / log 4}`.
pub fn reverse_holder_witness(spec: &CurveSpec, interval: (f64, f64), depth: usize) -> Result<ReverseHolderWitness> {
    if spec.family() != Family::Alternate {
        return Err(Error::Precondition("reverse-Hölder witnesses are defined for the alternate curve".into()));
    }
    let alpha = spec.alpha().expect("alternate curves have a constant schedule");
    let (lo, hi) = interval;
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(crate::error::param(format!("[{lo}, {hi}] is not a subinterval of [0, 1]")));
    }
    let mut found = None;
    for n in 0..=depth.min(crate::digits::MAX_DEPTH) {
        let scale = 4f64.powi(n as i32);
        let k = (lo * scale).ceil();
        if (k + 1.0) / scale <= hi {
            found = Some((n, k as u64));
            break;
        }
    }
    let (n, k) = found.ok_or_else(|| {
        Error::Resource(format!("interval of length {} needs more than {depth} base-4 levels", hi - lo))
    })?;
    let prefix: Vec<u8> = (0..n).map(|i| ((k >> (2 * (n - 1 - i))) & 3) as u8).collect();
    // digits beyond which the remaining offset is below 1e-15 of the cell side
    let extra = (1e-15f64.ln() / alpha.ln()).ceil() as usize + 1;
    let corner_walk = |corner: u8| -> Result<(f64, Point)> {
        let mut c = Cursor::from_digits(spec, &prefix)?;
        for _ in 0..extra {
            let a = c.orientation().digit_of(corner);
            c.push(a)?;
        }
        Ok((spec.time_of(c.digits()), c.center()))
    };
    let (s, ps) = corner_walk(0b00)?;
    let (t, pt) = corner_walk(0b01)?;
    let gamma = (1.0 / alpha).ln() / 4f64.ln();
    let bound = alpha.powf(1.5) / (2.0 * (1.0 - alpha)) * (hi - lo).powf(gamma);
    let scale = 4f64.powi(n as i32);
    Ok(ReverseHolderWitness {
        interval,
        level: n,
        j_lo: k as f64 / scale,
        j_hi: (k + 1) as f64 / scale,
        s,
        t,
        distance: ps.dist(&pt),
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::curve_eval;
    use crate::digits::locate;
    use crate::digits::IntervalAddress;

    #[test]
    fn endpoint_samples_are_limits() {
        let spec = CurveSpec::standard(2).unwrap();
        let s = endpoint_samples(&spec, 3).unwrap();
        assert_eq!(s.len(), 64);
        assert_eq!(s[0], (0.0, Point::zeros(2)));
        for (t, p) in &s {
            let v = curve_eval(*t, &spec, 30).unwrap();
            assert!(v.point.dist(p) <= v.err_bound + 1e-12);
        }
        let alt = CurveSpec::alternate(0.8).unwrap();
        for (t, p) in endpoint_samples(&alt, 2).unwrap() {
            let v = curve_eval(t, &alt, 48).unwrap();
            assert!(v.point.dist(&p) <= v.err_bound + 1e-12);
        }
    }

    #[test]
    fn holder_fit_of_a_power_law() {
        // f(t) = t^0.3 on a line: exponent 0.3 from pairs anchored at 0
        let samples: Vec<(f64, Point)> =
            (0..=2000).map(|i| (i as f64 / 2000.0, Point::from_slice(&[(i as f64 / 2000.0).powf(0.3), 0.0]))).collect();
        let fit = holder_estimate(&samples, (1e-3, 1.0), 2.0).unwrap();
        assert!((fit.exponent - 0.3).abs() < 0.02, "{}", fit.exponent);
        assert!(holder_estimate(&samples, (0.1, 0.5), 2.0).is_err());
    }

    #[test]
    fn standard_hilbert_exponent() {
        let spec = CurveSpec::standard(2).unwrap();
        let s = endpoint_samples(&spec, 7).unwrap();
        // the sampled modulus approaches sqrt scaling only once g is far above the resolution
        let fit = holder_estimate(&s, (2f64.powi(-9), 0.25), 2.0).unwrap();
        assert!((fit.exponent - 0.5).abs() < 0.05, "{} {:?}", fit.exponent, fit.bins);
    }

    #[test]
    fn full_interval_witness() {
        let spec = CurveSpec::alternate(0.9).unwrap();
        let w = reverse_holder_witness(&spec, (0.0, 1.0), 20).unwrap();
        assert_eq!((w.level, w.j_lo, w.j_hi), (0, 0.0, 1.0));
        assert!((w.distance - 1.0 / (2.0 * 0.1)).abs() < 1e-9, "{}", w.distance);
        assert!(w.holds());
        let w = reverse_holder_witness(&spec, (0.3, 0.31), 20).unwrap();
        assert!(w.j_lo >= 0.3 && w.j_hi <= 0.31 && w.holds());
        assert!((w.j_hi - w.j_lo) * 8.0 > 0.01);
        assert!(reverse_holder_witness(&spec, (0.3, 0.3 + 1e-30), 20).is_err());
        assert!(reverse_holder_witness(&CurveSpec::standard(2).unwrap(), (0.0, 1.0), 5).is_err());
    }

    #[test]
    fn generalized_curve_is_linear_on_gaps() {
        // on a connection interval |G(s) - G(t)| is proportional to |s - t|,
        // so no constant can bound it below by |I|^gamma as |I| shrinks
        let (alpha, rho) = (0.9, 0.2);
        let spec = CurveSpec::generalized(2, alpha, rho).unwrap();
        // the first-stage gap between the cells 0 and 1 is (rho, (1 - rho) / 3)
        let gap = match locate(0.2333, &spec.cantor().unwrap(), 3).unwrap() {
            IntervalAddress::Connection(g) => g,
            other => panic!("0.2333 should sit in a gap, got {other:?}"),
        };
        let mid = 0.5 * (gap.left + gap.right);
        let gamma = (1.0 / alpha).ln() / 4f64.ln();
        let mut ratios = Vec::new();
        for e in [1e-3, 1e-5, 1e-7] {
            let h = e * (gap.right - gap.left);
            let a = curve_eval(mid - h, &spec, 40).unwrap().point;
            let b = curve_eval(mid + h, &spec, 40).unwrap().point;
            ratios.push(a.dist(&b) / (2.0 * h).powf(gamma));
        }
        assert!(ratios[1] < ratios[0] / 10.0 && ratios[2] < ratios[1] / 10.0, "{ratios:?}");
    }
}
