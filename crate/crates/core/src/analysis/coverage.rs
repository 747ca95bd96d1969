//! Coverage of a target cube by shifted level-`m` cubes, and separation of
//! the shifted cube centers when the cubes are disjoint.

use serde::Serialize;

use super::SignConvention;
use crate::brownian::PathSample;
use crate::curves::{cells, Cube, Cursor, CurveSpec};
use crate::{Error, Point, Result};

/// Largest coverage grid.
const MAX_GRID_CELLS: usize = 1 << 24;

#[derive(Clone, Debug, Serialize)]
pub struct CoverageReport {
    pub family: String,
    pub d: usize,
    pub alpha: Option<f64>,
    pub rho: Option<f64>,
    pub seed: u64,
    pub noise_scale: f64,
    pub convention: SignConvention,
    pub target_center: Vec<f64>,
    pub target_side: f64,
    /// Grid resolution actually used (the target side divided evenly).
    pub delta: f64,
    pub cells_per_axis: usize,
    pub cells_total: usize,
    pub cells_hit: usize,
    /// Length of the base prefix.
    pub base_level: usize,
    /// Witness depth `m`.
    pub depth: usize,
    pub witnesses: usize,
    pub witness_side: f64,
    pub warnings: Vec<String>,
}

impl CoverageReport {
    pub fn fraction(&self) -> f64 {
        self.cells_hit as f64 / self.cells_total as f64
    }
}

/// Shifted centers `B(t_r) - G_m(r)` (or `G_m(r) + B(t_r)`) of all cells `r`
/// of length `depth` refining `base`, in time order.
pub fn witness_points(
    curve: &CurveSpec,
    path: &PathSample,
    base: &[u8],
    depth: usize,
    convention: SignConvention,
) -> Result<Vec<Point>> {
    if path.d() != curve.d() {
        return Err(crate::error::param("path and curve dimensions differ"));
    }
    cells(curve, base, depth)?.into_iter().map(|(t, g)| Ok(convention.combine(&path.evaluate_at(t)?, &g))).collect()
}

/// The cube of the cell `base`, shifted like the witnesses.
pub fn shifted_cell(curve: &CurveSpec, path: &PathSample, base: &[u8], convention: SignConvention) -> Result<Cube> {
    let c = Cursor::from_digits(curve, base)?;
    let b = path.evaluate_at(curve.time_of(base))?;
    Ok(Cube { center: convention.combine(&b, &c.center()), side: c.side(), level: base.len() })
}

/// Splits `target` into cells of side at most `delta` and counts the cells
/// whose center lies in at least one closed witness cube of level `depth`
/// below `base`.
pub fn coverage_check(
    curve: &CurveSpec,
    path: &PathSample,
    target: &Cube,
    base: &[u8],
    depth: usize,
    delta: f64,
    convention: SignConvention,
) -> Result<CoverageReport> {
    let d = curve.d();
    if target.d() != d {
        return Err(crate::error::param("target and curve dimensions differ"));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(crate::error::param(format!("grid resolution {delta} must be positive")));
    }
    let k = (target.side / delta).ceil().max(1.0) as usize;
    let total = k
        .checked_pow(d as u32)
        .filter(|&n| n <= MAX_GRID_CELLS)
        .ok_or_else(|| Error::Resource(format!("a grid of {k}^{d} cells exceeds {MAX_GRID_CELLS}")))?;
    let delta = target.side / k as f64;
    let witnesses = witness_points(curve, path, base, depth, convention)?;
    let half = curve.side(depth) / 2.0;
    let mut warnings = Vec::new();
    if delta < 2.0 * half {
        warnings.push(format!(
            "grid resolution {delta:.3e} is finer than the witness cubes ({:.3e}); hits test union membership",
            2.0 * half
        ));
    }
    let lo: Vec<f64> = (0..d).map(|i| target.lower(i)).collect();
    let center_of = |i: usize, j: usize| lo[i] + (j as f64 + 0.5) * delta;
    let mut hit = vec![false; total];
    let mut range = [(0usize, 0usize); crate::MAX_DIM];
    'witness: for w in &witnesses {
        for i in 0..d {
            let a = ((w[i] - half - lo[i]) / delta - 0.5).ceil() - 1.0;
            let b = ((w[i] + half - lo[i]) / delta - 0.5).floor() + 1.0;
            if b < 0.0 || a > (k - 1) as f64 {
                continue 'witness;
            }
            range[i] = (a.max(0.0) as usize, (b.min((k - 1) as f64)) as usize);
        }
        let mut idx = [0usize; crate::MAX_DIM];
        for i in 0..d {
            idx[i] = range[i].0;
        }
        loop {
            let inside = (0..d).all(|i| (center_of(i, idx[i]) - w[i]).abs() <= half);
            if inside {
                let flat = (0..d).fold(0usize, |acc, i| acc * k + idx[i]);
                hit[flat] = true;
            }
            let mut i = 0;
            loop {
                if i == d {
                    continue 'witness;
                }
                if idx[i] < range[i].1 {
                    idx[i] += 1;
                    break;
                }
                idx[i] = range[i].0;
                i += 1;
            }
        }
    }
    let (alpha, rho) = match *curve.schedule() {
        crate::curves::ScaleSchedule::Constant { alpha, rho } => (Some(alpha), curve.is_cantor().then_some(rho)),
        _ => (None, None),
    };
    Ok(CoverageReport {
        family: curve.family().name().to_string(),
        d,
        alpha,
        rho,
        seed: path.seed(),
        noise_scale: path.noise_scale(),
        convention,
        target_center: target.center.to_vec(),
        target_side: target.side,
        delta,
        cells_per_axis: k,
        cells_total: total,
        cells_hit: hit.iter().filter(|&&h| h).count(),
        base_level: base.len(),
        depth,
        witnesses: witnesses.len(),
        witness_side: 2.0 * half,
        warnings,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub seed: u64,
    pub base_level: usize,
    pub depth: usize,
    pub points: usize,
    pub min_distance: f64,
    /// `min_distance / side_m`.
    pub ratio: f64,
}

/// Minimum pairwise distance of the shifted centers below `base` at `depth`.
pub fn separation_check(
    curve: &CurveSpec,
    path: &PathSample,
    base: &[u8],
    depth: usize,
    convention: SignConvention,
) -> Result<SeparationReport> {
    let points = witness_points(curve, path, base, depth, convention)?;
    if points.len() < 2 {
        return Err(Error::Degenerate("separation needs at least two cells".into()));
    }
    let min_distance = closest_pair(points.clone());
    Ok(SeparationReport {
        seed: path.seed(),
        base_level: base.len(),
        depth,
        points: points.len(),
        min_distance,
        ratio: min_distance / curve.side(depth),
    })
}

/// Closest-pair distance by a sweep along the first coordinate.
pub(crate) fn closest_pair(mut points: Vec<Point>) -> f64 {
    points.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[j][0] - points[i][0] >= best {
                break;
            }
            best = best.min(points[i].dist(&points[j]));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brownian::{sample_path, sample_path_scaled};
    use crate::curves::scale_of;

    #[test]
    fn closest_pair_matches_brute_force() {
        let mut r = crate::rng::stream(5, 0);
        let pts: Vec<Point> =
            (0..300).map(|_| Point::from_slice(&[crate::rng::uniform(&mut r), crate::rng::uniform(&mut r)])).collect();
        let mut brute = f64::INFINITY;
        for i in 0..pts.len() {
            for j in 0..i {
                brute = brute.min(pts[i].dist(&pts[j]));
            }
        }
        assert_eq!(closest_pair(pts), brute);
    }

    #[test]
    fn zero_path_covers_the_union_exactly() {
        // with h = 0 the level-m cubes fill [-u, 1+u]^2, u = beta (1 - alpha^m) / (1 - alpha)
        let (alpha, m) = (0.9f64, 6usize);
        let spec = CurveSpec::generalized(2, alpha, 0.2).unwrap();
        let zero = sample_path_scaled(2, 4, 0, 0.0).unwrap();
        let beta = (2.0 * alpha - 1.0) / 4.0;
        let u = beta * (1.0 - alpha.powi(m as i32)) / (1.0 - alpha);
        let target = Cube { center: Point::splat(2, 0.5), side: 1.0 + 2.0 * u, level: 0 };
        let r =
            coverage_check(&spec, &zero, &target, &[], m, alpha.powi(m as i32) / 2.0, SignConvention::CurvePlusPath)
                .unwrap();
        assert_eq!(r.cells_hit, r.cells_total);
        // a slightly larger target is not covered
        let wide = Cube { side: target.side + 4.0 * r.delta, ..target };
        let r = coverage_check(&spec, &zero, &wide, &[], m, r.delta, SignConvention::CurvePlusPath).unwrap();
        assert!(r.fraction() < 1.0);
        assert!(target.side < scale_of(&Cube::unit(2), alpha).side);
    }

    #[test]
    fn coverage_grows_with_depth_under_overlap() {
        let spec = CurveSpec::generalized(2, 0.9, 0.2).unwrap();
        let path = sample_path(2, 12, 4).unwrap();
        let base = [1u8, 2, 0, 3, 1, 1];
        let target = shifted_cell(&spec, &path, &base, SignConvention::PathMinusCurve).unwrap();
        let mut last = 0.0;
        for m in 7..=11 {
            let r = coverage_check(&spec, &path, &target, &base, m, target.side / 16.0, SignConvention::PathMinusCurve)
                .unwrap();
            assert!(r.fraction() >= last);
            last = r.fraction();
        }
        assert_eq!(last, 1.0);
    }

    #[test]
    fn no_overlap_leaves_holes() {
        let spec = CurveSpec::generalized(2, 0.4, 0.2).unwrap();
        let path = sample_path(2, 12, 4).unwrap();
        let base = [0u8, 1];
        let target = shifted_cell(&spec, &path, &base, SignConvention::PathMinusCurve).unwrap();
        let mut fractions = Vec::new();
        for m in [4, 6, 8] {
            let r = coverage_check(&spec, &path, &target, &base, m, target.side / 64.0, SignConvention::PathMinusCurve)
                .unwrap();
            fractions.push(r.fraction());
        }
        assert!(fractions[2] < 0.5, "{fractions:?}");
        assert!(fractions[2] < fractions[0]);
    }

    #[test]
    fn zero_path_separation_is_the_sibling_spacing() {
        // siblings at level m sit alpha^{m-1} / 2 apart, which is the minimum for alpha < 1/2
        let alpha = 0.4353;
        let spec = CurveSpec::generalized(3, alpha, 0.12).unwrap();
        let zero = sample_path_scaled(3, 4, 0, 0.0).unwrap();
        let r = separation_check(&spec, &zero, &[], 4, SignConvention::PathMinusCurve).unwrap();
        let gamma0 = 1.0 / (2.0 * alpha);
        assert!((r.ratio - gamma0).abs() < 1e-9, "{} vs {gamma0}", r.ratio);
    }
}
