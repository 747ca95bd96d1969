//! Verification suites: each runs a group of checks and reports the measured
//! values next to what was expected.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{
    boundary_volume, box_dimension, containment_check, coverage_check, endpoint_samples, good_set_measure,
    hitting_scaling, holder_estimate, measure_preservation_test, min_overlap_level, mixed_overlap_check,
    reverse_holder_pairs, reverse_holder_witness, separation_check, shifted_cell, witness_points, CoverageReport,
    MomentParams, SignConvention,
};
use crate::brownian::{modulus_constant, sample_path, sample_path_scaled};
use crate::curves::{cells, constant_tail_limit, for_each_cell, naive_gap, tail_limit, Cube, CurveSpec, ScaleSchedule};
use crate::digits::DigitString;
use crate::traversal::{
    exceptional_set_from, is_three_reverse, is_zero_reverse, orientation, prestring, search_completions, step_standard,
    OrientationMap, PrefixChain,
};
use crate::{Error, Point, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Traversal,
    Curves,
    Lemma,
    Moments,
    Dimension,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Traversal => "traversal",
            Suite::Curves => "curves",
            Suite::Lemma => "lemma",
            Suite::Moments => "moments",
            Suite::Dimension => "dimension",
            Suite::All => "all",
        }
    }

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Traversal, Suite::Curves, Suite::Lemma, Suite::Moments, Suite::Dimension],
            s => vec![s],
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "traversal" => Suite::Traversal,
            "curves" => Suite::Curves,
            "lemma" => Suite::Lemma,
            "moments" => Suite::Moments,
            "dimension" => Suite::Dimension,
            "all" => Suite::All,
            _ => return Err(crate::error::param(format!("unknown suite {s:?}"))),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteOptions {
    /// Reduced sample counts.
    pub quick: bool,
    /// Dimensions of the lemma suite; both 2 and 3 when absent.
    pub d: Option<usize>,
    /// Target dimension of the dimension suite.
    pub lambda: f64,
    /// First seed of every Monte Carlo loop.
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { quick: false, d: None, lambda: 2.5, seed: 0 }
    }
}

impl SuiteOptions {
    fn pick<T>(&self, full: T, quick: T) -> T {
        if self.quick {
            quick
        } else {
            full
        }
    }

    fn seeds(&self, n: u64) -> Vec<u64> {
        (self.seed..self.seed + n).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Checks that fail for a documented reason; reported, but not counted
    /// towards the suite result.
    pub known_failure: bool,
    pub expected: String,
    pub measured: Value,
}

impl Check {
    fn new(name: &str, passed: bool, expected: impl Into<String>, measured: Value) -> Self {
        Check { name: name.to_string(), passed, known_failure: false, expected: expected.into(), measured }
    }

    fn known(mut self) -> Self {
        self.known_failure = true;
        self
    }

    /// Whether the check counts against its suite.
    pub fn counts_as_failure(&self) -> bool {
        !self.passed && !self.known_failure
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub quick: bool,
    pub passed: bool,
    pub checks: Vec<Check>,
}

/// Runs one suite, or all of them.
pub fn run(suite: Suite, opts: &SuiteOptions) -> Result<Vec<SuiteReport>> {
    suite
        .members()
        .into_iter()
        .map(|s| {
            let checks = match s {
                Suite::Traversal => traversal_suite(opts)?,
                Suite::Curves => curves_suite(opts)?,
                Suite::Lemma => lemma_suite(opts)?,
                Suite::Moments => moments_suite(opts)?,
                Suite::Dimension => dimension_suite(opts)?,
                Suite::All => unreachable!("expanded above"),
            };
            Ok(SuiteReport {
                suite: s.name().to_string(),
                quick: opts.quick,
                passed: checks.iter().all(|c| !c.counts_as_failure()),
                checks,
            })
        })
        .collect()
}

/// All digit strings of length `1..=depth` in base `base`.
fn all_strings(base: u8, depth: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut level = vec![Vec::new()];
    for _ in 0..depth {
        let next: Vec<Vec<u8>> = level
            .iter()
            .flat_map(|s: &Vec<u8>| {
                (0..base).map(move |a| {
                    let mut c = s.clone();
                    c.push(a);
                    c
                })
            })
            .collect();
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

fn parent_pins(parent: &OrientationMap) -> Vec<(u8, u8)> {
    (0..4).map(|b| (b, parent.corner(b))).collect()
}

/// Mismatches between the standard step and the exhaustive search, over all
/// strings of length `1..=depth`.
pub fn standard_completion_mismatches(depth: usize) -> Result<usize> {
    let mut bad = 0;
    for s in all_strings(4, depth) {
        let (&a, head) = s.split_last().expect("non-empty");
        let parent = orientation(&DigitString::from_slice(2, head)?)?;
        let pins = match a {
            0 => vec![(0, parent.corner(0)), (1, parent.corner(3))],
            3 => vec![(0, parent.corner(2)), (1, parent.corner(1))],
            _ => parent_pins(&parent),
        };
        if search_completions(&pins) != vec![step_standard(&parent, a)?] {
            bad += 1;
        }
    }
    Ok(bad)
}

/// Mismatches between the alternate step and the exhaustive search.
pub fn alternate_completion_mismatches(alpha: f64, depth: usize) -> Result<usize> {
    let spec = CurveSpec::alternate(alpha)?;
    let set = spec.exceptional().expect("alternate curves carry their set");
    let mut bad = 0;
    for s in all_strings(4, depth) {
        let ds = DigitString::from_slice(2, &s)?;
        let chain = PrefixChain::alternate(&ds, set)?;
        let n = s.len();
        let parent = *chain.at(n - 1);
        let pins = match s[n - 1] {
            0 => {
                let pre = chain.at(prestring(&ds)?.len());
                let first = if is_zero_reverse(&ds, set) { pre.corner(2) } else { pre.corner(0) };
                vec![(1, parent.corner(3)), (0, first)]
            }
            3 => {
                let pre = chain.at(prestring(&ds)?.len());
                let second = if is_three_reverse(&ds, set) { pre.corner(3) } else { pre.corner(1) };
                vec![(0, parent.corner(2)), (1, second)]
            }
            _ => parent_pins(&parent),
        };
        if search_completions(&pins) != vec![*chain.at(n)] {
            bad += 1;
        }
    }
    Ok(bad)
}

fn traversal_suite(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let depth = opts.pick(6, 4);
    let mut checks = Vec::new();
    let bad = standard_completion_mismatches(depth)?;
    checks.push(Check::new(
        "standard_completions_match_search",
        bad == 0,
        "0 mismatches",
        json!({ "depth": depth, "mismatches": bad }),
    ));
    for alpha in [0.6, 0.75, 0.9] {
        let bad = alternate_completion_mismatches(alpha, depth)?;
        checks.push(Check::new(
            &format!("alternate_completions_match_search_alpha_{alpha}"),
            bad == 0,
            "0 mismatches",
            json!({ "alpha": alpha, "depth": depth, "mismatches": bad }),
        ));
    }
    for alpha in [0.6, 0.75, 0.9] {
        let set = exceptional_set_from(alpha, 400, 2)?;
        let err = (set.partial_sum() - set.target()).abs();
        checks.push(Check::new(
            &format!("exceptional_partial_sums_alpha_{alpha}"),
            err <= 1e-9,
            "|sum_{i in S, i <= 400} alpha^i - 2 beta / (1 - alpha)| <= 1e-9",
            json!({ "alpha": alpha, "error": err, "members": set.members().len() }),
        ));
    }
    // consecutive cells of the d-dimensional curve share a face
    for d in [3usize, 4] {
        let spec = CurveSpec::standard(d)?;
        let n = opts.pick(3, 2);
        let centers = cells(&spec, &[], n)?;
        let side = spec.side(n);
        let jumps = centers.windows(2).filter(|w| (w[0].1.dist(&w[1].1) - side).abs() > 1e-12).count();
        checks.push(Check::new(
            &format!("gray_traversal_adjacent_cells_d{d}"),
            jumps == 0,
            "consecutive cells share a face",
            json!({ "d": d, "depth": n, "cells": centers.len(), "jumps": jumps }),
        ));
    }
    Ok(checks)
}

/// Whether the level-`n` centers of the standard planar curve are exactly the
/// `4^n` dyadic cell centers.
pub fn standard_hits_all_centers(n: usize) -> Result<bool> {
    let spec = CurveSpec::standard(2)?;
    let scale = (1u64 << n) as f64;
    let mut seen = vec![false; 1 << (2 * n)];
    let mut ok = true;
    for_each_cell(&spec, &[], n, |c| {
        let p = c.center();
        let i = p[0] * scale - 0.5;
        let j = p[1] * scale - 0.5;
        if i.fract() != 0.0 || j.fract() != 0.0 || i < 0.0 || j < 0.0 || i >= scale || j >= scale {
            ok = false;
            return;
        }
        let k = (i as usize) << n | j as usize;
        ok &= !std::mem::replace(&mut seen[k], true);
    })?;
    Ok(ok && seen.iter().all(|&s| s))
}

/// Hölder fits used by the curves suite and the acceptance run: the curve,
/// sample depth, gap range and bin ratio.
pub fn holder_fit_standard() -> Result<crate::analysis::HolderFit> {
    let s = endpoint_samples(&CurveSpec::standard(2)?, 7)?;
    holder_estimate(&s, (2f64.powi(-9), 0.25), 2.0)
}

pub fn holder_fit_generalized(alpha: f64, rho: f64) -> Result<crate::analysis::HolderFit> {
    let s = endpoint_samples(&CurveSpec::generalized(2, alpha, rho)?, 6)?;
    holder_estimate(&s, (rho.powi(6), rho), 1.0 / rho)
}

pub fn holder_fit_alternate(alpha: f64) -> Result<crate::analysis::HolderFit> {
    let s = endpoint_samples(&CurveSpec::alternate(alpha)?, 7)?;
    holder_estimate(&s, (4f64.powi(-7), 0.25), 4.0)
}

/// Coverage of `U_m` by the level-`m` cubes of the unperturbed generalized
/// curve, `U_m` being the union of the cubes when they fill their envelope.
pub fn zero_path_coverage(alpha: f64, rho: f64, m: usize) -> Result<CoverageReport> {
    let spec = CurveSpec::generalized(2, alpha, rho)?;
    let zero = sample_path_scaled(2, 4, 0, 0.0)?;
    let beta = (2.0 * alpha - 1.0) / 4.0;
    let u = beta * (1.0 - alpha.powi(m as i32)) / (1.0 - alpha);
    let target = Cube { center: Point::splat(2, 0.5), side: 1.0 + 2.0 * u, level: 0 };
    coverage_check(&spec, &zero, &target, &[], m, alpha.powi(m as i32) / 2.0, SignConvention::CurvePlusPath)
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessScan {
    pub alpha: f64,
    pub intervals: usize,
    pub violations: usize,
    /// Smallest `distance / bound` over the intervals.
    pub min_ratio: f64,
}

/// Reverse-Hölder witnesses of the alternate curve on `count` random
/// subintervals of `[0, 1]`.
pub fn reverse_holder_scan(alpha: f64, count: usize, seed: u64) -> Result<WitnessScan> {
    let spec = CurveSpec::alternate(alpha)?;
    let mut rng = crate::rng::stream(seed, 0x7768_6974);
    let intervals: Vec<(f64, f64)> = (0..count)
        .map(|_| {
            let (a, b) = (crate::rng::uniform(&mut rng), crate::rng::uniform(&mut rng));
            (a.min(b), a.max(b))
        })
        .collect();
    let witnesses = intervals
        .par_iter()
        .map(|&i| reverse_holder_witness(&spec, i, crate::digits::MAX_DEPTH))
        .collect::<Result<Vec<_>>>()?;
    Ok(WitnessScan {
        alpha,
        intervals: count,
        violations: witnesses.iter().filter(|w| !w.holds()).count(),
        min_ratio: witnesses.iter().map(|w| w.distance / w.bound).fold(f64::INFINITY, f64::min),
    })
}

/// Distance between the two one-sided limits of the alternate curve at
/// `t = 1/2`, approached along `1 3 3 ...` and `2 0 0 ...`.
pub fn alternate_half_jump(alpha: f64, tol: f64) -> Result<f64> {
    let spec = CurveSpec::alternate(alpha)?;
    let (a, _) = tail_limit(&spec, &[1], 3, tol)?;
    let (b, _) = tail_limit(&spec, &[2], 0, tol)?;
    Ok(a.dist(&b))
}

/// Parameters of a Brownian coverage run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverParams {
    pub d: usize,
    pub alpha: f64,
    pub rho: f64,
    pub seeds: Vec<u64>,
    /// Grid level of the path.
    pub level: usize,
    /// The cell whose shifted cube is the target.
    pub base: Vec<u8>,
    /// Witness depth.
    pub depth: usize,
    pub cells_per_axis: usize,
    /// Fraction of seeds that must be fully covered.
    pub threshold: f64,
    pub noise: bool,
    pub convention: SignConvention,
    /// Largest lag of the modulus estimate.
    pub s_max: f64,
}

impl Default for CoverParams {
    fn default() -> Self {
        CoverParams {
            d: 2,
            alpha: 0.9,
            rho: 0.2,
            seeds: (0..20).collect(),
            level: 16,
            base: vec![1, 2, 0, 3, 1, 1, 2, 0],
            depth: 16,
            cells_per_axis: 16,
            threshold: 0.95,
            noise: true,
            convention: SignConvention::PathMinusCurve,
            s_max: 1.0 / 64.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverSeed {
    pub coverage: CoverageReport,
    pub modulus: f64,
    /// Level from which the overlap condition holds for this path.
    pub n0: Option<usize>,
    pub overlap_met: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverRun {
    pub params: CoverParams,
    pub per_seed: Vec<CoverSeed>,
    pub fully_covered: usize,
    pub fraction_fully_covered: f64,
    pub mean_hit_fraction: f64,
    pub passed: bool,
    pub failure: Option<String>,
}

/// Covers the shifted cube of `base` by the shifted cubes `depth` levels
/// down, one path per seed.
pub fn cover_run(p: &CoverParams) -> Result<CoverRun> {
    if p.seeds.is_empty() {
        return Err(crate::error::param("need at least one seed"));
    }
    if p.depth <= p.base.len() {
        return Err(crate::error::param("witness depth must exceed the base level"));
    }
    let spec = CurveSpec::generalized(p.d, p.alpha, p.rho)?;
    DigitString::from_slice(p.d, &p.base)?;
    let per_seed: Vec<CoverSeed> = p
        .seeds
        .par_iter()
        .map(|&seed| -> Result<CoverSeed> {
            let path = sample_path_scaled(p.d, p.level, seed, if p.noise { 1.0 } else { 0.0 })?;
            let modulus = modulus_constant(&path, p.s_max)?;
            let n0 = min_overlap_level(p.alpha, p.rho, modulus.max(1e-12), p.d).ok();
            let target = shifted_cell(&spec, &path, &p.base, p.convention)?;
            let delta = target.side / p.cells_per_axis as f64;
            let coverage = coverage_check(&spec, &path, &target, &p.base, p.depth, delta, p.convention)?;
            Ok(CoverSeed { coverage, modulus, n0, overlap_met: n0.is_some_and(|n| n <= p.base.len()) })
        })
        .collect::<Result<_>>()?;
    let fully = per_seed.iter().filter(|s| s.coverage.cells_hit == s.coverage.cells_total).count();
    let fraction = fully as f64 / per_seed.len() as f64;
    let mean = crate::analysis::pairwise_sum(&per_seed.iter().map(|s| s.coverage.fraction()).collect::<Vec<_>>())
        / per_seed.len() as f64;
    let unmet = per_seed.iter().filter(|s| !s.overlap_met).count();
    let failure = if p.alpha <= 0.5 {
        Some(format!("alpha = {} <= 1/2: the cubes do not overlap", p.alpha))
    } else if unmet > 0 {
        Some(format!("overlap condition unmet at base level {} on {unmet} of {} paths", p.base.len(), per_seed.len()))
    } else if fraction < p.threshold {
        Some(format!("{fully} of {} paths fully covered, need a fraction {}", per_seed.len(), p.threshold))
    } else {
        None
    };
    Ok(CoverRun {
        params: p.clone(),
        per_seed,
        fully_covered: fully,
        fraction_fully_covered: fraction,
        mean_hit_fraction: mean,
        passed: failure.is_none(),
        failure,
    })
}

fn curves_suite(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let n_max = opts.pick(6, 4);
    let hits: Vec<bool> = (0..=n_max).map(standard_hits_all_centers).collect::<Result<_>>()?;
    checks.push(Check::new(
        "standard_hits_all_centers",
        hits.iter().all(|&h| h),
        "every dyadic center hit exactly once",
        json!({ "levels": n_max, "per_level": hits }),
    ));

    let fit = holder_fit_standard()?;
    checks.push(Check::new(
        "standard_holder_exponent",
        (fit.exponent - 0.5).abs() <= 0.05 && fit.pairs >= 10_000,
        "0.5 +- 0.05 over >= 1e4 pairs",
        json!({ "exponent": fit.exponent, "pairs": fit.pairs }),
    ));
    let (alpha, rho) = (0.9, 0.2);
    let fit = holder_fit_generalized(alpha, rho)?;
    let target = alpha.ln() / rho.ln();
    checks.push(Check::new(
        "generalized_holder_exponent",
        (fit.exponent - target).abs() <= 0.02,
        format!("{target:.4} +- 0.02"),
        json!({ "alpha": alpha, "rho": rho, "exponent": fit.exponent, "pairs": fit.pairs }),
    ));
    let fit = holder_fit_alternate(alpha)?;
    let target = (1.0 / alpha).ln() / 4f64.ln();
    checks.push(Check::new(
        "alternate_holder_exponent",
        (fit.exponent - target).abs() <= 0.02,
        format!("{target:.4} +- 0.02"),
        json!({ "alpha": alpha, "exponent": fit.exponent, "pairs": fit.pairs }),
    ));

    let r = zero_path_coverage(alpha, rho, 6)?;
    checks.push(Check::new(
        "zero_path_coverage",
        r.cells_hit == r.cells_total,
        "hit fraction 1",
        json!({ "cells_total": r.cells_total, "cells_hit": r.cells_hit }),
    ));

    let gaps: Vec<f64> = (25..=30).map(|n| naive_gap(0.9, n)).collect::<Result<_>>()?;
    let stable = gaps.iter().all(|g| (g - gaps[5]).abs() <= 1e-6 * gaps[5]);
    checks.push(Check::new(
        "naive_gap",
        gaps[5] > 0.0 && stable && naive_gap(0.5, 30)? == 0.0,
        "gap(0.9) > 0, stable to 6 digits over depths 25..30; gap(0.5) = 0",
        json!({ "gap_0_9": gaps, "gap_0_5": naive_gap(0.5, 30)? }),
    ));
    let jump = alternate_half_jump(0.9, 1e-9)?;
    checks.push(Check::new(
        "alternate_continuous_at_half",
        jump <= 1e-6,
        "one-sided limits within 1e-6",
        json!({ "alpha": 0.9, "jump": jump }),
    ));
    let scan = reverse_holder_scan(0.9, 1000, opts.seed)?;
    checks.push(Check::new(
        "reverse_holder_witness",
        scan.violations == 0,
        "distance >= alpha^1.5 / (2 (1 - alpha)) |I|^gamma on every interval",
        serde_json::to_value(&scan)?,
    ));
    // the closed form of the zero tail agrees with the summed tail
    let spec = CurveSpec::generalized(2, alpha, rho)?;
    let closed = constant_tail_limit(&spec, &[1, 2], 0)?;
    let (summed, _) = tail_limit(&spec, &[1, 2], 0, 1e-13)?;
    checks.push(Check::new(
        "closed_form_tail",
        closed.dist(&summed) <= 1e-12,
        "closed form within 1e-12 of the summed tail",
        json!({ "distance": closed.dist(&summed) }),
    ));

    let samples = opts.pick(100_000, 20_000);
    for (d, level) in [(2usize, 2usize), (3, 2)] {
        let r = measure_preservation_test(&CurveSpec::standard(d)?, level, samples, opts.seed)?;
        checks.push(Check::new(
            &format!("measure_preservation_d{d}"),
            r.p_value > 0.01,
            "chi-square p > 0.01",
            json!({ "d": d, "cells": r.counts.len(), "samples": samples, "p_value": r.p_value }),
        ));
    }

    let n0 = min_overlap_level(0.9, 0.2, 3.0, 2)?;
    checks.push(Check::new("min_overlap_level", n0 == 6, "n0(0.9, 0.2, C = 3) = 6", json!({ "n0": n0 })));
    let constant = mixed_overlap_check(&ScaleSchedule::constant(0.9, 0.2), 3.0, 200)?;
    checks.push(Check::new(
        "mixed_reduces_to_constant",
        constant.threshold == Some(n0),
        "same threshold as the constant schedule",
        json!({ "threshold": constant.threshold }),
    ));
    let harmonic = mixed_overlap_check(&ScaleSchedule::harmonic(0.0, 2), 3.0, 10_000)?;
    let limit = (1.5 * 0.577_215_664_901_532_9f64).exp() / (4.0 * 4f64.ln().sqrt());
    checks.push(Check::new(
        "harmonic_ratio_limit",
        (harmonic.final_ratio - limit).abs() <= 1e-3,
        format!("ratio tends to exp(3 gamma / 2) / (4 sqrt(log 4)) = {limit:.6}"),
        json!({ "final_ratio": harmonic.final_ratio }),
    ));
    checks.push(
        Check::new(
            "harmonic_schedule_with_c3",
            harmonic.threshold.is_some(),
            "inequality holds from some index with C = 3",
            json!({ "threshold": harmonic.threshold, "last_failure": harmonic.last_failure }),
        )
        .known(),
    );

    let seeds = opts.seeds(opts.pick(100, 10));
    let spec = CurveSpec::generalized(2, 0.9, 0.2)?;
    let reports = seeds
        .par_iter()
        .map(|&seed| {
            let path = sample_path(2, 16, seed)?;
            containment_check(&spec, &path, &[1, 2, 0, 3], 4, 1.0 / 64.0, SignConvention::PathMinusCurve)
        })
        .collect::<Result<Vec<_>>>()?;
    let violations: usize = reports.iter().map(|r| r.violations + r.shift_violations).sum();
    checks.push(Check::new(
        "overlap_containment",
        violations == 0,
        "0 violations for n0(C) <= n <= n0(C) + 4",
        json!({
            "seeds": seeds.len(),
            "violations": violations,
            "parents": reports.iter().map(|r| r.parents).sum::<usize>(),
            "max_shift_ratio": reports.iter().map(|r| r.max_shift_ratio).fold(0.0, f64::max),
        }),
    ));

    let run = cover_run(&CoverParams { seeds: opts.seeds(opts.pick(100, 10)), ..CoverParams::default() })?;
    checks.push(Check::new(
        "brownian_coverage",
        run.fraction_fully_covered >= 0.95,
        "fully covered on >= 95% of seeds",
        json!({
            "seeds": run.per_seed.len(),
            "fully_covered": run.fully_covered,
            "mean_hit_fraction": run.mean_hit_fraction,
        }),
    ));
    Ok(checks)
}

fn lemma_suite(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let dims = match opts.d {
        Some(d) => vec![d],
        None => vec![2, 3],
    };
    let samples = opts.pick(1_000_000, 100_000);
    let mut worst = Vec::new();
    let mut ok = true;
    for &d in &dims {
        for n in 0..=4 {
            for m in 0..=4 {
                let v = boundary_volume(d, n, m, samples, opts.seed)?;
                ok &= v.within_bound();
                worst.push(json!({ "d": d, "n": n, "m": m, "estimate": v.estimate, "se": v.se, "bound": v.bound }));
            }
        }
    }
    checks.push(Check::new(
        "boundary_volume",
        ok,
        "estimate <= 2 d 2^-m + 3 SE",
        json!({ "samples": samples, "grid": worst }),
    ));

    let (c, a, n_max) = (0.05, 0.4, 6);
    let g = good_set_measure(3, c, a, n_max, opts.pick(100_000, 20_000), opts.seed)?;
    let m = json!({
        "estimate": g.estimate, "se": g.se, "series_bound": g.series_bound,
        "collar_bound": g.collar_bound, "exact": g.exact,
    });
    checks.push(
        Check::new(
            "good_set_series",
            (g.estimate - g.series_bound).abs() <= 3.0 * g.se,
            "estimate within 3 SE of 1 - c sum 2^{-n(d a - 1)}",
            m.clone(),
        )
        .known(),
    );
    checks.push(Check::new(
        "good_set_exact",
        (g.estimate - g.exact).abs() <= 3.0 * g.se,
        "estimate within 3 SE of the exact product volume",
        m.clone(),
    ));
    checks.push(Check::new(
        "good_set_collar_bound",
        g.estimate >= g.collar_bound - 3.0 * g.se,
        "estimate >= 1 - 2 d c sum 2^{-n(d a - 1)}",
        m,
    ));
    let g0 = good_set_measure(3, 0.0, a, n_max, 2000, opts.seed)?;
    checks.push(Check::new(
        "good_set_c0",
        g0.estimate == 1.0,
        "measure 1 for c = 0",
        json!({ "estimate": g0.estimate }),
    ));
    let p = reverse_holder_pairs(3, c, a, n_max, 1000, opts.seed)?;
    checks.push(Check::new(
        "reverse_holder_pairs",
        p.violations == 0 && p.holder_violations == 0,
        "0 violations on 1e3 pairs",
        json!({ "pairs": p.pairs, "violations": p.violations, "holder_violations": p.holder_violations, "min_ratio": p.min_ratio }),
    ));
    Ok(checks)
}

fn moments_suite(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let params = MomentParams::default_3d();
    let seeds = opts.seeds(opts.pick(500, 100));
    let r = hitting_scaling(&params, &seeds)?;
    let slope = r.slope.as_ref().map(|s| s.slope);
    let mut checks = vec![
        Check::new(
            "first_moment_slope",
            slope.is_some_and(|s| (s - 3.0).abs() <= 0.5),
            "3 +- 0.5",
            json!({ "slope": slope, "eps": r.eps, "mean_t": r.mean_t, "censored": r.censored }),
        ),
        Check::new(
            "cauchy_schwarz",
            r.cauchy_schwarz,
            "E[T^2] >= E[T]^2",
            json!({ "second_moment_t": r.second_moment_t }),
        ),
        Check::new("monotone_in_eps", r.monotone, "T_eps nondecreasing per path", json!(null)),
        Check::new(
            "partition_exact",
            r.split.iter().all(|s| s.partition_exact),
            "A1 + A2 + A3 equals the off-diagonal count",
            json!(r.split),
        ),
    ];
    checks.push(
        Check::new(
            "paley_zygmund_floor",
            !r.pz_decays(),
            "no monotone decay of E[T]^2 / E[T^2] as eps shrinks",
            json!({ "pz_ratio": r.pz_ratio, "floor": r.pz_floor() }),
        )
        .known(),
    );
    Ok(checks)
}

/// Points `B(t_r) - G_m(r)` of the `d = 3` curve with `alpha = 2^{-3/lambda}`.
pub fn perturbed_cantor_image(lambda: f64, rho: f64, m: usize, seed: u64, noise: bool) -> Result<Vec<Point>> {
    let alpha = 2f64.powf(-3.0 / lambda);
    let spec = CurveSpec::generalized(3, alpha, rho)?;
    let path = sample_path_scaled(3, 16, seed, if noise { 1.0 } else { 0.0 })?;
    witness_points(&spec, &path, &[], m, SignConvention::PathMinusCurve)
}

/// The range of a `d = 3` Brownian path on its grid.
pub fn brownian_range(level: usize, seed: u64) -> Result<Vec<Point>> {
    let path = sample_path(3, level, seed)?;
    Ok((0..=path.intervals()).map(|k| path.value(k)).collect())
}

fn dimension_suite(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let lambda = opts.lambda;
    if !(lambda > 2.0 && lambda < 3.0) {
        return Err(crate::error::param(format!("lambda = {lambda} must lie in (2, 3)")));
    }
    let alpha = 2f64.powf(-3.0 / lambda);
    let rho = 0.12;
    if rho >= alpha * alpha {
        return Err(crate::error::param(format!("rho = {rho} must stay below alpha^2 = {}", alpha * alpha)));
    }
    let mut checks = Vec::new();
    let m = opts.pick(8, 7);
    let points = perturbed_cantor_image(lambda, rho, m, opts.seed + 1, true)?;
    let fit = box_dimension(&points, alpha.powi(m as i32), 0.5, 2.0)?;
    drop(points);
    checks.push(Check::new(
        "perturbed_image_dimension",
        (fit.slope - lambda).abs() <= 0.3,
        format!("{lambda} +- 0.3"),
        json!({ "alpha": alpha, "rho": rho, "m": m, "slope": fit.slope, "counts": fit.counts }),
    ));
    let lattice = perturbed_cantor_image(lambda, rho, 6, 0, false)?;
    let fit = box_dimension(&lattice, alpha.powi(6), 0.5, 1.0)?;
    checks.push(Check::new(
        "unperturbed_dimension",
        (fit.slope - lambda).abs() <= 0.3,
        format!("{lambda} +- 0.3"),
        json!({ "slope": fit.slope, "counts": fit.counts }),
    ));
    let range = brownian_range(opts.pick(18, 17), opts.seed + 1)?;
    let fit = box_dimension(&range, 2f64.powi(-9), 0.25, 2.0)?;
    checks.push(Check::new(
        "brownian_range_dimension",
        (fit.slope - 2.0).abs() <= 0.3,
        "2 +- 0.3",
        json!({ "slope": fit.slope, "counts": fit.counts }),
    ));
    let sep = separation_run(alpha, rho, opts.seeds(opts.pick(100, 20)), (1000..1050).collect())?;
    checks.push(Check::new(
        "separation",
        sep.gamma > 0.0 && sep.held as f64 >= 0.95 * sep.ratios.len() as f64,
        "gamma > 0 and min distance >= gamma alpha^m / 2 on >= 95% of seeds",
        serde_json::to_value(&sep)?,
    ));
    Ok(checks)
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationRun {
    pub base: Vec<u8>,
    pub depth: usize,
    /// Fitted on the calibration seeds: the smallest `2 min_distance / alpha^m`.
    pub gamma: f64,
    pub calibration_seeds: Vec<u64>,
    pub ratios: Vec<f64>,
    pub held: usize,
}

/// Separation of the shifted level-8 centers below a level-5 cell, with `gamma`
/// fitted on held-out seeds and then tested on `seeds`.
pub fn separation_run(alpha: f64, rho: f64, seeds: Vec<u64>, calibration: Vec<u64>) -> Result<SeparationRun> {
    let spec = CurveSpec::generalized(3, alpha, rho)?;
    let base = vec![1u8, 6, 3, 0, 5];
    let depth = 8;
    let ratio = |seed: u64| -> Result<f64> {
        let path = sample_path(3, 16, seed)?;
        Ok(2.0 * separation_check(&spec, &path, &base, depth, SignConvention::PathMinusCurve)?.ratio)
    };
    let fitted: Vec<f64> = calibration.par_iter().map(|&s| ratio(s)).collect::<Result<_>>()?;
    let gamma = fitted.iter().copied().fold(f64::INFINITY, f64::min);
    let ratios: Vec<f64> = seeds.par_iter().map(|&s| ratio(s)).collect::<Result<_>>()?;
    let held = ratios.iter().filter(|&&r| r >= gamma).count();
    Ok(SeparationRun { base, depth, gamma, calibration_seeds: calibration, ratios, held })
}
