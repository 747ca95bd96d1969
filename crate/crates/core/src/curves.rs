//! Evaluation of the curve families.
//!
//! Every family shares one recursion: the cell addressed by `a_1 ... a_n`
//! has center `c_n = c_{n-1} + (side_{n-1} / 4) f_{a_1..a_{n-1}}(a_n)` with
//! `c_0 = (1/2, ..., 1/2)` and `side_n = alpha_1 ... alpha_n`. The families
//! differ in the side factors, in the orientation maps `f`, and in how a time
//! `t` is turned into digits:
//!
//! | family        | side factor | orientations            | time digits        |
//! |---------------|-------------|-------------------------|--------------------|
//! | `Standard`    | 1/2         | standard (Gray in d>2)  | base `2^d`         |
//! | `Generalized` | alpha_n     | standard (Gray in d>2)  | Cantor set `C_rho` |
//! | `Alternate`   | alpha       | alternate               | base 4             |
//! | `Naive`       | alpha       | standard                | base 4             |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::digits::{self, locate_with, stage_length_with, CantorSpec, DigitString, IntervalAddress};
use crate::error::param;
use crate::point::Point;
use crate::traversal::{
    exceptional_set_from, f_empty, step_alternate_slices, step_standard, ExceptionalSet, GrayState, OrientationMap,
};
use crate::{check_dim, Error, Result};

/// Cutoff used when building the exceptional set of the alternate family.
pub const EXCEPTIONAL_CUTOFF: u32 = 2000;

/// Most cells a single enumeration will visit.
pub const MAX_CELLS: usize = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Standard,
    Generalized,
    Alternate,
    Naive,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Standard => "standard",
            Family::Generalized => "generalized",
            Family::Alternate => "alternate",
            Family::Naive => "naive",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Family::Standard),
            "generalized" => Ok(Family::Generalized),
            "alternate" => Ok(Family::Alternate),
            "naive" => Ok(Family::Naive),
            other => Err(param(format!("unknown curve family {other:?}"))),
        }
    }
}

/// Per-level expansion factors `alpha_n` and Cantor ratios `rho_n`, `n >= 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScaleSchedule {
    Constant {
        alpha: f64,
        rho: f64,
    },
    /// `alpha_n = e^{1/(n + offset)} / 2`, `rho_n = e^{-1/(n + offset)} / 2^d`.
    Harmonic {
        offset: f64,
        d: usize,
    },
    /// The last entry of each list repeats forever.
    Explicit {
        alphas: Vec<f64>,
        rhos: Vec<f64>,
    },
}

impl ScaleSchedule {
    pub fn constant(alpha: f64, rho: f64) -> Self {
        ScaleSchedule::Constant { alpha, rho }
    }

    pub fn harmonic(offset: f64, d: usize) -> Self {
        ScaleSchedule::Harmonic { offset, d }
    }

    pub fn alpha(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        match self {
            ScaleSchedule::Constant { alpha, .. } => *alpha,
            ScaleSchedule::Harmonic { offset, .. } => (1.0 / (n as f64 + offset)).exp() / 2.0,
            ScaleSchedule::Explicit { alphas, .. } => alphas[(n - 1).min(alphas.len() - 1)],
        }
    }

    pub fn rho(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        match self {
            ScaleSchedule::Constant { rho, .. } => *rho,
            ScaleSchedule::Harmonic { offset, d } => (-1.0 / (n as f64 + offset)).exp() / (1u64 << d) as f64,
            ScaleSchedule::Explicit { rhos, .. } => rhos[(n - 1).min(rhos.len() - 1)],
        }
    }

    /// `beta_n = (2 alpha_n - 1) / 4`.
    pub fn beta(&self, n: usize) -> f64 {
        (2.0 * self.alpha(n) - 1.0) / 4.0
    }

    /// Cube side at level `n`: `alpha_1 ... alpha_n`.
    pub fn side(&self, n: usize) -> f64 {
        match self {
            ScaleSchedule::Constant { alpha, .. } => alpha.powi(n as i32),
            _ => (1..=n).map(|i| self.alpha(i)).product(),
        }
    }

    /// Cantor interval length at stage `n`: `rho_1 ... rho_n`.
    pub fn length(&self, n: usize) -> f64 {
        match self {
            ScaleSchedule::Constant { rho, .. } => rho.powi(n as i32),
            _ => stage_length_with(n, |i| self.rho(i)),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, ScaleSchedule::Constant { .. })
    }

    /// Checks `alpha_n in (0, 1)` and `rho_n in (0, 2^{-d})` for every level
    /// up to `levels` (and every explicit entry).
    pub fn validate(&self, d: usize, levels: usize) -> Result<()> {
        let rho_max = 1.0 / (1u64 << d) as f64;
        let count = match self {
            ScaleSchedule::Explicit { alphas, rhos } => {
                if alphas.is_empty() || rhos.is_empty() {
                    return Err(param("explicit schedules need at least one alpha and one rho"));
                }
                levels.max(alphas.len()).max(rhos.len())
            }
            ScaleSchedule::Harmonic { d: sd, .. } if *sd != d => {
                return Err(param(format!("harmonic schedule built for d = {sd}, used with d = {d}")));
            }
            _ => levels,
        };
        for n in 1..=count.max(1) {
            let (a, r) = (self.alpha(n), self.rho(n));
            if !(a > 0.0 && a < 1.0) {
                return Err(param(format!("alpha_{n} = {a} must lie in (0, 1)")));
            }
            if !(r > 0.0 && r < rho_max) {
                return Err(param(format!("rho_{n} = {r} must lie in (0, {rho_max})")));
            }
        }
        Ok(())
    }
}

/// An axis-parallel cube of the lattice `F_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cube {
    pub center: Point,
    pub side: f64,
    pub level: usize,
}

impl Cube {
    pub fn unit(d: usize) -> Cube {
        Cube { center: Point::splat(d, 0.5), side: 1.0, level: 0 }
    }

    pub fn d(&self) -> usize {
        self.center.dim()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.center.sup_dist(p) <= self.side / 2.0
    }

    pub fn contains_cube(&self, other: &Cube) -> bool {
        self.center.sup_dist(&other.center) + other.side / 2.0 <= self.side / 2.0
    }

    pub fn lower(&self, i: usize) -> f64 {
        self.center[i] - self.side / 2.0
    }

    pub fn upper(&self, i: usize) -> f64 {
        self.center[i] + self.side / 2.0
    }
}

/// The `2^d` children of `q`, ordered by corner bitmask.
pub fn children(q: &Cube, alpha: f64) -> Result<Vec<Cube>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(param(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let d = q.d();
    Ok((0..1u8 << d)
        .map(|corner| {
            let mut center = q.center;
            for i in 0..d {
                center[i] += q.side / 4.0 * crate::traversal::corner_sign(corner, i);
            }
            Cube { center, side: alpha * q.side, level: q.level + 1 }
        })
        .collect())
}

/// The cube swept by all descendants of `q`: side `q.side / (2 (1 - alpha))`
/// when `alpha > 1/2`, and `q` itself otherwise.
pub fn scale_of(q: &Cube, alpha: f64) -> Cube {
    if alpha <= 0.5 {
        return *q;
    }
    Cube { side: q.side / (2.0 * (1.0 - alpha)), ..*q }
}

/// A curve family together with its dimension and scales.
#[derive(Clone, Debug)]
pub struct CurveSpec {
    family: Family,
    d: usize,
    schedule: ScaleSchedule,
    exceptional: Option<ExceptionalSet>,
}

impl CurveSpec {
    /// The Hilbert curve `H` on `[0,1]^d`.
    pub fn standard(d: usize) -> Result<Self> {
        check_dim(d)?;
        let rho = 1.0 / (1u64 << d) as f64;
        Ok(CurveSpec { family: Family::Standard, d, schedule: ScaleSchedule::constant(0.5, rho), exceptional: None })
    }

    /// The overlapping-cube curve `G` parametrized by `C_{rho,d}`.
    pub fn generalized(d: usize, alpha: f64, rho: f64) -> Result<Self> {
        Self::generalized_mixed(d, ScaleSchedule::constant(alpha, rho))
    }

    pub fn generalized_mixed(d: usize, schedule: ScaleSchedule) -> Result<Self> {
        check_dim(d)?;
        schedule.validate(d, digits::MAX_DEPTH)?;
        Ok(CurveSpec { family: Family::Generalized, d, schedule, exceptional: None })
    }

    /// The planar alternate curve, for `1/2 < alpha < 1`. Its exceptional
    /// set starts at 2; see [`exceptional_set_from`].
    pub fn alternate(alpha: f64) -> Result<Self> {
        Self::alternate_with_set(exceptional_set_from(alpha, EXCEPTIONAL_CUTOFF, 2)?)
    }

    /// The alternate curve driven by an arbitrary exceptional set.
    pub fn alternate_with_set(set: ExceptionalSet) -> Result<Self> {
        let alpha = set.alpha();
        Ok(CurveSpec {
            family: Family::Alternate,
            d: 2,
            schedule: ScaleSchedule::constant(alpha, 0.25),
            exceptional: Some(set),
        })
    }

    /// The planar naive curve: standard orientations on cubes of side
    /// `alpha^n`, parametrized by base-4 digits. Discontinuous for
    /// `alpha > 1/2`.
    pub fn naive(alpha: f64) -> Result<Self> {
        if !(0.5..1.0).contains(&alpha) {
            return Err(param(format!("alpha = {alpha} must lie in [1/2, 1)")));
        }
        Ok(CurveSpec { family: Family::Naive, d: 2, schedule: ScaleSchedule::constant(alpha, 0.25), exceptional: None })
    }

    /// Builds any family from flat parameters; `rho` is used by the
    /// generalized family only.
    pub fn from_parts(family: Family, d: usize, alpha: f64, rho: f64) -> Result<Self> {
        let planar = |spec: Result<Self>| {
            if d != 2 {
                return Err(param(format!("the {family} family is planar; got d = {d}")));
            }
            spec
        };
        match family {
            Family::Standard => Self::standard(d),
            Family::Generalized => Self::generalized(d, alpha, rho),
            Family::Alternate => planar(Self::alternate(alpha)),
            Family::Naive => planar(Self::naive(alpha)),
        }
    }

    #[inline]
    pub fn family(&self) -> Family {
        self.family
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn base(&self) -> usize {
        1 << self.d
    }

    pub fn schedule(&self) -> &ScaleSchedule {
        &self.schedule
    }

    pub fn exceptional(&self) -> Option<&ExceptionalSet> {
        self.exceptional.as_ref()
    }

    /// The expansion factor for constant schedules.
    pub fn alpha(&self) -> Option<f64> {
        match self.schedule {
            ScaleSchedule::Constant { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    /// The Cantor set of a constant-scale generalized curve.
    pub fn cantor(&self) -> Option<CantorSpec> {
        match (self.family, &self.schedule) {
            (Family::Generalized, ScaleSchedule::Constant { rho, .. }) => CantorSpec::new(*rho, self.d).ok(),
            _ => None,
        }
    }

    /// Time parameter uses the Cantor set rather than base-`2^d` digits.
    pub fn is_cantor(&self) -> bool {
        self.family == Family::Generalized
    }

    /// Side of a level-`n` cube.
    pub fn side(&self, n: usize) -> f64 {
        self.schedule.side(n)
    }

    /// Bound on the distance from a level-`n` cell center to any point of the
    /// curve inside that cell: `sqrt(d) sum_{i>n} side_{i-1} / 4`.
    pub fn tail_bound(&self, n: usize) -> f64 {
        let root_d = (self.d as f64).sqrt();
        if let Some(alpha) = self.alpha() {
            return root_d * alpha.powi(n as i32) / (4.0 * (1.0 - alpha));
        }
        let mut side = self.side(n);
        let mut acc = 0.0;
        let mut i = n + 1;
        loop {
            acc += side / 4.0;
            let alpha = self.schedule.alpha(i);
            side *= alpha;
            i += 1;
            // remaining terms are dominated by a geometric series in alpha_i,
            // which is an upper bound once the schedule is non-increasing
            if side < 1e-18 * acc || i > n + 100_000 {
                acc += side / 4.0 / (1.0 - alpha);
                break;
            }
        }
        root_d * acc
    }

    /// The cube swept by the whole curve.
    pub fn envelope(&self) -> Cube {
        match self.alpha() {
            Some(alpha) => scale_of(&Cube::unit(self.d), alpha),
            None => Cube { side: 2.0 * self.tail_bound(0) / (self.d as f64).sqrt(), ..Cube::unit(self.d) },
        }
    }

    /// Time value of the left end of the cell addressed by `s`.
    pub fn time_of(&self, s: &[u8]) -> f64 {
        if self.is_cantor() {
            digits::left_endpoint_with(s, self.base(), |n| self.schedule.rho(n))
        } else {
            let b = self.base() as f64;
            s.iter().rev().fold(0.0, |acc, &a| (acc + f64::from(a)) / b)
        }
    }

    /// Length of the parameter interval of a level-`n` cell.
    pub fn time_length(&self, n: usize) -> f64 {
        if self.is_cantor() {
            self.schedule.length(n)
        } else {
            (self.base() as f64).powi(-(n as i32))
        }
    }

    fn check_string(&self, s: &DigitString) -> Result<()> {
        if s.d() != self.d {
            return Err(param(format!("digit string of dimension {} used with a d = {} curve", s.d(), self.d)));
        }
        Ok(())
    }
}

/// Incremental evaluation along a digit string: push and pop digits, reading
/// the cell center at every depth. Enumerations reuse the shared prefix.
#[derive(Clone)]
pub struct Cursor<'a> {
    spec: &'a CurveSpec,
    digits: Vec<u8>,
    maps: Vec<OrientationMap>,
    grays: Vec<GrayState>,
    centers: Vec<Point>,
    sides: Vec<f64>,
}

impl<'a> Cursor<'a> {
    pub fn new(spec: &'a CurveSpec) -> Self {
        let gray = spec.d > 2;
        let root_gray = GrayState::root(spec.d).expect("dimension checked on construction");
        Cursor {
            spec,
            digits: Vec::new(),
            maps: vec![if gray { root_gray.map() } else { f_empty() }],
            grays: vec![root_gray],
            centers: vec![Point::splat(spec.d, 0.5)],
            sides: vec![1.0],
        }
    }

    pub fn from_digits(spec: &'a CurveSpec, s: &[u8]) -> Result<Self> {
        let mut c = Cursor::new(spec);
        for &a in s {
            c.push(a)?;
        }
        Ok(c)
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    #[inline]
    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    /// Center of the current cell.
    #[inline]
    pub fn center(&self) -> Point {
        *self.centers.last().unwrap()
    }

    /// Center after the first `n` digits.
    #[inline]
    pub fn center_at(&self, n: usize) -> Point {
        self.centers[n]
    }

    /// Side of the current cell.
    #[inline]
    pub fn side(&self) -> f64 {
        *self.sides.last().unwrap()
    }

    /// Orientation of the current cell.
    #[inline]
    pub fn orientation(&self) -> &OrientationMap {
        self.maps.last().unwrap()
    }

    pub fn cube(&self) -> Cube {
        Cube { center: self.center(), side: self.side(), level: self.depth() }
    }

    pub fn push(&mut self, a: u8) -> Result<()> {
        if usize::from(a) >= self.spec.base() {
            return Err(Error::InvalidDigit { digit: a.into(), alphabet: self.spec.base() as u32 });
        }
        let n = self.digits.len();
        let map = self.maps[n];
        let side = self.sides[n];
        let mut center = self.centers[n];
        let quarter = side / 4.0;
        for i in 0..self.spec.d {
            center[i] += quarter * map.sign(a, i);
        }
        self.digits.push(a);
        let next = if self.spec.d > 2 {
            let g = self.grays[n].step(a)?;
            self.grays.push(g);
            g.map()
        } else if let Some(set) = &self.spec.exceptional {
            step_alternate_slices(&self.digits, &self.maps, set)?
        } else {
            step_standard(&map, a)?
        };
        self.maps.push(next);
        self.centers.push(center);
        self.sides.push(side * self.spec.schedule.alpha(n + 1));
        Ok(())
    }

    pub fn pop(&mut self) -> Option<u8> {
        let a = self.digits.pop()?;
        self.maps.pop();
        self.centers.pop();
        self.sides.pop();
        if self.spec.d > 2 {
            self.grays.pop();
        }
        Some(a)
    }

    pub fn truncate(&mut self, n: usize) {
        while self.depth() > n {
            self.pop();
        }
    }
}

/// Center of the cell addressed by `s`.
pub fn cell_center(s: &DigitString, spec: &CurveSpec) -> Result<Point> {
    spec.check_string(s)?;
    Ok(Cursor::from_digits(spec, s.digits())?.center())
}

/// The lattice cube addressed by `s`.
pub fn cube_of(s: &DigitString, spec: &CurveSpec) -> Result<Cube> {
    spec.check_string(s)?;
    Ok(Cursor::from_digits(spec, s.digits())?.cube())
}

/// `H_n` at the cell addressed by `s`.
pub fn hilbert_standard(s: &DigitString, d: usize) -> Result<Point> {
    cell_center(s, &CurveSpec::standard(d)?)
}

/// `G_n` at the Cantor point addressed by `s`.
pub fn generalized(s: &DigitString, spec: &CurveSpec) -> Result<Point> {
    if spec.family != Family::Generalized {
        return Err(Error::Precondition(format!("expected the generalized family, got {}", spec.family)));
    }
    cell_center(s, spec)
}

/// The alternate curve at the base-4 cell `s`.
pub fn alternate(s: &DigitString, alpha: f64) -> Result<Point> {
    cell_center(s, &CurveSpec::alternate(alpha)?)
}

/// Visits every cell at `depth` below `prefix` in increasing time order.
pub fn for_each_cell<F>(spec: &CurveSpec, prefix: &[u8], depth: usize, mut visit: F) -> Result<()>
where
    F: FnMut(&Cursor<'_>),
{
    if depth < prefix.len() {
        return Err(param(format!("depth {depth} is shorter than the prefix")));
    }
    let extra = depth - prefix.len();
    if spec.d * extra > MAX_CELLS.trailing_zeros() as usize {
        return Err(Error::Resource(format!("{extra} levels below the prefix is too many cells")));
    }
    let mut cursor = Cursor::from_digits(spec, prefix)?;
    let base = spec.base() as u8;
    fn rec<F: FnMut(&Cursor<'_>)>(c: &mut Cursor<'_>, depth: usize, base: u8, visit: &mut F) -> Result<()> {
        if c.depth() == depth {
            visit(c);
            return Ok(());
        }
        for a in 0..base {
            c.push(a)?;
            rec(c, depth, base, visit)?;
            c.pop();
        }
        Ok(())
    }
    rec(&mut cursor, depth, base, &mut visit)
}

/// All `(time, center)` pairs at `depth` below `prefix`.
pub fn cells(spec: &CurveSpec, prefix: &[u8], depth: usize) -> Result<Vec<(f64, Point)>> {
    let mut out = Vec::new();
    for_each_cell(spec, prefix, depth, |c| out.push((spec.time_of(c.digits()), c.center())))?;
    Ok(out)
}

/// A curve value together with how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveValue {
    pub t: f64,
    pub point: Point,
    pub depth: usize,
    /// Bound on the distance to the limit curve.
    pub err_bound: f64,
}

/// First `depth` base-`2^d` digits of `t`; `t = 1` gives all maximal digits.
pub fn base_digits(t: f64, d: usize, depth: usize) -> Vec<u8> {
    let b = (1u32 << d) as f64;
    let mut x = t;
    let mut out = Vec::with_capacity(depth);
    for _ in 0..depth {
        x *= b;
        let a = x.floor().clamp(0.0, b - 1.0);
        out.push(a as u8);
        x -= a;
    }
    out
}

/// Evaluates the curve at time `t` to the given depth. On a connection
/// interval of the generalized family the value is interpolated linearly
/// between the curve values at the gap endpoints.
pub fn curve_eval(t: f64, spec: &CurveSpec, depth: usize) -> Result<CurveValue> {
    if !(0.0..=1.0).contains(&t) {
        return Err(param(format!("time {t} outside [0, 1]")));
    }
    if depth > digits::MAX_DEPTH {
        return Err(Error::Resource(format!("depth {depth} exceeds the cap {}", digits::MAX_DEPTH)));
    }
    let err_bound = spec.tail_bound(depth);
    if !spec.is_cantor() {
        let s = base_digits(t, spec.d, depth);
        let point = Cursor::from_digits(spec, &s)?.center();
        return Ok(CurveValue { t, point, depth, err_bound });
    }
    let point = match locate_with(t, depth, spec.d, |n| spec.schedule.rho(n))? {
        IntervalAddress::Kept(s) => Cursor::from_digits(spec, s.digits())?.center(),
        IntervalAddress::Connection(gap) => {
            let top = spec.base() as u8 - 1;
            let len = depth.max(gap.parent.len() + 1);
            let mut left = gap.parent.digits().to_vec();
            left.push(gap.gap as u8 - 1);
            left.resize(len, top);
            let mut right = gap.parent.digits().to_vec();
            right.push(gap.gap as u8);
            right.resize(len, 0);
            let a = Cursor::from_digits(spec, &left)?.center();
            let b = Cursor::from_digits(spec, &right)?.center();
            let lambda = ((t - gap.left) / (gap.right - gap.left)).clamp(0.0, 1.0);
            a.add(&b.sub(&a).scale(lambda))
        }
    };
    Ok(CurveValue { t, point, depth, err_bound })
}

/// Exact limit of the curve along `prefix` followed by infinitely many
/// copies of `tail`, for standard orientations with `tail = 0` (any `d`) or
/// `tail = 3` (planar): those steps keep the image of `tail` fixed, so the
/// remainder is a geometric series.
pub fn constant_tail_limit(spec: &CurveSpec, prefix: &[u8], tail: u8) -> Result<Point> {
    let fixed = tail == 0 || (tail == 3 && spec.d == 2);
    if spec.exceptional.is_some() || !spec.schedule.is_constant() || !fixed {
        return Err(Error::Precondition("closed-form tails need standard orientations and a fixed tail corner".into()));
    }
    let alpha = spec.alpha().unwrap();
    let c = Cursor::from_digits(spec, prefix)?;
    let k = c.side() / (4.0 * (1.0 - alpha));
    let map = c.orientation();
    let mut p = c.center();
    for i in 0..spec.d {
        p[i] += k * map.sign(tail, i);
    }
    Ok(p)
}

/// Limit of the curve along `prefix` followed by copies of `tail`, summed
/// until the remaining terms are below `tol`.
pub fn tail_limit(spec: &CurveSpec, prefix: &[u8], tail: u8, tol: f64) -> Result<(Point, usize)> {
    let mut c = Cursor::from_digits(spec, prefix)?;
    let alpha = spec.alpha().ok_or_else(|| Error::Precondition("tail limits need a constant schedule".into()))?;
    let limit = 20_000;
    while spec.tail_bound(c.depth()) > tol {
        if c.depth() >= limit {
            return Err(Error::Resource(format!("tail did not reach {tol} within {limit} digits at alpha = {alpha}")));
        }
        c.push(tail)?;
    }
    Ok((c.center(), c.depth()))
}

/// Distance between the two one-sided limits of the naive curve at `t = 1/2`,
/// approached along `1 3 3 3 ...` and `2 0 0 0 ...`, with the first `depth`
/// digits summed explicitly and the rest in closed form.
pub fn naive_gap(alpha: f64, depth: usize) -> Result<f64> {
    let spec = CurveSpec::naive(alpha)?;
    if depth == 0 {
        return Err(param("depth must be at least 1"));
    }
    let mut left = vec![3u8; depth];
    left[0] = 1;
    let mut right = vec![0u8; depth];
    right[0] = 2;
    let a = constant_tail_limit(&spec, &left, 3)?;
    let b = constant_tail_limit(&spec, &right, 0)?;
    Ok(a.dist(&b))
}

/// The unpadded left/right approach strings to the base-4 joint after the
/// cell `s`, used for continuity checks.
pub fn joint_sides(s: &[u8]) -> Option<(Vec<u8>, Vec<u8>)> {
    let (&last, head) = s.split_last()?;
    if last == 3 {
        return None;
    }
    let mut left = head.to_vec();
    left.push(last);
    let mut right = head.to_vec();
    right.push(last + 1);
    Some((left, right))
}

impl crate::traversal::OrientationLookup for Cursor<'_> {
    fn lookup(&self, s: &[u8]) -> Option<OrientationMap> {
        (s.len() < self.maps.len() && self.digits.starts_with(s)).then(|| self.maps[s.len()])
    }
}
