//! Orientation maps: the order in which the children of a cell are visited.
//!
//! Corners of `{-1,+1}^d` are stored as bitmasks, bit `i` set meaning `+1` in
//! coordinate `i`. In the plane the four corners are `0b00 = (-1,-1)`,
//! `0b01 = (1,-1)`, `0b10 = (-1,1)` and `0b11 = (1,1)`.

use std::collections::HashMap;
use std::fmt;

use parking_lot::RwLock;

use crate::digits::DigitString;
use crate::error::param;
use crate::point::Point;
use crate::{check_dim, Error, Result, MAX_CORNERS};

/// Bijection from digits `0..2^d` to cube corners.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrientationMap {
    images: [u8; MAX_CORNERS],
    d: u8,
}

impl OrientationMap {
    /// Builds a map from corner bitmasks, checking that it is a bijection.
    pub fn from_images(d: usize, images: &[u8]) -> Result<Self> {
        check_dim(d)?;
        let base = 1usize << d;
        if images.len() != base {
            return Err(param(format!("expected {base} images, got {}", images.len())));
        }
        let mut seen = [false; MAX_CORNERS];
        for &c in images {
            if usize::from(c) >= base || std::mem::replace(&mut seen[usize::from(c)], true) {
                return Err(param(format!("images {images:?} are not a bijection onto the corners")));
            }
        }
        let mut out = [0u8; MAX_CORNERS];
        out[..base].copy_from_slice(images);
        Ok(OrientationMap { images: out, d: d as u8 })
    }

    /// Builds a planar map from sign vectors such as `(-1, 1)`.
    pub fn from_signs(signs: [(i8, i8); 4]) -> Result<Self> {
        let mut images = [0u8; 4];
        for (slot, (x, y)) in images.iter_mut().zip(signs) {
            if x.abs() != 1 || y.abs() != 1 {
                return Err(param(format!("({x}, {y}) is not a corner of the square")));
            }
            *slot = u8::from(x > 0) | (u8::from(y > 0) << 1);
        }
        Self::from_images(2, &images)
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d as usize
    }

    #[inline]
    pub fn images(&self) -> &[u8] {
        &self.images[..1 << self.d]
    }

    /// Corner bitmask assigned to digit `a`.
    #[inline]
    pub fn corner(&self, a: u8) -> u8 {
        self.images[usize::from(a)]
    }

    /// Sign of coordinate `i` of the corner assigned to digit `a`.
    #[inline]
    pub fn sign(&self, a: u8, i: usize) -> f64 {
        corner_sign(self.corner(a), i)
    }

    /// Corner assigned to digit `a` as a `{-1,+1}^d` vector.
    pub fn signs(&self, a: u8) -> Point {
        let mut p = Point::zeros(self.d());
        for i in 0..self.d() {
            p[i] = self.sign(a, i);
        }
        p
    }

    /// Digit mapped to a given corner.
    pub fn digit_of(&self, corner: u8) -> u8 {
        self.images().iter().position(|&c| c == corner).expect("orientation maps are bijections") as u8
    }

    /// Planar well-formedness: digits `{0,2}` go to the diagonal `{(-1,-1),(1,1)}`
    /// and digits `{1,3}` to the antidiagonal.
    pub fn has_diagonal_pairs(&self) -> bool {
        if self.d != 2 {
            return false;
        }
        let diag = |c: u8| c == 0b00 || c == 0b11;
        diag(self.images[0]) && diag(self.images[2]) && !diag(self.images[1]) && !diag(self.images[3])
    }

    /// Consecutive digits go to corners that differ in exactly one coordinate.
    pub fn is_gray_path(&self) -> bool {
        self.images().windows(2).all(|w| (w[0] ^ w[1]).count_ones() == 1)
    }
}

impl fmt::Debug for OrientationMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for a in 0..1u8 << self.d {
            let v: Vec<i8> = (0..self.d()).map(|i| self.sign(a, i) as i8).collect();
            list.entry(&v);
        }
        list.finish()
    }
}

#[inline]
pub fn corner_sign(corner: u8, i: usize) -> f64 {
    if corner >> i & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// The root orientation of the planar curve:
/// `((-1,-1), (-1,1), (1,1), (1,-1))`.
pub fn f_empty() -> OrientationMap {
    OrientationMap { images: root_images([0b00, 0b10, 0b11, 0b01]), d: 2 }
}

fn root_images(first: [u8; 4]) -> [u8; MAX_CORNERS] {
    let mut out = [0u8; MAX_CORNERS];
    out[..4].copy_from_slice(&first);
    out
}

/// Fills in a planar map from pinned `(digit, corner)` pairs so that it
/// satisfies the diagonal-pair conditions. The pairs `{0,2}` and `{1,3}` each
/// sit on a diagonal, so pinning one member fixes the other as its antipode.
pub fn complete(pins: &[(u8, u8)]) -> Result<OrientationMap> {
    let mut h: [Option<u8>; 4] = [None; 4];
    for &(a, c) in pins {
        if a > 3 || c > 3 {
            return Err(param(format!("pin ({a}, {c}) out of range")));
        }
        match h[usize::from(a)] {
            Some(prev) if prev != c => {
                return Err(Error::Invariant(format!("digit {a} pinned to two corners")));
            }
            _ => h[usize::from(a)] = Some(c),
        }
    }
    for (x, y) in [(0, 2), (1, 3)] {
        match (h[x], h[y]) {
            (Some(c), None) => h[y] = Some(c ^ 0b11),
            (None, Some(c)) => h[x] = Some(c ^ 0b11),
            (None, None) => {
                return Err(Error::Invariant(format!("digits {x} and {y} left unconstrained")));
            }
            _ => {}
        }
    }
    let images: Vec<u8> = h.iter().map(|c| c.unwrap()).collect();
    let map = OrientationMap::from_images(2, &images)
        .map_err(|_| Error::Invariant(format!("pins {pins:?} admit no bijective completion")))?;
    if !map.has_diagonal_pairs() {
        return Err(Error::Invariant(format!("pins {pins:?} violate the diagonal-pair conditions")));
    }
    Ok(map)
}

/// Every planar map satisfying the diagonal-pair conditions and the pins,
/// found by trying all 24 bijections of the corners.
pub fn search_completions(pins: &[(u8, u8)]) -> Vec<OrientationMap> {
    let mut out = Vec::new();
    for code in 0..256u32 {
        let v: Vec<u8> = (0..4).map(|i| (code >> (6 - 2 * i) & 3) as u8).collect();
        let Ok(map) = OrientationMap::from_images(2, &v) else { continue };
        if map.has_diagonal_pairs() && pins.iter().all(|&(a, c)| a < 4 && map.corner(a) == c) {
            out.push(map);
        }
    }
    out
}

fn require_planar(map: &OrientationMap) -> Result<()> {
    if map.d != 2 {
        return Err(Error::Precondition(format!("planar traversal used with d = {}", map.d)));
    }
    Ok(())
}

/// One step of the standard planar traversal.
pub fn step_standard(parent: &OrientationMap, a: u8) -> Result<OrientationMap> {
    require_planar(parent)?;
    match a {
        1 | 2 => Ok(*parent),
        0 => complete(&[(0, parent.corner(0)), (1, parent.corner(3))]),
        3 => complete(&[(0, parent.corner(2)), (1, parent.corner(1))]),
        _ => Err(Error::InvalidDigit { digit: a.into(), alphabet: 4 }),
    }
}

/// `f_s` for the standard planar traversal: a left fold of [`step_standard`].
pub fn orientation(s: &DigitString) -> Result<OrientationMap> {
    if s.d() != 2 {
        return Err(Error::Precondition(format!("planar traversal used with d = {}", s.d())));
    }
    s.digits().iter().try_fold(f_empty(), |f, &a| step_standard(&f, a))
}

/// Greedy expansion `2 beta / (1 - alpha) = sum_{i in S} alpha^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExceptionalSet {
    alpha: f64,
    members: Vec<u32>,
    target: f64,
    residual: f64,
}

impl ExceptionalSet {
    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn members(&self) -> &[u32] {
        &self.members
    }

    /// The value `2 beta / (1 - alpha)` being represented.
    #[inline]
    pub fn target(&self) -> f64 {
        self.target
    }

    #[inline]
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn contains(&self, j: u32) -> bool {
        self.members.binary_search(&j).is_ok()
    }

    pub fn partial_sum(&self) -> f64 {
        self.members.iter().map(|&j| self.alpha.powi(j as i32)).sum()
    }
}

/// Runs the greedy rule over `1..=n`.
pub fn exceptional_set(alpha: f64, n: u32) -> Result<ExceptionalSet> {
    exceptional_set_from(alpha, n, 1)
}

/// Runs the greedy rule over `first..=n`.
///
/// The alternate traversal can only reverse the `l`-th step of a block of
/// zeros or threes for `l >= 2`: the first step is placed by the orientation
/// of the prestring, which the block does not control. For
/// `alpha >= 1/sqrt(2)` the greedy rule over `1..` picks `1`, and the one-sided
/// limits at the base-4 joints then disagree by `alpha^m`. Starting at `2` is
/// always possible because `sum_{j>=2} alpha^j = alpha^2 / (1 - alpha)`
/// exceeds `2 beta / (1 - alpha)` for every `alpha`.
pub fn exceptional_set_from(alpha: f64, n: u32, first: u32) -> Result<ExceptionalSet> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(param(format!("alpha = {alpha} must lie in (1/2, 1)")));
    }
    if n == 0 || first == 0 || first > n {
        return Err(param(format!("cutoff {n} and first index {first} must satisfy 1 <= first <= cutoff")));
    }
    let beta = (2.0 * alpha - 1.0) / 4.0;
    let target = 2.0 * beta / (1.0 - alpha);
    // Exact representations such as alpha = sqrt(2)/2 should not be lost to
    // the last bit of the subtraction.
    let mut residual = target;
    let mut members = Vec::new();
    for j in first..=n {
        let term = alpha.powi(j as i32);
        if term <= residual * (1.0 + 1e-12) {
            members.push(j);
            residual = (residual - term).max(0.0);
            if residual <= 1e-15 * target {
                residual = 0.0;
            }
        }
    }
    Ok(ExceptionalSet { alpha, members, target, residual })
}

fn terminal_block(s: &[u8], digit: u8) -> usize {
    s.iter().rev().take_while(|&&a| a == digit).count()
}

/// True iff `s` ends in exactly `k >= 1` zeros with `k + 1` in `set`.
pub fn is_zero_reverse(s: &DigitString, set: &ExceptionalSet) -> bool {
    is_reverse(s.digits(), 0, set)
}

/// True iff `s` ends in exactly `k >= 1` threes with `k + 1` in `set`.
pub fn is_three_reverse(s: &DigitString, set: &ExceptionalSet) -> bool {
    is_reverse(s.digits(), 3, set)
}

fn is_reverse(s: &[u8], digit: u8, set: &ExceptionalSet) -> bool {
    let k = terminal_block(s, digit);
    k >= 1 && set.contains(k as u32 + 1)
}

/// `s` with its maximal terminal block of zeros (or threes) removed.
pub fn prestring(s: &DigitString) -> Result<DigitString> {
    let k = prestring_len(s.digits())?;
    Ok(s.prefix(k))
}

fn prestring_len(s: &[u8]) -> Result<usize> {
    match s.last() {
        Some(&a @ (0 | 3)) => Ok(s.len() - terminal_block(s, a)),
        _ => Err(Error::Precondition("prestring of a string not ending in 0 or 3".into())),
    }
}

/// Source of already computed orientations, keyed by digit string.
pub trait OrientationLookup {
    fn lookup(&self, s: &[u8]) -> Option<OrientationMap>;
}

/// One step of the alternate planar traversal. Needs the orientations of the
/// parent of `s` and of its prestring.
pub fn step_alternate(cache: &impl OrientationLookup, s: &DigitString, set: &ExceptionalSet) -> Result<OrientationMap> {
    if s.d() != 2 {
        return Err(Error::Precondition(format!("planar traversal used with d = {}", s.d())));
    }
    step_alternate_raw(cache, s.digits(), set)
}

fn step_alternate_raw(cache: &impl OrientationLookup, s: &[u8], set: &ExceptionalSet) -> Result<OrientationMap> {
    let Some((&a, head)) = s.split_last() else {
        return Ok(f_empty());
    };
    let fetch =
        |key: &[u8]| cache.lookup(key).ok_or_else(|| Error::Dependency(format!("orientation of {key:?} not cached")));
    let parent = fetch(head)?;
    match a {
        1 | 2 => Ok(parent),
        0 => {
            let pre = fetch(&s[..prestring_len(s)?])?;
            let first = if is_reverse(s, 0, set) { pre.corner(2) } else { pre.corner(0) };
            complete(&[(1, parent.corner(3)), (0, first)])
        }
        3 => {
            let pre = fetch(&s[..prestring_len(s)?])?;
            let second = if is_reverse(s, 3, set) { pre.corner(3) } else { pre.corner(1) };
            complete(&[(0, parent.corner(2)), (1, second)])
        }
        _ => Err(Error::InvalidDigit { digit: a.into(), alphabet: 4 }),
    }
}

struct SliceChain<'a> {
    digits: &'a [u8],
    maps: &'a [OrientationMap],
}

impl OrientationLookup for SliceChain<'_> {
    fn lookup(&self, s: &[u8]) -> Option<OrientationMap> {
        (s.len() < self.maps.len() && self.digits.starts_with(s)).then(|| self.maps[s.len()])
    }
}

/// [`step_alternate`] for the last digit of `digits`, where `maps[i]` holds
/// the orientation of the first `i` digits.
pub(crate) fn step_alternate_slices(
    digits: &[u8],
    maps: &[OrientationMap],
    set: &ExceptionalSet,
) -> Result<OrientationMap> {
    step_alternate_raw(&SliceChain { digits, maps }, digits, set)
}

/// Orientations of every prefix of one digit string: entry `i` is `f` of the
/// first `i` digits. Prestrings are prefixes, so this is all the alternate
/// traversal ever needs along a single string.
#[derive(Clone, Debug)]
pub struct PrefixChain {
    digits: Vec<u8>,
    maps: Vec<OrientationMap>,
}

impl PrefixChain {
    pub fn standard(s: &DigitString) -> Result<Self> {
        if s.d() != 2 {
            return Err(Error::Precondition(format!("planar traversal used with d = {}", s.d())));
        }
        let mut maps = Vec::with_capacity(s.len() + 1);
        maps.push(f_empty());
        for &a in s.digits() {
            let next = step_standard(maps.last().unwrap(), a)?;
            maps.push(next);
        }
        Ok(PrefixChain { digits: s.digits().to_vec(), maps })
    }

    pub fn alternate(s: &DigitString, set: &ExceptionalSet) -> Result<Self> {
        if s.d() != 2 {
            return Err(Error::Precondition(format!("planar traversal used with d = {}", s.d())));
        }
        let mut chain = PrefixChain { digits: s.digits().to_vec(), maps: vec![f_empty()] };
        for n in 1..=s.len() {
            let next = step_alternate_raw(&chain, &s.digits()[..n], set)?;
            chain.maps.push(next);
        }
        Ok(chain)
    }

    /// Orientation of the first `n` digits.
    pub fn at(&self, n: usize) -> &OrientationMap {
        &self.maps[n]
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }
}

impl OrientationLookup for PrefixChain {
    fn lookup(&self, s: &[u8]) -> Option<OrientationMap> {
        (s.len() < self.maps.len() && self.digits.starts_with(s)).then(|| self.maps[s.len()])
    }
}

/// Shared memo of alternate orientations. Reads are concurrent, inserts are
/// serialised; every entry is a pure function of its key.
#[derive(Debug)]
pub struct AlternateMemo {
    set: ExceptionalSet,
    table: RwLock<HashMap<Vec<u8>, OrientationMap>>,
}

impl AlternateMemo {
    pub fn new(set: ExceptionalSet) -> Self {
        let mut table = HashMap::new();
        table.insert(Vec::new(), f_empty());
        AlternateMemo { set, table: RwLock::new(table) }
    }

    pub fn set(&self) -> &ExceptionalSet {
        &self.set
    }

    pub fn len(&self) -> usize {
        self.table.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.read().is_empty()
    }

    pub fn orientation(&self, s: &DigitString) -> Result<OrientationMap> {
        if s.d() != 2 {
            return Err(Error::Precondition(format!("planar traversal used with d = {}", s.d())));
        }
        let digits = s.digits();
        // find the longest cached prefix, then extend one digit at a time
        let start = (0..=digits.len()).rev().find(|&n| self.table.read().contains_key(&digits[..n])).unwrap_or(0);
        for n in start + 1..=digits.len() {
            let map = step_alternate_raw(self, &digits[..n], &self.set)?;
            self.table.write().insert(digits[..n].to_vec(), map);
        }
        Ok(self.lookup(digits).expect("just inserted"))
    }
}

impl OrientationLookup for AlternateMemo {
    fn lookup(&self, s: &[u8]) -> Option<OrientationMap> {
        self.table.read().get(s).copied()
    }
}

/// `f_s` for the alternate planar traversal.
pub fn alternate_orientation(s: &DigitString, set: &ExceptionalSet) -> Result<OrientationMap> {
    Ok(*PrefixChain::alternate(s, set)?.maps.last().unwrap())
}

/// State of the Gray-code Hilbert traversal in `d` dimensions: an entry
/// corner `e` and an intra-cell direction `dir`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GrayState {
    pub entry: u8,
    pub dir: u8,
    d: u8,
}

#[inline]
fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

#[inline]
fn rotl(b: u32, r: u32, d: u32) -> u32 {
    let r = r % d;
    let mask = (1u32 << d) - 1;
    ((b << r) | (b >> ((d - r) % d))) & mask
}

fn entry_point(w: u32) -> u32 {
    if w == 0 {
        0
    } else {
        gray(2 * ((w - 1) / 2))
    }
}

fn intra_direction(w: u32, d: u32) -> u32 {
    if w == 0 {
        0
    } else if w % 2 == 0 {
        (w - 1).trailing_ones() % d
    } else {
        w.trailing_ones() % d
    }
}

impl GrayState {
    pub fn root(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(GrayState { entry: 0, dir: 0, d: d as u8 })
    }

    pub fn map(&self) -> OrientationMap {
        let d = u32::from(self.d);
        let mut images = [0u8; MAX_CORNERS];
        for (w, slot) in images.iter_mut().enumerate().take(1 << d) {
            *slot = (rotl(gray(w as u32), u32::from(self.dir) + 1, d) ^ u32::from(self.entry)) as u8;
        }
        OrientationMap { images, d: self.d }
    }

    pub fn step(&self, w: u8) -> Result<GrayState> {
        let d = u32::from(self.d);
        let w = u32::from(w);
        if w >= 1 << d {
            return Err(Error::InvalidDigit { digit: w, alphabet: 1 << d });
        }
        let entry = u32::from(self.entry) ^ rotl(entry_point(w), u32::from(self.dir) + 1, d);
        let dir = (u32::from(self.dir) + intra_direction(w, d) + 1) % d;
        Ok(GrayState { entry: entry as u8, dir: dir as u8, d: self.d })
    }
}

/// `f_s` for the Gray-code Hilbert traversal in any dimension.
pub fn traversal_ddim(s: &DigitString, d: usize) -> Result<OrientationMap> {
    if s.d() != d {
        return Err(param(format!("digit string of dimension {} used with d = {d}", s.d())));
    }
    let state = s.digits().iter().try_fold(GrayState::root(d)?, |st, &w| st.step(w))?;
    Ok(state.map())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// All 24 bijections of the planar corners.
    fn all_bijections() -> Vec<[u8; 4]> {
        let mut out = Vec::new();
        for a in 0..4u8 {
            for b in 0..4u8 {
                for c in 0..4u8 {
                    for d in 0..4u8 {
                        let v = [a, b, c, d];
                        let mut seen = [false; 4];
                        if v.iter().all(|&x| !std::mem::replace(&mut seen[x as usize], true)) {
                            out.push(v);
                        }
                    }
                }
            }
        }
        out
    }

    fn oracle(pins: &[(u8, u8)]) -> Vec<OrientationMap> {
        let out: Vec<OrientationMap> = all_bijections()
            .into_iter()
            .map(|v| OrientationMap::from_images(2, &v).unwrap())
            .filter(|m| m.has_diagonal_pairs() && pins.iter().all(|&(a, c)| m.corner(a) == c))
            .collect();
        assert_eq!(search_completions(pins), out);
        out
    }

    fn signs(v: [(i8, i8); 4]) -> OrientationMap {
        OrientationMap::from_signs(v).unwrap()
    }

    fn ds(digits: &[u8]) -> DigitString {
        DigitString::from_slice(2, digits).unwrap()
    }

    #[test]
    fn root_map() {
        let f = f_empty();
        assert_eq!(f, signs([(-1, -1), (-1, 1), (1, 1), (1, -1)]));
        assert_eq!((f.sign(0, 0), f.sign(0, 1)), (-1.0, -1.0));
        assert_eq!((f.sign(3, 0), f.sign(3, 1)), (1.0, -1.0));
        assert!(f.has_diagonal_pairs() && f.is_gray_path());
    }

    #[test]
    fn all_bijections_count() {
        assert_eq!(all_bijections().len(), 24);
        // two choices on each diagonal
        assert_eq!(oracle(&[]).len(), 4);
    }

    #[test]
    fn standard_steps_match_oracle() {
        let f = f_empty();
        assert_eq!(step_standard(&f, 1).unwrap(), f);
        assert_eq!(step_standard(&f, 2).unwrap(), f);
        let zero = step_standard(&f, 0).unwrap();
        assert_eq!(zero, signs([(-1, -1), (1, -1), (1, 1), (-1, 1)]));
        assert_eq!(oracle(&[(0, f.corner(0)), (1, f.corner(3))]), vec![zero]);
        let three = step_standard(&f, 3).unwrap();
        assert_eq!(three, signs([(1, 1), (-1, 1), (-1, -1), (1, -1)]));
        assert_eq!(oracle(&[(0, f.corner(2)), (1, f.corner(1))]), vec![three]);
        assert!(step_standard(&f, 4).is_err());
    }

    #[test]
    fn completion_is_unique_for_every_valid_parent() {
        for parent in oracle(&[]) {
            for a in 0..4u8 {
                let child = step_standard(&parent, a).unwrap();
                let pins: Vec<(u8, u8)> = match a {
                    0 => vec![(0, parent.corner(0)), (1, parent.corner(3))],
                    3 => vec![(0, parent.corner(2)), (1, parent.corner(1))],
                    _ => (0..4).map(|b| (b, parent.corner(b))).collect(),
                };
                assert_eq!(oracle(&pins), vec![child]);
            }
        }
    }

    #[test]
    fn complete_rejects_contradictions() {
        assert!(matches!(complete(&[(0, 0b01)]), Err(Error::Invariant(_))));
        assert!(matches!(complete(&[(0, 0), (2, 0)]), Err(Error::Invariant(_))));
        assert!(matches!(complete(&[(0, 0)]), Err(Error::Invariant(_))));
    }

    #[test]
    fn orientation_folds() {
        assert_eq!(orientation(&ds(&[])).unwrap(), f_empty());
        assert_eq!(orientation(&ds(&[1, 1, 1])).unwrap(), f_empty());
        let two = step_standard(&step_standard(&f_empty(), 0).unwrap(), 3).unwrap();
        assert_eq!(orientation(&ds(&[0, 3])).unwrap(), two);
        let via_oracle = oracle(&[(0, 0b11), (1, 0b01)]);
        assert_eq!(via_oracle, vec![two]);
    }

    #[test]
    fn exceptional_examples() {
        let s = exceptional_set(0.9, 400).unwrap();
        assert!((s.target() - 4.0).abs() < 1e-12);
        assert_eq!(&s.members()[..6], &[1, 2, 3, 4, 5, 11]);
        assert!((s.partial_sum() - s.target()).abs() < 1e-9);

        let a = std::f64::consts::FRAC_1_SQRT_2;
        let s = exceptional_set(a, 50).unwrap();
        assert!((s.target() - a).abs() < 1e-15);
        assert_eq!(s.members(), &[1]);
        assert_eq!(s.residual(), 0.0);

        assert!(exceptional_set(0.5, 10).is_err());
        assert!(exceptional_set(1.0, 10).is_err());
    }

    #[test]
    fn exceptional_partial_sums_bounded() {
        for alpha in [0.55, 0.6, 0.75, 0.9, 0.97] {
            let s = exceptional_set(alpha, 400).unwrap();
            let mut acc = 0.0;
            for &j in s.members() {
                acc += alpha.powi(j as i32);
                assert!(acc <= s.target() * (1.0 + 1e-12));
                let tail = alpha.powi(j as i32) / (1.0 - alpha);
                assert!(s.target() - acc <= tail + 1e-12);
            }
        }
    }

    #[test]
    fn reverse_predicates() {
        let s = exceptional_set(0.9, 400).unwrap();
        assert!(s.contains(2) && !s.contains(7));
        assert!(is_zero_reverse(&ds(&[2, 0]), &s));
        assert!(is_zero_reverse(&ds(&[0]), &s));
        // 3 in S for alpha = 0.9, so look at a gap of S instead
        assert!(!is_zero_reverse(&ds(&[2, 0, 0, 0, 0, 0]), &s));
        assert!(!is_zero_reverse(&ds(&[2, 1]), &s));
        assert!(is_three_reverse(&ds(&[1, 3, 3]), &s));
        let sqrt = exceptional_set(std::f64::consts::FRAC_1_SQRT_2, 50).unwrap();
        assert!(!is_zero_reverse(&ds(&[2, 0, 0]), &sqrt));
    }

    #[test]
    fn prestrings() {
        assert_eq!(prestring(&ds(&[2, 1, 3, 3, 3])).unwrap(), ds(&[2, 1]));
        assert_eq!(prestring(&ds(&[0, 0])).unwrap(), ds(&[]));
        assert_eq!(prestring(&ds(&[1, 0, 3])).unwrap(), ds(&[1, 0]));
        assert!(matches!(prestring(&ds(&[3, 2])), Err(Error::Precondition(_))));
        assert!(prestring(&ds(&[])).is_err());
    }

    #[test]
    fn alternate_examples() {
        let with_two = exceptional_set(0.9, 400).unwrap();
        assert_eq!(alternate_orientation(&ds(&[1]), &with_two).unwrap(), f_empty());
        let f2 = alternate_orientation(&ds(&[2]), &with_two).unwrap();
        let child = alternate_orientation(&ds(&[2, 0]), &with_two).unwrap();
        assert_eq!(oracle(&[(0, f2.corner(2)), (1, f2.corner(3))]), vec![child]);

        // alpha = sqrt(2)/2 gives S = {1}, so 2 is not a member
        let without = exceptional_set(std::f64::consts::FRAC_1_SQRT_2, 50).unwrap();
        let child = alternate_orientation(&ds(&[2, 0]), &without).unwrap();
        assert_eq!(oracle(&[(0, f2.corner(0)), (1, f2.corner(3))]), vec![child]);
    }

    #[test]
    fn alternate_missing_cache_entry() {
        struct Empty;
        impl OrientationLookup for Empty {
            fn lookup(&self, _: &[u8]) -> Option<OrientationMap> {
                None
            }
        }
        let s = exceptional_set(0.9, 50).unwrap();
        assert!(matches!(step_alternate(&Empty, &ds(&[1, 0]), &s), Err(Error::Dependency(_))));
    }

    #[test]
    fn memo_agrees_with_chain() {
        let set = exceptional_set(0.75, 100).unwrap();
        let memo = AlternateMemo::new(set.clone());
        let words: [&[u8]; 5] = [&[0, 0, 3, 3, 3], &[2, 0, 0], &[3, 1, 0, 0, 0, 3], &[0, 0, 0, 0], &[2, 0, 3, 0]];
        for w in words {
            let s = ds(w);
            assert_eq!(memo.orientation(&s).unwrap(), alternate_orientation(&s, &set).unwrap());
        }
        assert!(memo.len() > 5);
    }

    #[test]
    fn gray_root_is_adjacent_path() {
        for d in 2..=6 {
            let root = GrayState::root(d).unwrap().map();
            assert!(root.is_gray_path());
            assert_eq!(root.corner(0), 0);
        }
        assert_eq!(GrayState::root(2).unwrap().map(), f_empty());
    }

    /// Cells of a nested traversal, in visiting order, as integer corners of
    /// the level-`n` grid.
    fn cells(d: usize, n: usize) -> Vec<Vec<i64>> {
        fn rec(state: GrayState, d: usize, left: usize, origin: Vec<i64>, half: i64, out: &mut Vec<Vec<i64>>) {
            if left == 0 {
                out.push(origin);
                return;
            }
            let map = state.map();
            for w in 0..1u8 << d {
                let c = map.corner(w);
                let o: Vec<i64> = (0..d).map(|i| origin[i] + if c >> i & 1 == 1 { half } else { 0 }).collect();
                rec(state.step(w).unwrap(), d, left - 1, o, half / 2, out);
            }
        }
        let mut out = Vec::new();
        rec(GrayState::root(d).unwrap(), d, n, vec![0; d], 1 << (n - 1), &mut out);
        out
    }

    #[test]
    fn gray_traversal_is_continuous_and_onto() {
        for (d, n) in [(2, 4), (3, 3), (4, 2)] {
            let visit = cells(d, n);
            assert_eq!(visit.len(), 1 << (d * n));
            let mut sorted = visit.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), visit.len());
            for w in visit.windows(2) {
                let l1: i64 = w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum();
                assert_eq!(l1, 1, "cells {:?} and {:?} are not adjacent", w[0], w[1]);
            }
        }
    }

    #[test]
    fn ddim_rejects_mismatched_strings() {
        let s = DigitString::from_slice(3, &[5]).unwrap();
        assert!(traversal_ddim(&s, 3).is_ok());
        assert!(traversal_ddim(&s, 2).is_err());
    }
}
