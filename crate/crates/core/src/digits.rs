//! Digit strings and the Cantor sets `C_{rho,d}` they address.
//!
//! A point of the Cantor set is written `t = K * sum_n a_n rho^n` with digits
//! `a_n` in `0..2^d` and `K = (1 - rho) / ((2^d - 1) rho)`. Every stage keeps
//! `2^d` closed sub-intervals of each kept interval and removes the
//! `2^d - 1` open gaps between them (the connection intervals).
//!
//! Floating-point times are only used for I/O. Endpoints are always recomputed
//! from digit strings with a Horner sum so that rounding does not accumulate
//! across stages.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::param;
use crate::{check_dim, Error, Result};

/// Deepest stage any evaluation will descend to.
pub const MAX_DEPTH: usize = 48;

/// Largest number of intervals [`cantor_stage`] will materialise.
pub const MAX_STAGE_INTERVALS: usize = 1 << 22;

/// A finite word over `0..2^d`; the empty word addresses the root cell.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DigitString {
    d: u8,
    digits: Vec<u8>,
}

impl DigitString {
    pub fn new(d: usize, digits: Vec<u8>) -> Result<Self> {
        check_dim(d)?;
        let base = 1u32 << d;
        if let Some(&bad) = digits.iter().find(|&&a| u32::from(a) >= base) {
            return Err(Error::InvalidDigit { digit: bad.into(), alphabet: base });
        }
        Ok(DigitString { d: d as u8, digits })
    }

    pub fn from_slice(d: usize, digits: &[u8]) -> Result<Self> {
        Self::new(d, digits.to_vec())
    }

    pub fn empty(d: usize) -> Result<Self> {
        Self::new(d, Vec::new())
    }

    /// `len` copies of `digit`.
    pub fn repeat(d: usize, digit: u8, len: usize) -> Result<Self> {
        Self::new(d, vec![digit; len])
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d as usize
    }

    #[inline]
    pub fn base(&self) -> usize {
        1 << self.d
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    #[inline]
    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn last(&self) -> Option<u8> {
        self.digits.last().copied()
    }

    pub fn push(&mut self, a: u8) -> Result<()> {
        if usize::from(a) >= self.base() {
            return Err(Error::InvalidDigit { digit: a.into(), alphabet: self.base() as u32 });
        }
        self.digits.push(a);
        Ok(())
    }

    /// The word with `a` appended.
    pub fn child(&self, a: u8) -> Result<Self> {
        let mut out = self.clone();
        out.push(a)?;
        Ok(out)
    }

    /// First `n` digits (all of them when `n >= len`).
    pub fn prefix(&self, n: usize) -> Self {
        DigitString { d: self.d, digits: self.digits[..n.min(self.len())].to_vec() }
    }

    /// The word extended with copies of `digit` up to total length `len`.
    pub fn padded(&self, digit: u8, len: usize) -> Result<Self> {
        let mut out = self.clone();
        while out.len() < len {
            out.push(digit)?;
        }
        Ok(out)
    }

    pub fn is_prefix_of(&self, other: &DigitString) -> bool {
        self.d == other.d && other.digits.starts_with(&self.digits)
    }

    pub fn into_digits(self) -> Vec<u8> {
        self.digits
    }
}

impl fmt::Debug for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DigitString(d={}, {:?})", self.d, self.digits)
    }
}

impl fmt::Display for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("0.")?;
        for a in &self.digits {
            write!(f, "{a}")?;
            if self.d > 3 {
                f.write_str(",")?;
            }
        }
        Ok(())
    }
}

/// Scale `rho` and dimension of a Cantor set `C_{rho,d}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CantorSpec {
    rho: f64,
    d: u8,
}

impl CantorSpec {
    pub fn new(rho: f64, d: usize) -> Result<Self> {
        check_dim(d)?;
        let limit = 1.0 / (1u32 << d) as f64;
        if !(rho > 0.0 && rho < limit) {
            return Err(param(format!("rho = {rho} must lie in (0, {limit})")));
        }
        Ok(CantorSpec { rho, d: d as u8 })
    }

    #[inline]
    pub fn rho(&self) -> f64 {
        self.rho
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d as usize
    }

    #[inline]
    pub fn base(&self) -> usize {
        1 << self.d
    }

    /// The normalising constant `K = (1 - rho) / ((2^d - 1) rho)`.
    pub fn k(&self) -> f64 {
        (1.0 - self.rho) / ((self.base() - 1) as f64 * self.rho)
    }

    /// Length `rho^n` of a stage-`n` kept interval.
    pub fn stage_length(&self, n: usize) -> f64 {
        self.rho.powi(n as i32)
    }

    /// Length of each connection interval removed when refining stage `n`
    /// into stage `n + 1`.
    pub fn gap_length(&self, n: usize) -> f64 {
        let b = self.base() as f64;
        (1.0 - b * self.rho) / (b - 1.0) * self.stage_length(n)
    }

    /// Total length `(2^d rho)^n` kept at stage `n`.
    pub fn kept_measure(&self, n: usize) -> f64 {
        (self.base() as f64 * self.rho).powi(n as i32)
    }

    fn check(&self, s: &DigitString) -> Result<()> {
        if s.d() != self.d() {
            return Err(param(format!(
                "digit string of dimension {} used with a Cantor set of dimension {}",
                s.d(),
                self.d()
            )));
        }
        Ok(())
    }
}

/// A closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

/// An open gap removed while refining the kept interval of `parent`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionInterval {
    pub parent: DigitString,
    /// Gap index in `1..2^d`: the gap between children `gap - 1` and `gap`.
    pub gap: usize,
    pub left: f64,
    pub right: f64,
}

/// Result of [`locate`]: either a kept interval or the gap containing `t`.
#[derive(Clone, Debug, PartialEq)]
pub enum IntervalAddress {
    Kept(DigitString),
    Connection(ConnectionInterval),
}

/// Left endpoint of the cell addressed by `digits` when stage `n` uses the
/// ratio `rho_at(n)`. Horner form in descending stage order.
pub(crate) fn left_endpoint_with(digits: &[u8], base: usize, rho_at: impl Fn(usize) -> f64) -> f64 {
    let gaps = (base - 1) as f64;
    let mut acc = 0.0;
    for (i, &a) in digits.iter().enumerate().rev() {
        let rho = rho_at(i + 1);
        acc = (1.0 - rho) / gaps * f64::from(a) + rho * acc;
    }
    acc
}

/// Product `rho_1 ... rho_n`.
pub(crate) fn stage_length_with(n: usize, rho_at: impl Fn(usize) -> f64) -> f64 {
    (1..=n).map(rho_at).product()
}

pub(crate) fn locate_with(
    t: f64,
    depth: usize,
    d: usize,
    rho_at: impl Fn(usize) -> f64 + Copy,
) -> Result<IntervalAddress> {
    if !(0.0..=1.0).contains(&t) {
        return Err(param(format!("time {t} outside [0, 1]")));
    }
    if depth > MAX_DEPTH {
        return Err(Error::Resource(format!("depth {depth} exceeds the cap {MAX_DEPTH}")));
    }
    let base = 1usize << d;
    let mut prefix: Vec<u8> = Vec::with_capacity(depth);
    let mut length = 1.0;
    for n in 1..=depth {
        length *= rho_at(n);
        prefix.push(0);
        let mut k = 0;
        let mut lo = left_endpoint_with(&prefix, base, rho_at);
        for cand in 1..base {
            *prefix.last_mut().unwrap() = cand as u8;
            let cand_lo = left_endpoint_with(&prefix, base, rho_at);
            if cand_lo > t {
                break;
            }
            // children closer together than one ulp resolve to the first
            if cand_lo > lo {
                k = cand;
                lo = cand_lo;
            }
        }
        *prefix.last_mut().unwrap() = k as u8;
        let hi = lo + length;
        // Endpoints belong to the kept interval; allow for the rounding of the
        // Horner sum when t itself came from a deeper digit string.
        let slack = 4.0 * f64::EPSILON * hi.abs().max(1e-300);
        if t <= hi + slack || k + 1 == base {
            continue;
        }
        prefix.pop();
        let parent = DigitString::new(d, prefix.clone())?;
        prefix.push(k as u8 + 1);
        let right = left_endpoint_with(&prefix, base, rho_at);
        return Ok(IntervalAddress::Connection(ConnectionInterval { parent, gap: k + 1, left: hi, right }));
    }
    Ok(IntervalAddress::Kept(DigitString::new(d, prefix)?))
}

/// Time value `K * sum a_n rho^n` of a digit string, i.e. the left endpoint
/// of the stage-`len` interval it addresses.
pub fn rho_value(s: &DigitString, spec: &CantorSpec) -> Result<f64> {
    spec.check(s)?;
    Ok(digits_value(s.digits(), spec))
}

/// [`rho_value`] for raw digits already known to be valid for `spec`.
#[inline]
pub fn digits_value(digits: &[u8], spec: &CantorSpec) -> f64 {
    let rho = spec.rho;
    left_endpoint_with(digits, spec.base(), |_| rho)
}

/// The `2^{nd}` kept intervals of stage `n`, in increasing order.
pub fn cantor_stage(spec: &CantorSpec, n: usize) -> Result<Vec<Interval>> {
    if n == 0 {
        return Err(param("stage must be at least 1"));
    }
    let bits = n * spec.d();
    if bits > MAX_STAGE_INTERVALS.trailing_zeros() as usize {
        return Err(Error::Resource(format!("stage {n} of C(rho, {}) is too large", spec.d())));
    }
    let count = 1usize << bits;
    let length = spec.stage_length(n);
    let base = spec.base();
    let mut digits = vec![0u8; n];
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let mut rest = index;
        for slot in digits.iter_mut().rev() {
            *slot = (rest % base) as u8;
            rest /= base;
        }
        let lo = digits_value(&digits, spec);
        out.push(Interval { lo, hi: lo + length });
    }
    Ok(out)
}

/// Finds the stage-`depth` kept interval containing `t`, or the first
/// connection interval (descending from the root) that contains it.
pub fn locate(t: f64, spec: &CantorSpec, depth: usize) -> Result<IntervalAddress> {
    let rho = spec.rho;
    locate_with(t, depth, spec.d(), move |_| rho)
}

/// The interval `D_n` of all Cantor points sharing the digits of `s`.
pub fn cylinder(s: &DigitString, spec: &CantorSpec) -> Result<Interval> {
    if s.is_empty() {
        return Err(Error::Precondition("cylinder of the empty string".into()));
    }
    let lo = rho_value(s, spec)?;
    Ok(Interval { lo, hi: lo + spec.stage_length(s.len()) })
}
