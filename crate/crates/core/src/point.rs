use std::ops::{Index, IndexMut};

use crate::MAX_DIM;

/// A point of `R^d` for `d <= MAX_DIM`, stored inline.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: u8,
}

impl Point {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        Point { coords: [0.0; MAX_DIM], dim: dim as u8 }
    }

    pub fn splat(dim: usize, value: f64) -> Self {
        let mut p = Point::zeros(dim);
        p.as_mut_slice().fill(value);
        p
    }

    pub fn from_slice(values: &[f64]) -> Self {
        let mut p = Point::zeros(values.len());
        p.as_mut_slice().copy_from_slice(values);
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coords[..self.dim as usize]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.as_slice().to_vec()
    }

    #[inline]
    pub fn add(&self, other: &Point) -> Point {
        let mut out = *self;
        for (o, b) in out.as_mut_slice().iter_mut().zip(other.as_slice()) {
            *o += b;
        }
        out
    }

    #[inline]
    pub fn sub(&self, other: &Point) -> Point {
        let mut out = *self;
        for (o, b) in out.as_mut_slice().iter_mut().zip(other.as_slice()) {
            *o -= b;
        }
        out
    }

    #[inline]
    pub fn scale(&self, k: f64) -> Point {
        let mut out = *self;
        for o in out.as_mut_slice() {
            *o *= k;
        }
        out
    }

    /// Euclidean distance.
    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        self.as_slice().iter().zip(other.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// Maximum-norm distance.
    #[inline]
    pub fn sup_dist(&self, other: &Point) -> f64 {
        self.as_slice().iter().zip(other.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.as_slice().iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl IndexMut<usize> for Point {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.as_mut_slice()[i]
    }
}

impl std::fmt::Debug for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}
