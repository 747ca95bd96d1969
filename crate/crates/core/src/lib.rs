//! Hilbert-type curves built on overlapping cubes, used as drifts that keep
//! Brownian motion space filling, together with the numerical machinery that
//! checks their covering, Hölder and occupation-time properties.
//!
//! The crate is organised bottom-up:
//!
//! * [`digits`]: Cantor-set addresses and their time values.
//! * [`traversal`]: orientation maps that fix the visiting order of sub-cubes.
//! * [`curves`]: evaluation of the standard, generalized, alternate and naive
//!   curve families.
//! * [`brownian`]: reproducible Brownian paths on refinable dyadic grids.
//! * [`analysis`]: coverage, exponent, boundary-volume, occupation-time and
//!   dimension estimators.
//! * [`verify`] and [`cli`]: the suites and the command-line driver.

pub mod analysis;
pub mod brownian;
pub mod cli;
pub mod curves;
pub mod digits;
mod error;
pub mod point;
pub mod report;
pub mod rng;
pub mod traversal;
pub mod verify;

pub use error::{Error, Result};
pub use point::Point;

/// Largest supported dimension. Digits are stored as `u8`, so `2^d` must fit.
pub const MAX_DIM: usize = 6;

/// Largest number of corners of a cube of dimension [`MAX_DIM`].
pub const MAX_CORNERS: usize = 1 << MAX_DIM;

/// Library version recorded in manifests and reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if (2..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(error::param(format!("dimension {d} outside 2..={MAX_DIM}")))
    }
}
