//! Numerical checks of the covering, exponent, boundary-collar, occupation
//! and dimension properties of the curves, at desk scale.

mod coverage;
mod dimension;
mod holder;
mod lemma;
mod occupation;
mod overlap;
mod stats;

use serde::{Deserialize, Serialize};

pub use coverage::{coverage_check, separation_check, shifted_cell, witness_points, CoverageReport, SeparationReport};
pub use dimension::{box_counts, box_dimension, DimensionFit};
pub use holder::{endpoint_samples, holder_estimate, reverse_holder_witness, HolderFit, ReverseHolderWitness};
pub use lemma::{
    boundary_volume, good_set_measure, good_set_measure_exact, good_set_membership, reverse_holder_pairs,
    GoodSetEstimate, PairCheck, VolumeEstimate,
};
pub use occupation::{hitting_scaling, occupation_time, MomentParams, MomentReport, OccupationGrid, SecondMomentSplit};
pub use overlap::{
    containment_check, min_overlap_level, mixed_overlap_check, overlap_margin, ContainmentReport, OverlapScan,
};
pub use stats::{
    chi_square_uniform, fit_line, mean_se, measure_preservation_test, measure_preservation_with, pairwise_sum,
    ChiSquareResult, LineFit, MeanSe,
};

/// Which perturbed curve is examined: `B_t - f(t)` or `f(t) + h(t)` with
/// `h = B`. The two differ by a reflection of the curve and a recentering.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    #[default]
    PathMinusCurve,
    CurvePlusPath,
}

impl SignConvention {
    /// Combines a path value and a curve value.
    #[inline]
    pub fn combine(self, b: &crate::Point, g: &crate::Point) -> crate::Point {
        match self {
            SignConvention::PathMinusCurve => b.sub(g),
            SignConvention::CurvePlusPath => g.add(b),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SignConvention::PathMinusCurve => "path_minus_curve",
            SignConvention::CurvePlusPath => "curve_plus_path",
        }
    }
}

impl std::str::FromStr for SignConvention {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "path_minus_curve" | "b-g" | "B-G" => Ok(SignConvention::PathMinusCurve),
            "curve_plus_path" | "g+h" | "G+h" => Ok(SignConvention::CurvePlusPath),
            _ => Err(crate::error::param(format!("unknown sign convention {s:?}"))),
        }
    }
}
