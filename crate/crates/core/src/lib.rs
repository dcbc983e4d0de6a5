//! Non-standard metric products.
//!
//! Given factor metric spaces `(X_i, d_i)` and a gluing function
//! `Φ: [0,∞)^n → [0,∞)`, the product set carries the candidate metric
//!
//! ```text
//! d_Φ(x, y) = Φ(d_1(x_1, y_1), ..., d_n(x_n, y_n))
//! ```
//!
//! This crate builds such products over a small catalog of factor spaces,
//! classifies `Φ` (metric-compatible, norm-induced, strictly convex norm,
//! scalar product) and verifies the consequences of each class by sampling,
//! exhaustive search on small instances and explicit witnesses: curve lengths,
//! geodesics, Busemann convexity, the CAT(0) four-point comparison and
//! Minkowski rank additivity.

// Comparisons are negated on purpose so that NaN counts as a violation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curves;
pub mod geodesics;
pub mod phi;
pub mod product;
pub mod rank;
pub mod report;
pub mod sampling;
pub mod spaces;

pub use curves::{Curve, LengthEstimate};
pub use geodesics::{Geodesic, Selector};
pub use phi::{Classification, PhiClass, PhiFunction, PsiNorm, SamplerParams};
pub use product::ProductSpace;
pub use rank::{RankRecord, RankValue};
pub use report::{ValidationReport, Verdict, Witness};
pub use spaces::{Exponent, MetricSpace, Point, SpaceProperties};

use serde::{Deserialize, Serialize};

/// Numeric tolerances shared by every check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative tolerance for distance comparisons, scaled by `max(1, magnitude)`.
    pub metric: f64,
    /// Absolute slack below 1 on the midpoint norm in the strict convexity test.
    pub strict: f64,
    /// Absolute tolerance for matching pattern distances in embedding search.
    pub embed: f64,
    /// Floor of the length tolerance `max(floor, C / 2^depth)`.
    pub length_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            metric: 1e-9,
            strict: 1e-6,
            embed: 1e-9,
            length_floor: 1e-6,
        }
    }
}

impl Tolerances {
    /// Metric tolerance at the given magnitude.
    pub fn metric_at(&self, scale: f64) -> f64 {
        self.metric * scale.abs().max(1.0)
    }

    /// Length tolerance for a subdivision depth, given the measured first-level length.
    pub fn length_at(&self, first_level: f64, depth: u32) -> f64 {
        self.length_floor.max(first_level / 2f64.powi(depth as i32))
    }
}
