use super::conditions::{
    check_condition_5, check_condition_a, check_condition_b, check_conditions_1_to_4,
    strict_convexity_unchecked, STRICT_CONVEXITY,
};
use super::{PhiError, PhiFunction, SamplerParams};
use crate::report::ValidationReport;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Position of `Φ` on the ladder of product-preservation classes.
///
/// Ordered from weakest to strongest, so `class >= PhiClass::NormInduced`
/// reads as "at least induced by a norm".
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiClass {
    /// Fails (A) or (B): `d_Φ` is not a metric for some choice of factors.
    NotAMetricProduct,
    /// (A) and (B) only: a metric, but length spaces are not preserved.
    MetricCompatible,
    /// (1)-(4): `Ψ` is a norm; length and geodesic spaces are preserved.
    NormInduced,
    /// Norm with strictly convex ball; unique geodesics and Busemann convexity preserved.
    StrictlyConvexNorm,
    /// (1)-(5): `Ψ` comes from a scalar product; curvature bounds preserved.
    ScalarProductInduced,
}

impl fmt::Display for PhiClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhiClass::NotAMetricProduct => "not-a-metric-product",
            PhiClass::MetricCompatible => "metric-compatible",
            PhiClass::NormInduced => "norm-induced",
            PhiClass::StrictlyConvexNorm => "strictly-convex-norm",
            PhiClass::ScalarProductInduced => "scalar-product-induced",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: PhiClass,
    /// Reports in order: A, B, (1), (2), (3), (4), strict convexity, (5).
    pub reports: Vec<ValidationReport>,
}

impl Classification {
    pub fn report(&self, condition: &str) -> Option<&ValidationReport> {
        self.reports.iter().find(|r| r.condition == condition)
    }
}

/// Highest class supported by the sampled reports.
pub fn classify_phi(phi: &PhiFunction, params: &SamplerParams) -> Classification {
    let a = check_condition_a(phi, params);
    let b = check_condition_b(phi, params);
    let norm = check_conditions_1_to_4(phi, params);
    let is_norm = norm.iter().all(ValidationReport::passed);
    let strict = if is_norm {
        strict_convexity_unchecked(&phi.psi(), params)
    } else {
        ValidationReport::undetermined(STRICT_CONVEXITY, "conditions (1)-(4) did not all pass")
    };
    let orth = check_condition_5(phi, params);

    let class = if !(a.passed() && b.passed()) {
        PhiClass::NotAMetricProduct
    } else if !is_norm {
        PhiClass::MetricCompatible
    } else if !strict.passed() {
        PhiClass::NormInduced
    } else if !orth.passed() {
        PhiClass::StrictlyConvexNorm
    } else {
        PhiClass::ScalarProductInduced
    };

    let mut reports = vec![a, b];
    reports.extend(norm);
    reports.push(strict);
    reports.push(orth);
    Classification { class, reports }
}

/// Weights `(Φ²(e_1), ..., Φ²(e_n))` of the induced scalar product
/// `⟨v, w⟩_Φ = Σ Φ²(e_i) ⟨v_i, w_i⟩_i`.
pub fn induced_scalar_product(phi: &PhiFunction) -> Result<Vec<f64>, PhiError> {
    let class = phi.class();
    if class != PhiClass::ScalarProductInduced {
        return Err(PhiError::NotScalarProduct { class });
    }
    Ok((0..phi.dimension())
        .map(|i| phi.axis_value(i).powi(2))
        .collect())
}
