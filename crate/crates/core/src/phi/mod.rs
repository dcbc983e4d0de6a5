//! Gluing functions `Φ: Qⁿ → [0, ∞)` on the quadrant `Qⁿ = [0, ∞)ⁿ`, their
//! sign-symmetrization `Ψ(x) = Φ(|x_1|, ..., |x_n|)` on `Rⁿ`, and the
//! classification of `Φ` by the conditions it satisfies.

mod classify;
mod conditions;

pub use classify::{classify_phi, induced_scalar_product, Classification, PhiClass};
pub use conditions::{
    check_condition_5, check_condition_a, check_condition_b, check_conditions_1_to_4,
    check_strict_convexity, condition_5_defect, condition_b_excess, SamplerParams, CONDITION_5,
    CONDITION_A, CONDITION_B, HOMOGENEITY, MONOTONICITY, POSITIVITY, STRICT_CONVEXITY,
    SUBADDITIVITY,
};

use crate::spaces::Exponent;
use std::fmt;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhiError {
    #[error("expected a quadrant vector of length {expected}, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("quadrant vectors have nonnegative components, got {value} at index {index}")]
    NegativeComponent { index: usize, value: f64 },
    #[error("phi returned {value}, not a finite nonnegative real")]
    InvalidValue { value: f64 },
    #[error("invalid phi: {0}")]
    Invalid(String),
    #[error("phi is {class}, not induced by a scalar product")]
    NotScalarProduct { class: PhiClass },
}

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A black-box gluing function with a display name.
#[derive(Clone)]
pub struct CustomPhi {
    pub name: String,
    eval: Evaluator,
}

impl fmt::Debug for CustomPhi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPhi")
            .field("name", &self.name)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum PhiKind {
    /// `(Σ w_i q_i^p)^(1/p)`, or `max_i w_i q_i` for `p = ∞`.
    WeightedLp {
        exponent: Exponent,
        weights: Vec<f64>,
    },
    /// `sqrt(Σ w_i q_i²)`.
    WeightedEuclidean {
        weights: Vec<f64>,
    },
    Sum,
    Max,
    /// `Φ(0) = 0`, `Φ(q) = 1` when `max q ≤ 1`, otherwise `2`.
    TwoValued,
    Custom(CustomPhi),
}

#[derive(Clone, Debug)]
pub struct PhiFunction {
    dimension: usize,
    kind: PhiKind,
    classification: OnceLock<Arc<Classification>>,
}

impl PhiFunction {
    fn build(dimension: usize, kind: PhiKind) -> Result<Self, PhiError> {
        if dimension == 0 {
            return Err(PhiError::Invalid("dimension must be at least 1".into()));
        }
        Ok(PhiFunction {
            dimension,
            kind,
            classification: OnceLock::new(),
        })
    }

    /// Weighted `ℓ^p` gluing. `p = 2` is normalized to [`PhiFunction::weighted_euclidean`].
    pub fn weighted_lp(exponent: Exponent, weights: Vec<f64>) -> Result<Self, PhiError> {
        exponent.validate().map_err(PhiError::Invalid)?;
        check_weights(&weights)?;
        if exponent == Exponent::Finite(2.0) {
            return Self::weighted_euclidean(weights);
        }
        Self::build(weights.len(), PhiKind::WeightedLp { exponent, weights })
    }

    pub fn lp(n: usize, p: f64) -> Result<Self, PhiError> {
        Self::weighted_lp(Exponent::Finite(p), vec![1.0; n])
    }

    pub fn weighted_euclidean(weights: Vec<f64>) -> Result<Self, PhiError> {
        check_weights(&weights)?;
        Self::build(weights.len(), PhiKind::WeightedEuclidean { weights })
    }

    pub fn euclidean(n: usize) -> Result<Self, PhiError> {
        Self::weighted_euclidean(vec![1.0; n])
    }

    pub fn sum(n: usize) -> Result<Self, PhiError> {
        Self::build(n, PhiKind::Sum)
    }

    pub fn max(n: usize) -> Result<Self, PhiError> {
        Self::build(n, PhiKind::Max)
    }

    pub fn two_valued(n: usize) -> Result<Self, PhiError> {
        Self::build(n, PhiKind::TwoValued)
    }

    pub fn custom(
        n: usize,
        name: impl Into<String>,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, PhiError> {
        Self::build(
            n,
            PhiKind::Custom(CustomPhi {
                name: name.into(),
                eval: Arc::new(eval),
            }),
        )
    }

    /// `Φ(q) = q_index ^ exponent`, a convenient family of broken gluing functions.
    pub fn coordinate_power(n: usize, index: usize, exponent: f64) -> Result<Self, PhiError> {
        if index >= n {
            return Err(PhiError::Invalid(format!(
                "coordinate {index} out of range for n = {n}"
            )));
        }
        Self::custom(n, format!("q[{index}]^{exponent}"), move |q| {
            q[index].powf(exponent)
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kind(&self) -> &PhiKind {
        &self.kind
    }

    pub fn is_custom(&self) -> bool {
        matches!(self.kind, PhiKind::Custom(_))
    }

    /// `Φ(q)`, validating that `q ∈ Qⁿ` and that the value is finite and nonnegative.
    pub fn eval(&self, q: &[f64]) -> Result<f64, PhiError> {
        if q.len() != self.dimension {
            return Err(PhiError::WrongLength {
                expected: self.dimension,
                got: q.len(),
            });
        }
        if let Some((index, &value)) = q.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(PhiError::NegativeComponent { index, value });
        }
        let value = self.eval_unchecked(q);
        if !(value.is_finite() && value >= 0.0) {
            return Err(PhiError::InvalidValue { value });
        }
        Ok(value)
    }

    /// `Φ(q)` without validation; `q` must have length `n` and lie in the quadrant.
    pub fn eval_unchecked(&self, q: &[f64]) -> f64 {
        match &self.kind {
            PhiKind::WeightedLp { exponent, weights } => {
                exponent.aggregate(weights, q.iter().copied())
            }
            PhiKind::WeightedEuclidean { weights } => weights
                .iter()
                .zip(q)
                .map(|(w, x)| w * x * x)
                .sum::<f64>()
                .sqrt(),
            PhiKind::Sum => q.iter().sum(),
            PhiKind::Max => q.iter().copied().fold(0.0, f64::max),
            PhiKind::TwoValued => {
                if q.iter().all(|&x| x == 0.0) {
                    0.0
                } else if q.iter().all(|&x| x <= 1.0) {
                    1.0
                } else {
                    2.0
                }
            }
            PhiKind::Custom(c) => (c.eval)(q),
        }
    }

    /// `Φ(e_i)`.
    pub fn axis_value(&self, i: usize) -> f64 {
        let mut e = vec![0.0; self.dimension];
        e[i] = 1.0;
        self.eval_unchecked(&e)
    }

    /// Classification under the default sampler, computed once and cached.
    pub fn classification(&self) -> Arc<Classification> {
        self.classification
            .get_or_init(|| Arc::new(classify_phi(self, &SamplerParams::default())))
            .clone()
    }

    pub fn class(&self) -> PhiClass {
        self.classification().class
    }

    pub fn psi(&self) -> PsiNorm {
        PsiNorm { phi: self.clone() }
    }
}

impl fmt::Display for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PhiKind::WeightedLp { exponent, weights } => {
                write!(f, "weighted-lp(p={exponent}, w={weights:?})")
            }
            PhiKind::WeightedEuclidean { weights } => {
                write!(f, "weighted-euclidean(w={weights:?})")
            }
            PhiKind::Sum => write!(f, "sum(n={})", self.dimension),
            PhiKind::Max => write!(f, "max(n={})", self.dimension),
            PhiKind::TwoValued => write!(f, "two-valued(n={})", self.dimension),
            PhiKind::Custom(c) => write!(f, "custom({}, n={})", c.name, self.dimension),
        }
    }
}

fn check_weights(weights: &[f64]) -> Result<(), PhiError> {
    if weights.is_empty() {
        return Err(PhiError::Invalid("at least one weight is required".into()));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(PhiError::Invalid(format!(
            "weights must be positive, got {weights:?}"
        )));
    }
    Ok(())
}

/// `Ψ(x) = Φ(|x_1|, ..., |x_n|)` on all of `Rⁿ`.
#[derive(Clone, Debug)]
pub struct PsiNorm {
    phi: PhiFunction,
}

impl PsiNorm {
    pub fn new(phi: PhiFunction) -> Self {
        PsiNorm { phi }
    }

    pub fn phi(&self) -> &PhiFunction {
        &self.phi
    }

    pub fn dimension(&self) -> usize {
        self.phi.dimension
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, PhiError> {
        let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        self.phi.eval(&abs)
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        self.phi.eval_unchecked(&abs)
    }
}
