//! `Φ`-products `(X_1 × ... × X_n, d_Φ)`.

use crate::phi::{PhiClass, PhiError, PhiFunction};
use crate::report::{ValidationReport, Witness, WorstTracker};
use crate::spaces::{LpSpace, MetricSpace, Point, SpaceError, SpaceProperties};
use crate::Tolerances;
use std::fmt;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProductError {
    #[error("a product needs at least one factor")]
    NoFactors,
    #[error("{factors} factors but phi has dimension {dimension}")]
    ArityMismatch { factors: usize, dimension: usize },
    #[error(transparent)]
    Phi(#[from] PhiError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

pub const METRIC_IDENTITY: &str = "metric-identity";
pub const METRIC_SYMMETRY: &str = "metric-symmetry";
pub const METRIC_TRIANGLE: &str = "metric-triangle";

#[derive(Clone, Debug)]
pub struct ProductSpace {
    factors: Vec<MetricSpace>,
    phi: PhiFunction,
    properties: OnceLock<SpaceProperties>,
}

impl ProductSpace {
    pub fn new(factors: Vec<MetricSpace>, phi: PhiFunction) -> Result<Self, ProductError> {
        if factors.is_empty() {
            return Err(ProductError::NoFactors);
        }
        if factors.len() != phi.dimension() {
            return Err(ProductError::ArityMismatch {
                factors: factors.len(),
                dimension: phi.dimension(),
            });
        }
        Ok(ProductSpace {
            factors,
            phi,
            properties: OnceLock::new(),
        })
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[MetricSpace] {
        &self.factors
    }

    pub fn phi(&self) -> &PhiFunction {
        &self.phi
    }

    /// `(d_1(x_1, y_1), ..., d_n(x_n, y_n))`.
    pub fn distance_vector(&self, x: &Point, y: &Point) -> Result<Vec<f64>, SpaceError> {
        let (xs, ys) = (self.parts(x)?, self.parts(y)?);
        self.factors
            .iter()
            .zip(xs.iter().zip(ys))
            .map(|(f, (a, b))| f.distance(a, b))
            .collect()
    }

    /// `d_Φ(x, y) = Φ(d_1(x_1, y_1), ..., d_n(x_n, y_n))`.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64, SpaceError> {
        let q = self.distance_vector(x, y)?;
        Ok(self.phi.eval_unchecked(&q))
    }

    pub(crate) fn distance_unchecked(&self, x: &Point, y: &Point) -> f64 {
        match (x, y) {
            (Point::Tuple(xs), Point::Tuple(ys)) => {
                let q: Vec<f64> = self
                    .factors
                    .iter()
                    .zip(xs.iter().zip(ys))
                    .map(|(f, (a, b))| f.distance_unchecked(a, b))
                    .collect();
                self.phi.eval_unchecked(&q)
            }
            _ => f64::NAN,
        }
    }

    fn parts<'a>(&self, x: &'a Point) -> Result<&'a [Point], SpaceError> {
        match x {
            Point::Tuple(parts) if parts.len() == self.arity() => Ok(parts),
            Point::Tuple(parts) => Err(SpaceError::DimensionMismatch {
                expected: self.arity(),
                got: parts.len(),
            }),
            other => Err(SpaceError::InvalidPoint {
                space: self.to_string(),
                reason: format!("expected a tuple, got {other:?}"),
            }),
        }
    }

    /// Properties licensed by the class of `Φ`: length and geodesic spaces
    /// are preserved by norm-induced `Φ`; unique geodesics, convexity and
    /// rank additivity need a strictly convex norm. Anything else is unknown.
    pub fn properties(&self) -> SpaceProperties {
        *self.properties.get_or_init(|| {
            let class = self.phi.class();
            let factor_props: Vec<SpaceProperties> =
                self.factors.iter().map(MetricSpace::properties).collect();
            let all = |flag: fn(&SpaceProperties) -> Option<bool>| {
                factor_props.iter().all(|p| flag(p) == Some(true))
            };
            let norm = class >= PhiClass::NormInduced;
            let strict = class >= PhiClass::StrictlyConvexNorm;
            let rank = if strict {
                factor_props.iter().map(|p| p.minkowski_rank).sum()
            } else {
                None
            };
            SpaceProperties {
                is_length_space: (norm && all(|p| p.is_length_space)).then_some(true),
                is_geodesic: (norm && all(|p| p.is_geodesic)).then_some(true),
                is_uniquely_geodesic: (strict && all(|p| p.is_uniquely_geodesic)).then_some(true),
                is_convex: (strict && all(|p| p.is_convex)).then_some(true),
                minkowski_rank: rank,
            }
        })
    }
}

impl fmt::Display for ProductSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("product[")?;
        for (i, s) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" x ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "; {}]", self.phi)
    }
}

/// `d_Φ` between two points; convenience wrapper over [`ProductSpace::distance`].
pub fn product_distance(prod: &ProductSpace, x: &Point, y: &Point) -> Result<f64, SpaceError> {
    prod.distance(x, y)
}

/// Identity of indiscernibles, symmetry and the triangle inequality on
/// `count` sampled triples of product points (radius 10 per factor).
///
/// Every fifth triple repeats a point so the zero-distance branch is exercised,
/// and every tenth moves a single factor so definiteness is probed per axis.
/// Triangle margins are `d(x,z) - d(x,y) - d(y,z)`, reported raw, checked for
/// all three rotations of the triple.
pub fn verify_metric_axioms(
    prod: &ProductSpace,
    count: usize,
    seed: u64,
    tol: &Tolerances,
) -> Vec<ValidationReport> {
    let space = MetricSpace::Product(std::sync::Arc::new(prod.clone()));
    let mut rng = crate::sampling::seeded_rng(seed);
    let mut identity = WorstTracker::new(METRIC_IDENTITY, tol.metric);
    let mut symmetry = WorstTracker::new(METRIC_SYMMETRY, tol.metric);
    let mut triangle = WorstTracker::new(METRIC_TRIANGLE, tol.metric);

    for k in 0..count {
        let x = space.sample_point(&mut rng, 10.0);
        let mut y = space.sample_point(&mut rng, 10.0);
        let mut z = space.sample_point(&mut rng, 10.0);
        match k % 10 {
            4 => y = x.clone(),
            9 => z = y.clone(),
            7 => y = replace_factor(&x, &y, (k / 10) % prod.arity()),
            _ => {}
        }
        let d = |a: &Point, b: &Point| prod.distance_unchecked(a, b);
        let pts = [&x, &y, &z];
        let witness = || {
            Witness::new()
                .with("x", x.flatten())
                .with("y", y.flatten())
                .with("z", z.flatten())
                .with("d_xy_yz_xz", vec![d(&x, &y), d(&y, &z), d(&x, &z)])
        };

        let self_dist = d(&x, &x);
        identity.observe_with(self_dist, !(self_dist.abs() <= tol.metric), witness);
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            if pts[a] != pts[b] {
                let v = d(pts[a], pts[b]);
                // `0.0 - v` rather than `-v` so a coincidence reports margin +0.
                identity.observe_with(0.0 - v, !(v > 0.0), witness);
            }
        }

        let asym = [(0, 1), (1, 2), (0, 2)]
            .iter()
            .map(|&(a, b)| (d(pts[a], pts[b]) - d(pts[b], pts[a])).abs())
            .fold(0.0, f64::max);
        symmetry.observe_scaled(asym, tol.metric_at(d(&x, &y).max(d(&x, &z))), witness);

        let (dxy, dyz, dxz) = (d(&x, &y), d(&y, &z), d(&x, &z));
        for (long, a, b) in [(dxz, dxy, dyz), (dxy, dxz, dyz), (dyz, dxy, dxz)] {
            triangle.observe_scaled(long - a - b, tol.metric_at(a + b), witness);
        }
    }
    vec![identity.finish(), symmetry.finish(), triangle.finish()]
}

fn replace_factor(x: &Point, y: &Point, index: usize) -> Point {
    match (x, y) {
        (Point::Tuple(xs), Point::Tuple(ys)) => {
            let mut parts = xs.clone();
            parts[index] = ys[index].clone();
            Point::Tuple(parts)
        }
        _ => y.clone(),
    }
}

/// The product norm `‖(v_1, ..., v_k)‖_Φ = Φ(‖v_1‖_1, ..., ‖v_k‖_k)` on a
/// product of normed spaces.
#[derive(Clone, Debug)]
pub struct NormedProduct {
    pub phi: PhiFunction,
    pub factors: Vec<LpSpace>,
}

impl NormedProduct {
    pub fn new(phi: PhiFunction, factors: Vec<LpSpace>) -> Result<Self, ProductError> {
        if factors.len() != phi.dimension() {
            return Err(ProductError::ArityMismatch {
                factors: factors.len(),
                dimension: phi.dimension(),
            });
        }
        Ok(NormedProduct { phi, factors })
    }

    pub fn norm(&self, v: &[Vec<f64>]) -> f64 {
        let q: Vec<f64> = self
            .factors
            .iter()
            .zip(v)
            .map(|(f, vi)| f.norm(vi))
            .collect();
        self.phi.eval_unchecked(&q)
    }

    /// `⟨v, w⟩_Φ = Σ Φ²(e_i) ⟨v_i, w_i⟩_i`, defined when `Φ` is induced by a
    /// scalar product and every factor is a weighted Euclidean space.
    pub fn inner_product(&self, v: &[Vec<f64>], w: &[Vec<f64>]) -> Result<f64, ProductError> {
        let scale = crate::phi::induced_scalar_product(&self.phi)?;
        if let Some(f) = self
            .factors
            .iter()
            .find(|f| f.exponent != crate::spaces::Exponent::Finite(2.0))
        {
            return Err(SpaceError::InvalidSpace(format!(
                "factor with p = {} carries no scalar product",
                f.exponent
            ))
            .into());
        }
        Ok(self
            .factors
            .iter()
            .zip(scale)
            .zip(v.iter().zip(w))
            .map(|((f, s), (a, b))| {
                s * f
                    .weights
                    .iter()
                    .zip(a.iter().zip(b))
                    .map(|(wk, (x, y))| wk * x * y)
                    .sum::<f64>()
            })
            .sum())
    }
}
