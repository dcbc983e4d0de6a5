//! Factor metric spaces and their points.
//!
//! The catalog is restricted to spaces whose geodesics and Minkowski ranks are
//! known in closed form: the real line, the half-line `[0, ∞)`, weighted
//! `ℓ^p` spaces, discrete spaces, spaces given by a distance matrix, and
//! `Φ`-products of any of these.

use crate::product::ProductSpace;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index {index} out of range for a space with {size} points")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("point does not belong to {space}: {reason}")]
    InvalidPoint { space: String, reason: String },
    #[error("invalid space: {0}")]
    InvalidSpace(String),
}

/// Exponent `p ∈ [1, ∞]` of an `ℓ^p` space or a weighted-`ℓ^p` gluing function.
///
/// Serialized as a number, or as the string `"inf"` for `p = ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            Exponent::Finite(p) if !(p.is_finite() && p >= 1.0) => {
                Err(format!("exponent must lie in [1, inf], got {p}"))
            }
            _ => Ok(()),
        }
    }

    /// `1 < p < ∞`, the range with strictly convex unit balls.
    pub fn is_strictly_convex(&self) -> bool {
        matches!(*self, Exponent::Finite(p) if p > 1.0)
    }

    /// Weighted `p`-mean style aggregate `(Σ w_i a_i^p)^(1/p)`, or `max w_i a_i` for `p = ∞`.
    pub(crate) fn aggregate(&self, weights: &[f64], values: impl Iterator<Item = f64>) -> f64 {
        match *self {
            Exponent::Infinity => weights
                .iter()
                .zip(values)
                .map(|(w, a)| w * a)
                .fold(0.0, f64::max),
            Exponent::Finite(1.0) => weights.iter().zip(values).map(|(w, a)| w * a).sum(),
            Exponent::Finite(2.0) => weights
                .iter()
                .zip(values)
                .map(|(w, a)| w * a * a)
                .sum::<f64>()
                .sqrt(),
            Exponent::Finite(p) => {
                // Factor out the largest term so large or tiny inputs stay finite.
                let terms: Vec<(f64, f64)> = weights.iter().copied().zip(values).collect();
                let scale = terms.iter().map(|&(_, a)| a).fold(0.0, f64::max);
                if scale == 0.0 {
                    return 0.0;
                }
                let sum: f64 = terms.iter().map(|&(w, a)| w * (a / scale).powf(p)).sum();
                scale * sum.powf(1.0 / p)
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(Exponent::Finite(p)),
            Raw::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => {
                Ok(Exponent::Infinity)
            }
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "exponent must be a number or \"inf\", got {s:?}"
            ))),
        }
    }
}

/// A point of a catalog space.
///
/// Continuous spaces use coordinate vectors (length 1 for the line and
/// half-line), discrete and finite spaces use an index, products use one
/// point per factor.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Coords(Vec<f64>),
    Index(usize),
    Tuple(Vec<Point>),
}

impl Point {
    pub fn scalar(x: f64) -> Self {
        Point::Coords(vec![x])
    }

    /// A product point whose factors are all one-dimensional.
    pub fn scalars(xs: &[f64]) -> Self {
        Point::Tuple(xs.iter().map(|&x| Point::scalar(x)).collect())
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Coords(c) => Some(c),
            _ => None,
        }
    }

    pub fn factors(&self) -> Option<&[Point]> {
        match self {
            Point::Tuple(f) => Some(f),
            _ => None,
        }
    }

    /// All numeric content in depth-first order (indices as reals).
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.flatten_into(&mut out);
        out
    }

    fn flatten_into(&self, out: &mut Vec<f64>) {
        match self {
            Point::Coords(c) => out.extend_from_slice(c),
            Point::Index(i) => out.push(*i as f64),
            Point::Tuple(f) => f.iter().for_each(|p| p.flatten_into(out)),
        }
    }

    /// Coordinatewise affine interpolation `(1-t) a + t b`. Undefined for indices.
    pub fn lerp(a: &Point, b: &Point, t: f64) -> Option<Point> {
        match (a, b) {
            (Point::Coords(x), Point::Coords(y)) if x.len() == y.len() => Some(Point::Coords(
                x.iter()
                    .zip(y)
                    .map(|(&u, &v)| if t == 1.0 { v } else { u + t * (v - u) })
                    .collect(),
            )),
            (Point::Tuple(x), Point::Tuple(y)) if x.len() == y.len() => x
                .iter()
                .zip(y)
                .map(|(u, v)| Point::lerp(u, v, t))
                .collect::<Option<Vec<_>>>()
                .map(Point::Tuple),
            _ => None,
        }
    }
}

/// A finite metric space given by its distance matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct FiniteMetric {
    matrix: Vec<Vec<f64>>,
}

impl FiniteMetric {
    /// Validates squareness, symmetry, zero diagonal, positivity off the
    /// diagonal, and the triangle inequality on every triple.
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self, SpaceError> {
        let n = matrix.len();
        if n == 0 {
            return Err(SpaceError::InvalidSpace("empty distance matrix".into()));
        }
        let tol = crate::Tolerances::default();
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(SpaceError::InvalidSpace(format!(
                    "row {i} has length {} in a {n}x{n} matrix",
                    row.len()
                )));
            }
            if row[i] != 0.0 {
                return Err(SpaceError::InvalidSpace(format!(
                    "nonzero diagonal entry at {i}"
                )));
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(SpaceError::InvalidSpace(format!("entry ({i},{j}) = {d}")));
                }
                if i != j && d == 0.0 {
                    return Err(SpaceError::InvalidSpace(format!(
                        "distinct points {i} and {j} at distance 0"
                    )));
                }
                if (d - matrix[j][i]).abs() > tol.metric_at(d) {
                    return Err(SpaceError::InvalidSpace(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let bound = matrix[i][k] + matrix[k][j];
                    if matrix[i][j] > bound + tol.metric_at(bound) {
                        return Err(SpaceError::InvalidSpace(format!(
                            "triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"
                        )));
                    }
                }
            }
        }
        Ok(FiniteMetric { matrix })
    }

    pub fn len(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i][j]
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    /// The pattern obtained by relabeling point `i` as `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> FiniteMetric {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                m[perm[i]][perm[j]] = self.matrix[i][j];
            }
        }
        FiniteMetric { matrix: m }
    }
}

impl TryFrom<Vec<Vec<f64>>> for FiniteMetric {
    type Error = SpaceError;
    fn try_from(m: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        FiniteMetric::new(m)
    }
}

impl From<FiniteMetric> for Vec<Vec<f64>> {
    fn from(f: FiniteMetric) -> Self {
        f.matrix
    }
}

/// `R^m` with the weighted `ℓ^p` distance `(Σ w_i |x_i - y_i|^p)^(1/p)`
/// (`max_i w_i |x_i - y_i|` when `p = ∞`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSpace {
    pub dimension: usize,
    pub exponent: Exponent,
    pub weights: Vec<f64>,
}

impl LpSpace {
    pub fn new(
        dimension: usize,
        exponent: Exponent,
        weights: Vec<f64>,
    ) -> Result<Self, SpaceError> {
        if dimension == 0 {
            return Err(SpaceError::InvalidSpace(
                "lp dimension must be at least 1".into(),
            ));
        }
        exponent.validate().map_err(SpaceError::InvalidSpace)?;
        if weights.len() != dimension {
            return Err(SpaceError::InvalidSpace(format!(
                "{} weights for dimension {dimension}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(SpaceError::InvalidSpace(
                "lp weights must be positive".into(),
            ));
        }
        Ok(LpSpace {
            dimension,
            exponent,
            weights,
        })
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        self.exponent
            .aggregate(&self.weights, v.iter().map(|x| x.abs()))
    }

    /// Length of the `i`-th unit coordinate vector.
    pub fn axis_scale(&self, i: usize) -> f64 {
        match self.exponent {
            Exponent::Infinity => self.weights[i],
            Exponent::Finite(p) => self.weights[i].powf(1.0 / p),
        }
    }
}

/// Declared structural properties of a space. `None` means unknown.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceProperties {
    pub is_length_space: Option<bool>,
    pub is_geodesic: Option<bool>,
    pub is_uniquely_geodesic: Option<bool>,
    pub is_convex: Option<bool>,
    pub minkowski_rank: Option<usize>,
}

impl SpaceProperties {
    fn known(length: bool, geodesic: bool, unique: bool, convex: bool, rank: usize) -> Self {
        SpaceProperties {
            is_length_space: Some(length),
            is_geodesic: Some(geodesic),
            is_uniquely_geodesic: Some(unique),
            is_convex: Some(convex),
            minkowski_rank: Some(rank),
        }
    }

    /// `uniquely geodesic ⇒ geodesic ⇒ length space`, and convex spaces are geodesic.
    pub fn is_consistent(&self) -> bool {
        let implies = |a: Option<bool>, b: Option<bool>| !(a == Some(true) && b == Some(false));
        implies(self.is_uniquely_geodesic, self.is_geodesic)
            && implies(self.is_geodesic, self.is_length_space)
            && implies(self.is_convex, self.is_geodesic)
    }
}

#[derive(Clone, Debug)]
pub enum MetricSpace {
    RealLine,
    HalfLine,
    Lp(LpSpace),
    Discrete { points: usize },
    Finite(FiniteMetric),
    Product(Arc<ProductSpace>),
}

impl fmt::Display for MetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSpace::RealLine => f.write_str("line"),
            MetricSpace::HalfLine => f.write_str("half-line"),
            MetricSpace::Lp(lp) => write!(f, "lp({}, p={})", lp.dimension, lp.exponent),
            MetricSpace::Discrete { points } => write!(f, "discrete({points})"),
            MetricSpace::Finite(m) => write!(f, "finite({})", m.len()),
            MetricSpace::Product(p) => write!(f, "{p}"),
        }
    }
}

impl MetricSpace {
    pub fn lp(dimension: usize, p: f64) -> Result<Self, SpaceError> {
        LpSpace::new(dimension, Exponent::Finite(p), vec![1.0; dimension]).map(MetricSpace::Lp)
    }

    pub fn lp_inf(dimension: usize) -> Result<Self, SpaceError> {
        LpSpace::new(dimension, Exponent::Infinity, vec![1.0; dimension]).map(MetricSpace::Lp)
    }

    pub fn discrete(points: usize) -> Result<Self, SpaceError> {
        if points == 0 {
            return Err(SpaceError::InvalidSpace(
                "discrete space needs a point".into(),
            ));
        }
        Ok(MetricSpace::Discrete { points })
    }

    pub fn finite(matrix: Vec<Vec<f64>>) -> Result<Self, SpaceError> {
        FiniteMetric::new(matrix).map(MetricSpace::Finite)
    }

    pub fn product(product: ProductSpace) -> Self {
        MetricSpace::Product(Arc::new(product))
    }

    pub fn as_product(&self) -> Option<&ProductSpace> {
        match self {
            MetricSpace::Product(p) => Some(p),
            _ => None,
        }
    }

    /// Whether points carry real coordinates all the way down.
    pub fn is_continuous(&self) -> bool {
        match self {
            MetricSpace::RealLine | MetricSpace::HalfLine | MetricSpace::Lp(_) => true,
            MetricSpace::Discrete { .. } | MetricSpace::Finite(_) => false,
            MetricSpace::Product(p) => p.factors().iter().all(MetricSpace::is_continuous),
        }
    }

    pub fn properties(&self) -> SpaceProperties {
        match self {
            MetricSpace::RealLine => SpaceProperties::known(true, true, true, true, 1),
            MetricSpace::HalfLine => SpaceProperties::known(true, true, true, true, 0),
            MetricSpace::Lp(lp) => {
                let strict = lp.dimension == 1 || lp.exponent.is_strictly_convex();
                SpaceProperties::known(true, true, strict, strict, lp.dimension)
            }
            MetricSpace::Discrete { points } => {
                let single = *points == 1;
                SpaceProperties::known(single, single, single, single, 0)
            }
            MetricSpace::Finite(m) => {
                let single = m.len() == 1;
                SpaceProperties::known(single, single, single, single, 0)
            }
            MetricSpace::Product(p) => p.properties(),
        }
    }

    pub fn validate_point(&self, x: &Point) -> Result<(), SpaceError> {
        let invalid = |reason: String| SpaceError::InvalidPoint {
            space: self.to_string(),
            reason,
        };
        match (self, x) {
            (MetricSpace::RealLine | MetricSpace::HalfLine, Point::Coords(c)) => {
                if c.len() != 1 {
                    return Err(SpaceError::DimensionMismatch {
                        expected: 1,
                        got: c.len(),
                    });
                }
                if !c[0].is_finite() {
                    return Err(invalid(format!("non-finite coordinate {}", c[0])));
                }
                if matches!(self, MetricSpace::HalfLine) && c[0] < 0.0 {
                    return Err(invalid(format!("negative coordinate {}", c[0])));
                }
                Ok(())
            }
            (MetricSpace::Lp(lp), Point::Coords(c)) => {
                if c.len() != lp.dimension {
                    return Err(SpaceError::DimensionMismatch {
                        expected: lp.dimension,
                        got: c.len(),
                    });
                }
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("non-finite coordinate".into()));
                }
                Ok(())
            }
            (MetricSpace::Discrete { points: size }, Point::Index(i)) => check_index(*i, *size),
            (MetricSpace::Finite(m), Point::Index(i)) => check_index(*i, m.len()),
            (MetricSpace::Product(p), Point::Tuple(parts)) => {
                if parts.len() != p.arity() {
                    return Err(SpaceError::DimensionMismatch {
                        expected: p.arity(),
                        got: parts.len(),
                    });
                }
                p.factors()
                    .iter()
                    .zip(parts)
                    .try_for_each(|(space, part)| space.validate_point(part))
            }
            _ => Err(invalid(format!("wrong point kind {x:?}"))),
        }
    }

    /// The distance `d(x, y)`.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64, SpaceError> {
        match self {
            MetricSpace::Product(p) => p.distance(x, y),
            _ => {
                self.validate_point(x)?;
                self.validate_point(y)?;
                Ok(self.distance_unchecked(x, y))
            }
        }
    }

    /// Distance for points already known to be valid.
    pub(crate) fn distance_unchecked(&self, x: &Point, y: &Point) -> f64 {
        match (self, x, y) {
            (MetricSpace::RealLine | MetricSpace::HalfLine, Point::Coords(a), Point::Coords(b)) => {
                (a[0] - b[0]).abs()
            }
            (MetricSpace::Lp(lp), Point::Coords(a), Point::Coords(b)) => lp
                .exponent
                .aggregate(&lp.weights, a.iter().zip(b).map(|(u, v)| (u - v).abs())),
            (MetricSpace::Discrete { .. }, Point::Index(i), Point::Index(j)) => {
                if i == j {
                    0.0
                } else {
                    1.0
                }
            }
            (MetricSpace::Finite(m), Point::Index(i), Point::Index(j)) => m.get(*i, *j),
            (MetricSpace::Product(p), _, _) => p.distance_unchecked(x, y),
            _ => f64::NAN,
        }
    }

    /// Draws one point within `radius` of the origin (of index 0 for finite carriers).
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R, radius: f64) -> Point {
        match self {
            MetricSpace::RealLine => Point::scalar(rng.gen_range(-radius..=radius)),
            MetricSpace::HalfLine => Point::scalar(rng.gen_range(0.0..=radius)),
            MetricSpace::Lp(lp) => {
                let mut v: Vec<f64> = (0..lp.dimension)
                    .map(|_| rng.gen_range(-radius..=radius))
                    .collect();
                let n = lp.norm(&v);
                if n > radius {
                    v.iter_mut().for_each(|x| *x *= radius / n);
                }
                Point::Coords(v)
            }
            MetricSpace::Discrete { points } => Point::Index(rng.gen_range(0..*points)),
            MetricSpace::Finite(m) => Point::Index(rng.gen_range(0..m.len())),
            MetricSpace::Product(p) => Point::Tuple(
                p.factors()
                    .iter()
                    .map(|f| f.sample_point(rng, radius))
                    .collect(),
            ),
        }
    }

    /// A point at distance at most `radius` from `x`, drawn at random.
    /// Finite carriers return `x` unchanged.
    pub fn perturb<R: Rng + ?Sized>(&self, x: &Point, radius: f64, rng: &mut R) -> Point {
        match (self, x) {
            (MetricSpace::RealLine, Point::Coords(c)) => {
                Point::scalar(c[0] + rng.gen_range(-radius..=radius))
            }
            (MetricSpace::HalfLine, Point::Coords(c)) => {
                Point::scalar((c[0] + rng.gen_range(-radius..=radius)).max(0.0))
            }
            (MetricSpace::Lp(lp), Point::Coords(c)) => {
                let mut v: Vec<f64> = (0..lp.dimension)
                    .map(|_| rng.gen_range(-1.0..=1.0))
                    .collect();
                let n = lp.norm(&v);
                let r = rng.gen_range(0.0..=radius);
                if n > 0.0 {
                    v.iter_mut().for_each(|x| *x *= r / n);
                }
                Point::Coords(c.iter().zip(&v).map(|(a, b)| a + b).collect())
            }
            (MetricSpace::Product(p), Point::Tuple(parts)) => Point::Tuple(
                p.factors()
                    .iter()
                    .zip(parts)
                    .map(|(f, part)| f.perturb(part, radius, rng))
                    .collect(),
            ),
            _ => x.clone(),
        }
    }

    /// Points at distance exactly `radius` from `x` along each coordinate axis,
    /// in both directions (half-line offsets are clamped at 0). Products move
    /// one factor at a time.
    pub fn axis_offsets(&self, x: &Point, radius: f64) -> Vec<Point> {
        match (self, x) {
            (MetricSpace::RealLine, Point::Coords(c)) => {
                vec![Point::scalar(c[0] + radius), Point::scalar(c[0] - radius)]
            }
            (MetricSpace::HalfLine, Point::Coords(c)) => vec![
                Point::scalar(c[0] + radius),
                Point::scalar((c[0] - radius).max(0.0)),
            ],
            (MetricSpace::Lp(lp), Point::Coords(c)) => (0..lp.dimension)
                .flat_map(|i| {
                    let step = radius / lp.axis_scale(i);
                    [step, -step].into_iter().map(move |s| {
                        let mut v = c.clone();
                        v[i] += s;
                        Point::Coords(v)
                    })
                })
                .collect(),
            (MetricSpace::Product(p), Point::Tuple(parts)) => p
                .factors()
                .iter()
                .enumerate()
                .flat_map(|(i, f)| {
                    f.axis_offsets(&parts[i], radius)
                        .into_iter()
                        .map(move |moved| {
                            let mut v = parts.clone();
                            v[i] = moved;
                            Point::Tuple(v)
                        })
                })
                .collect(),
            _ => Vec::new(),
        }
    }
}

fn check_index(i: usize, size: usize) -> Result<(), SpaceError> {
    if i < size {
        Ok(())
    } else {
        Err(SpaceError::IndexOutOfRange { index: i, size })
    }
}

/// `count` seed-deterministic points within `radius` of the space's origin.
pub fn sample_points(
    space: &MetricSpace,
    count: usize,
    seed: u64,
    radius: f64,
) -> Result<Vec<Point>, SpaceError> {
    if count == 0 {
        return Err(SpaceError::InvalidSpace(
            "sample count must be at least 1".into(),
        ));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(SpaceError::InvalidSpace(format!(
            "sampling radius must be positive, got {radius}"
        )));
    }
    let mut rng = crate::sampling::seeded_rng(seed);
    Ok((0..count)
        .map(|_| space.sample_point(&mut rng, radius))
        .collect())
}
