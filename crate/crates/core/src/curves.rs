//! Curves on `[0, 1]` and their length as a supremum over subdivisions.
//!
//! Lengths are estimated on uniform dyadic subdivisions: `L_N` is the sum of
//! the `N` chord distances at `t_j = j / N`. By the triangle inequality the
//! trace `L_1, L_2, L_4, ...` is nondecreasing and bounded by the length.

use crate::phi::{PhiClass, PhiFunction};
use crate::product::ProductSpace;
use crate::report::{ValidationReport, Witness, WorstTracker};
use crate::spaces::{MetricSpace, Point, SpaceError};
use crate::Tolerances;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub const PRODUCT_LENGTH: &str = "product-length";
pub const ARCLENGTH: &str = "arclength";
pub const NON_LENGTH_SPACE: &str = "non-length-space";

/// Deepest supported subdivision (`2^24` segments).
pub const MAX_DEPTH: u32 = 24;

/// A trace exceeding this multiple of its first nonzero entry is flagged divergent.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Relative excess of a single step chord over the mean step that still
/// counts as constant speed. Steps straddling a polyline corner are shorter
/// than the mean, which inflates every other step by `O(corners / N)`.
pub const SPEED_SLACK: f64 = 1e-2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("invalid curve: {0}")]
    Invalid(String),
    #[error("subdivision depth must lie in 1..={MAX_DEPTH}, got {0}")]
    InvalidDepth(u32),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

type CurveFn = Arc<dyn Fn(f64) -> Point + Send + Sync>;

#[derive(Clone)]
pub enum CurveKind {
    /// Piecewise affine through `vertices`, reaching vertex `j` at `breakpoints[j]`.
    Polyline {
        vertices: Vec<Point>,
        breakpoints: Vec<f64>,
    },
    /// `c(t) = lerp(start, end, t^power)`; `power = 1` is the affine segment.
    Segment {
        start: Point,
        end: Point,
        power: f64,
    },
    /// Planar arc `center + radius (cos θ, sin θ)` with `θ` affine from `from` to `to`.
    CircleArc {
        center: [f64; 2],
        radius: f64,
        from: f64,
        to: f64,
    },
    /// Tuple of component curves sharing the parameter.
    Product(Vec<Curve>),
    /// `inner` on `[from, to]`, rescaled to `[0, 1]`.
    Restricted {
        inner: Box<Curve>,
        from: f64,
        to: f64,
    },
    Custom {
        name: String,
        eval: CurveFn,
    },
}

impl fmt::Debug for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveKind::Polyline {
                vertices,
                breakpoints,
            } => f
                .debug_struct("Polyline")
                .field("vertices", vertices)
                .field("breakpoints", breakpoints)
                .finish(),
            CurveKind::Segment { start, end, power } => f
                .debug_struct("Segment")
                .field("start", start)
                .field("end", end)
                .field("power", power)
                .finish(),
            CurveKind::CircleArc {
                center,
                radius,
                from,
                to,
            } => f
                .debug_struct("CircleArc")
                .field("center", center)
                .field("radius", radius)
                .field("from", from)
                .field("to", to)
                .finish(),
            CurveKind::Product(parts) => f.debug_tuple("Product").field(parts).finish(),
            CurveKind::Restricted { inner, from, to } => f
                .debug_struct("Restricted")
                .field("inner", inner)
                .field("from", from)
                .field("to", to)
                .finish(),
            CurveKind::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish(),
        }
    }
}

/// A parameterized path `c: [0, 1] → X`.
#[derive(Clone, Debug)]
pub struct Curve {
    kind: CurveKind,
}

impl Curve {
    pub fn polyline(vertices: Vec<Point>, breakpoints: Vec<f64>) -> Result<Self, CurveError> {
        if vertices.len() < 2 {
            return Err(CurveError::Invalid(
                "a polyline needs at least two vertices".into(),
            ));
        }
        if breakpoints.len() != vertices.len() {
            return Err(CurveError::Invalid(format!(
                "{} vertices but {} breakpoints",
                vertices.len(),
                breakpoints.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(CurveError::Invalid(
                "breakpoints must run from 0 to 1".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(CurveError::Invalid(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if vertices
            .windows(2)
            .any(|w| Point::lerp(&w[0], &w[1], 0.5).is_none())
        {
            return Err(CurveError::Invalid(
                "vertices cannot be interpolated".into(),
            ));
        }
        Ok(Curve {
            kind: CurveKind::Polyline {
                vertices,
                breakpoints,
            },
        })
    }

    /// Polyline with vertices at evenly spaced parameters.
    pub fn polyline_uniform(vertices: Vec<Point>) -> Result<Self, CurveError> {
        let k = vertices.len().saturating_sub(1).max(1) as f64;
        let breakpoints = (0..vertices.len()).map(|j| j as f64 / k).collect();
        Curve::polyline(vertices, breakpoints)
    }

    /// Polyline whose breakpoints are proportional to accumulated segment
    /// lengths in `space`, so it has constant speed wherever affine
    /// interpolation is a geodesic.
    pub fn constant_speed_polyline(
        space: &MetricSpace,
        vertices: Vec<Point>,
    ) -> Result<Self, CurveError> {
        let mut acc = vec![0.0];
        for w in vertices.windows(2) {
            let d = space.distance(&w[0], &w[1])?;
            if d == 0.0 {
                return Err(CurveError::Invalid("consecutive vertices coincide".into()));
            }
            acc.push(acc.last().unwrap() + d);
        }
        let total = *acc.last().unwrap();
        let mut breakpoints: Vec<f64> = acc.iter().map(|a| a / total).collect();
        *breakpoints.last_mut().unwrap() = 1.0;
        Curve::polyline(vertices, breakpoints)
    }

    pub fn segment(start: Point, end: Point) -> Result<Self, CurveError> {
        Curve::segment_with_power(start, end, 1.0)
    }

    /// Segment traversed as `t ↦ t^power`; speed is proportional to `t^(power-1)`.
    pub fn segment_with_power(start: Point, end: Point, power: f64) -> Result<Self, CurveError> {
        if !(power.is_finite() && power > 0.0) {
            return Err(CurveError::Invalid(format!(
                "segment power must be positive, got {power}"
            )));
        }
        if Point::lerp(&start, &end, 0.5).is_none() {
            return Err(CurveError::Invalid(
                "segment endpoints cannot be interpolated".into(),
            ));
        }
        Ok(Curve {
            kind: CurveKind::Segment { start, end, power },
        })
    }

    pub fn circle_arc(
        center: [f64; 2],
        radius: f64,
        from: f64,
        to: f64,
    ) -> Result<Self, CurveError> {
        if !(radius.is_finite() && radius >= 0.0) || !from.is_finite() || !to.is_finite() {
            return Err(CurveError::Invalid(
                "arc parameters must be finite, radius nonnegative".into(),
            ));
        }
        Ok(Curve {
            kind: CurveKind::CircleArc {
                center,
                radius,
                from,
                to,
            },
        })
    }

    pub fn product(components: Vec<Curve>) -> Result<Self, CurveError> {
        if components.is_empty() {
            return Err(CurveError::Invalid(
                "a product curve needs a component".into(),
            ));
        }
        Ok(Curve {
            kind: CurveKind::Product(components),
        })
    }

    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(f64) -> Point + Send + Sync + 'static,
    ) -> Self {
        Curve {
            kind: CurveKind::Custom {
                name: name.into(),
                eval: Arc::new(eval),
            },
        }
    }

    /// `c` on `[from, to]`, reparameterized affinely over `[0, 1]`.
    pub fn restrict(&self, from: f64, to: f64) -> Result<Self, CurveError> {
        if !(0.0 <= from && from < to && to <= 1.0) {
            return Err(CurveError::Invalid(format!(
                "restriction [{from}, {to}] is not inside [0, 1]"
            )));
        }
        Ok(Curve {
            kind: CurveKind::Restricted {
                inner: Box::new(self.clone()),
                from,
                to,
            },
        })
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn start(&self) -> Point {
        self.at(0.0)
    }

    pub fn end(&self) -> Point {
        self.at(1.0)
    }

    /// `c(t)`, with `t` clamped to `[0, 1]`.
    pub fn at(&self, t: f64) -> Point {
        let t = t.clamp(0.0, 1.0);
        match &self.kind {
            CurveKind::Polyline {
                vertices,
                breakpoints,
            } => {
                if t == 1.0 {
                    return vertices.last().unwrap().clone();
                }
                let j = breakpoints.partition_point(|&b| b <= t) - 1;
                let u = (t - breakpoints[j]) / (breakpoints[j + 1] - breakpoints[j]);
                Point::lerp(&vertices[j], &vertices[j + 1], u).expect("validated at construction")
            }
            CurveKind::Segment { start, end, power } => {
                let u = if *power == 1.0 { t } else { t.powf(*power) };
                Point::lerp(start, end, u).expect("validated at construction")
            }
            CurveKind::CircleArc {
                center,
                radius,
                from,
                to,
            } => {
                let theta = from + t * (to - from);
                Point::Coords(vec![
                    center[0] + radius * theta.cos(),
                    center[1] + radius * theta.sin(),
                ])
            }
            CurveKind::Product(parts) => Point::Tuple(parts.iter().map(|c| c.at(t)).collect()),
            CurveKind::Restricted { inner, from, to } => {
                let s = if t == 1.0 {
                    *to
                } else {
                    from + t * (to - from)
                };
                inner.at(s)
            }
            CurveKind::Custom { eval, .. } => eval(t),
        }
    }
}

/// Dyadic length estimate of a curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthEstimate {
    /// `L_N` at `N = 2^depth`.
    pub length: f64,
    /// `L_1, L_2, L_4, ..., L_N`.
    pub trace: Vec<f64>,
    /// Whether `L_2N >= L_N - τ` held at every level.
    pub monotone: bool,
    /// Whether the trace exceeded `DIVERGENCE_FACTOR` times its first nonzero entry.
    pub divergent: bool,
}

impl LengthEstimate {
    /// `L_1`, the chord between the endpoints.
    pub fn first_level(&self) -> f64 {
        self.trace[0]
    }
}

fn check_depth(depth: u32) -> Result<(), CurveError> {
    if (1..=MAX_DEPTH).contains(&depth) {
        Ok(())
    } else {
        Err(CurveError::InvalidDepth(depth))
    }
}

/// Points `c(j / 2^depth)` for `j = 0..=2^depth`.
fn finest_points(c: &Curve, depth: u32) -> Vec<Point> {
    let n = 1usize << depth;
    (0..=n).map(|j| c.at(j as f64 / n as f64)).collect()
}

/// Step distances at the finest level, in order.
fn finest_steps(space: &MetricSpace, points: &[Point]) -> Result<Vec<f64>, CurveError> {
    points
        .windows(2)
        .map(|w| space.distance(&w[0], &w[1]).map_err(CurveError::from))
        .collect()
}

/// Subdivision sums `L_1, ..., L_{2^depth}` of a curve in `space`.
pub fn curve_length(
    space: &MetricSpace,
    c: &Curve,
    depth: u32,
    tol: &Tolerances,
) -> Result<LengthEstimate, CurveError> {
    check_depth(depth)?;
    let points = finest_points(c, depth);
    let mut trace = Vec::with_capacity(depth as usize + 1);
    for level in 0..depth {
        let stride = 1usize << (depth - level);
        let mut sum = 0.0;
        for j in (0..points.len() - 1).step_by(stride) {
            sum += space.distance(&points[j], &points[j + stride])?;
        }
        trace.push(sum);
    }
    trace.push(finest_steps(space, &points)?.iter().sum());

    let monotone = trace.windows(2).all(|w| w[1] >= w[0] - tol.metric_at(w[0]));
    let divergent = trace
        .iter()
        .find(|&&l| l > 0.0)
        .is_some_and(|&first| *trace.last().unwrap() > DIVERGENCE_FACTOR * first);
    Ok(LengthEstimate {
        length: *trace.last().unwrap(),
        trace,
        monotone,
        divergent,
    })
}

/// Compares the length of the product curve `(c_1, ..., c_k)` in `prod`
/// with `Φ(l_1, ..., l_k)`, where `l_i` are the factor lengths measured at
/// the same depth. Requires a norm-induced `Φ` and constant-speed components.
pub fn product_curve_length_check(
    prod: &ProductSpace,
    components: &[Curve],
    depth: u32,
    tol: &Tolerances,
) -> Result<ValidationReport, CurveError> {
    check_depth(depth)?;
    if components.len() != prod.arity() {
        return Err(CurveError::Invalid(format!(
            "{} component curves for a product of {} factors",
            components.len(),
            prod.arity()
        )));
    }
    let class = prod.phi().class();
    if class < PhiClass::NormInduced {
        return Ok(ValidationReport::undetermined(
            PRODUCT_LENGTH,
            format!("phi is {class}; the length formula needs conditions (1)-(4)"),
        ));
    }

    let n = (1usize << depth) as f64;
    let mut lengths = Vec::with_capacity(components.len());
    for (i, (space, c)) in prod.factors().iter().zip(components).enumerate() {
        let steps = finest_steps(space, &finest_points(c, depth))?;
        let l: f64 = steps.iter().sum();
        let mean = l / n;
        let worst = steps.iter().cloned().fold(0.0, f64::max);
        if worst > mean * (1.0 + SPEED_SLACK) + tol.metric_at(l) / n {
            return Ok(ValidationReport::undetermined(
                PRODUCT_LENGTH,
                format!("component {i} is not parameterized at constant speed"),
            )
            .with_witness(
                Witness::new()
                    .with("component", vec![i as f64])
                    .with("max_step_and_mean_step", vec![worst, mean]),
            ));
        }
        lengths.push(l);
    }

    let space = MetricSpace::product(prod.clone());
    let curve = Curve::product(components.to_vec())?;
    let measured = curve_length(&space, &curve, depth, tol)?;
    let expected = prod.phi().eval_unchecked(&lengths);
    let tolerance = tol.length_at(measured.first_level(), depth);
    let mut tracker = WorstTracker::new(PRODUCT_LENGTH, tolerance);
    tracker.observe((measured.length - expected).abs(), || {
        Witness::new()
            .with("product_length", vec![measured.length])
            .with("phi_of_factor_lengths", vec![expected])
            .with("factor_lengths", lengths.clone())
    });
    Ok(tracker.finish())
}

/// Checks that `c` is parameterized proportionally to arclength: the length
/// of `c|[s,t]` must be `L (t - s)` for all grid pairs `s < t` with
/// `s, t ∈ {0, 1/grid, ..., 1}`.
pub fn arclength_check(
    space: &MetricSpace,
    c: &Curve,
    grid: usize,
    depth: u32,
    tol: &Tolerances,
) -> Result<ValidationReport, CurveError> {
    check_depth(depth)?;
    if grid == 0 {
        return Err(CurveError::Invalid(
            "arclength grid must be at least 1".into(),
        ));
    }
    let whole = curve_length(space, c, depth, tol)?;
    if whole.divergent || !whole.length.is_finite() {
        return Ok(ValidationReport::undetermined(
            ARCLENGTH,
            "curve length is not finite",
        ));
    }
    let total = whole.length;
    let tolerance = tol.length_at(whole.first_level(), depth);
    let mut tracker = WorstTracker::new(ARCLENGTH, tolerance);
    for i in 0..grid {
        for j in i + 1..=grid {
            let (s, t) = (i as f64 / grid as f64, j as f64 / grid as f64);
            let part = curve_length(space, &c.restrict(s, t)?, depth, tol)?.length;
            let expected = total * (t - s);
            tracker.observe((part - expected).abs(), || {
                Witness::new()
                    .with("s_t", vec![s, t])
                    .with("restricted_length", vec![part])
                    .with("proportional_length", vec![expected])
            });
        }
    }
    Ok(tracker.finish())
}

/// The product of two real lines glued by the two-valued `Φ`.
pub fn two_valued_plane() -> ProductSpace {
    ProductSpace::new(
        vec![MetricSpace::RealLine, MetricSpace::RealLine],
        PhiFunction::two_valued(2).expect("dimension 2 is valid"),
    )
    .expect("arity matches")
}

/// Checks `L_{2^k} >= 2^k` for `k = 1..=depth` along `c` in the two-valued
/// plane. Every nonzero step has `d_Φ >= 1`, so the bound is exact.
fn observe_divergence(
    tracker: &mut WorstTracker,
    space: &MetricSpace,
    c: &Curve,
    depth: u32,
    tol: &Tolerances,
) -> Result<Vec<f64>, CurveError> {
    let est = curve_length(space, c, depth, tol)?;
    for k in 1..=depth as usize {
        let bound = (1u64 << k) as f64;
        let sum = est.trace[k];
        tracker.observe_with(bound - sum, sum < bound, || {
            Witness::new()
                .with("start", c.start().flatten())
                .with("end", c.end().flatten())
                .with("depth", vec![k as f64])
                .with("subdivision_sum", vec![sum])
        });
    }
    Ok(est.trace)
}

/// Subdivision sums of the straight path from `x` to `y` in the two-valued
/// plane, with the verdict of the `2^k` lower bound at each depth. Endpoints
/// that agree to within `τ_metric` in every coordinate are undetermined.
pub fn non_length_space_probe(
    x: [f64; 2],
    y: [f64; 2],
    depth: u32,
    tol: &Tolerances,
) -> Result<ValidationReport, CurveError> {
    check_depth(depth)?;
    let space = MetricSpace::product(two_valued_plane());
    let c = Curve::segment(Point::scalars(&x), Point::scalars(&y))?;
    if (x[0] - y[0]).abs() <= tol.metric && (x[1] - y[1]).abs() <= tol.metric {
        let est = curve_length(&space, &c, depth, tol)?;
        return Ok(ValidationReport::undetermined(
            NON_LENGTH_SPACE,
            "endpoints coincide; the path is constant",
        )
        .with_witness(Witness::new().with("trace", est.trace)));
    }
    let mut tracker = WorstTracker::new(NON_LENGTH_SPACE, 0.0);
    let trace = observe_divergence(&mut tracker, &space, &c, depth, tol)?;
    let mut report = tracker.finish();
    report.witness.push("trace", trace);
    Ok(report)
}

/// The two-valued plane is not a length space: along the straight path
/// `(0,0) → (1,0)` and `paths - 1` sampled paths (segments and two-piece
/// polylines between endpoints with distinct first coordinates), every
/// dyadic subdivision sum at `2^k` steps is at least `2^k`.
pub fn non_length_space_demo(
    depth: u32,
    paths: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ValidationReport, CurveError> {
    check_depth(depth)?;
    let space = MetricSpace::product(two_valued_plane());
    let mut rng = crate::sampling::seeded_rng(seed);
    let mut tracker = WorstTracker::new(NON_LENGTH_SPACE, 0.0);
    let canonical = Curve::segment(Point::scalars(&[0.0, 0.0]), Point::scalars(&[1.0, 0.0]))?;
    observe_divergence(&mut tracker, &space, &canonical, depth, tol)?;

    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> [f64; 2] {
        [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)]
    };
    for k in 1..paths {
        let x = draw(&mut rng);
        let mut y = draw(&mut rng);
        while (x[0] - y[0]).abs() < 1e-3 {
            y = draw(&mut rng);
        }
        let c = if k % 2 == 1 {
            Curve::segment(Point::scalars(&x), Point::scalars(&y))?
        } else {
            let m = draw(&mut rng);
            Curve::polyline_uniform(vec![
                Point::scalars(&x),
                Point::scalars(&m),
                Point::scalars(&y),
            ])?
        };
        observe_divergence(&mut tracker, &space, &c, depth, tol)?;
    }
    Ok(tracker.finish())
}

impl ValidationReport {
    pub(crate) fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = witness;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Verdict;
    use std::f64::consts::FRAC_PI_2;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn plane(phi: PhiFunction) -> ProductSpace {
        ProductSpace::new(vec![MetricSpace::RealLine, MetricSpace::RealLine], phi).unwrap()
    }

    #[test]
    fn unit_segment_on_the_line() {
        let c = Curve::segment(Point::scalar(0.0), Point::scalar(1.0)).unwrap();
        for depth in [1, 5, 12] {
            let est = curve_length(&MetricSpace::RealLine, &c, depth, &tol()).unwrap();
            assert_eq!(est.length, 1.0);
            assert!(est.monotone && !est.divergent);
            assert_eq!(est.trace.len(), depth as usize + 1);
        }
    }

    #[test]
    fn quarter_circle_converges_from_below() {
        let c = Curve::circle_arc([0.0, 0.0], 1.0, 0.0, FRAC_PI_2).unwrap();
        let est = curve_length(&MetricSpace::lp(2, 2.0).unwrap(), &c, 12, &tol()).unwrap();
        assert!(est.length < FRAC_PI_2);
        assert!((est.length - FRAC_PI_2).abs() < 1e-4);
        assert!(est.trace.windows(2).all(|w| w[1] >= w[0]));
        assert!((est.trace[0] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn taxicab_polyline() {
        let space = MetricSpace::product(plane(PhiFunction::sum(2).unwrap()));
        let c = Curve::polyline_uniform(vec![
            Point::scalars(&[0.0, 0.0]),
            Point::scalars(&[1.0, 0.0]),
            Point::scalars(&[1.0, 1.0]),
        ])
        .unwrap();
        assert_eq!(curve_length(&space, &c, 6, &tol()).unwrap().length, 2.0);
    }

    #[test]
    fn polyline_validation() {
        let v = vec![Point::scalar(0.0), Point::scalar(1.0)];
        assert!(Curve::polyline(v.clone(), vec![0.0, 0.5]).is_err());
        assert!(Curve::polyline(v.clone(), vec![0.0]).is_err());
        assert!(Curve::polyline(vec![Point::Index(0), Point::Index(1)], vec![0.0, 1.0]).is_err());
        assert!(Curve::polyline(v, vec![0.0, 1.0]).is_ok());
        assert!(Curve::constant_speed_polyline(
            &MetricSpace::RealLine,
            vec![Point::scalar(1.0), Point::scalar(1.0)]
        )
        .is_err());
    }

    #[test]
    fn depth_is_validated() {
        let c = Curve::segment(Point::scalar(0.0), Point::scalar(1.0)).unwrap();
        assert_eq!(
            curve_length(&MetricSpace::RealLine, &c, 0, &tol()).unwrap_err(),
            CurveError::InvalidDepth(0)
        );
    }

    #[test]
    fn constant_speed_breakpoints_follow_lengths() {
        let c = Curve::constant_speed_polyline(
            &MetricSpace::RealLine,
            vec![Point::scalar(0.0), Point::scalar(1.0), Point::scalar(4.0)],
        )
        .unwrap();
        match c.kind() {
            CurveKind::Polyline { breakpoints, .. } => {
                assert_eq!(breakpoints, &vec![0.0, 0.25, 1.0])
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(c.at(0.5), Point::scalar(2.0));
    }

    fn segments(l1: f64, l2: f64) -> Vec<Curve> {
        vec![
            Curve::segment(Point::scalar(0.0), Point::scalar(l1)).unwrap(),
            Curve::segment(Point::scalar(0.0), Point::scalar(l2)).unwrap(),
        ]
    }

    #[test]
    fn three_four_five() {
        let r = product_curve_length_check(
            &plane(PhiFunction::euclidean(2).unwrap()),
            &segments(3.0, 4.0),
            12,
            &tol(),
        )
        .unwrap();
        assert!(r.passed(), "{r}");
        assert!((r.witness.get("product_length").unwrap()[0] - 5.0).abs() < 1e-6);
    }

    #[test]
    fn sum_phi_adds_lengths() {
        let r = product_curve_length_check(
            &plane(PhiFunction::sum(2).unwrap()),
            &segments(3.0, 4.0),
            8,
            &tol(),
        )
        .unwrap();
        assert!(r.passed());
        assert_eq!(r.witness.get("product_length").unwrap()[0], 7.0);
    }

    #[test]
    fn constant_component_gives_axis_length() {
        let phi = PhiFunction::weighted_lp(crate::Exponent::Finite(3.0), vec![8.0, 1.0]).unwrap();
        let r = product_curve_length_check(&plane(phi.clone()), &segments(3.0, 0.0), 8, &tol())
            .unwrap();
        assert!(r.passed());
        let expected = 3.0 * phi.axis_value(0);
        assert!((r.witness.get("product_length").unwrap()[0] - expected).abs() < 1e-9);
    }

    #[test]
    fn product_length_preconditions() {
        let r = product_curve_length_check(
            &plane(PhiFunction::two_valued(2).unwrap()),
            &segments(3.0, 4.0),
            4,
            &tol(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Undetermined);
        let cubic = vec![
            Curve::segment_with_power(Point::scalar(0.0), Point::scalar(1.0), 3.0).unwrap(),
            Curve::segment(Point::scalar(0.0), Point::scalar(1.0)).unwrap(),
        ];
        let r = product_curve_length_check(&plane(PhiFunction::sum(2).unwrap()), &cubic, 6, &tol())
            .unwrap();
        assert_eq!(r.verdict, Verdict::Undetermined);
        assert!(product_curve_length_check(
            &plane(PhiFunction::sum(2).unwrap()),
            &cubic[..1],
            6,
            &tol()
        )
        .is_err());
    }

    #[test]
    fn arclength_of_segments() {
        let c = Curve::segment(
            Point::Coords(vec![0.0, 1.0]),
            Point::Coords(vec![2.0, -1.0]),
        )
        .unwrap();
        let r = arclength_check(&MetricSpace::lp(2, 2.0).unwrap(), &c, 8, 8, &tol()).unwrap();
        assert!(r.passed(), "{r}");

        let cubic = Curve::segment_with_power(Point::scalar(0.0), Point::scalar(1.0), 3.0).unwrap();
        let r = arclength_check(&MetricSpace::RealLine, &cubic, 4, 8, &tol()).unwrap();
        assert!(r.failed());
        // worst pairs are [0, 1/2] and [1/2, 1]: |t³ - s³ - (t - s)| = 3/8
        assert!((r.worst_margin - 0.375).abs() < 1e-12);
    }

    #[test]
    fn arclength_of_product_segments() {
        let prod = plane(PhiFunction::lp(2, 3.0).unwrap());
        let c = Curve::product(segments(2.0, -1.0)).unwrap();
        let r = arclength_check(&MetricSpace::product(prod), &c, 6, 10, &tol()).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn two_valued_sums_grow_with_the_step_count() {
        let r = non_length_space_probe([0.0, 0.0], [1.0, 0.0], 4, &tol()).unwrap();
        assert!(r.passed());
        let trace = r.witness.get("trace").unwrap();
        assert!(trace[4] >= 16.0);
        assert_eq!(trace, &[1.0, 2.0, 4.0, 8.0, 16.0]);
    }

    #[test]
    fn degenerate_probe_is_undetermined() {
        let r = non_length_space_probe([0.5, 0.5], [0.5, 0.5], 4, &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Undetermined);
        assert!(r.witness.get("trace").unwrap().iter().all(|&l| l == 0.0));
    }

    #[test]
    fn demo_confirms_divergence() {
        let r = non_length_space_demo(10, 16, 0, &tol()).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.samples, 160);
    }

    #[test]
    fn restriction_and_endpoints() {
        let c = Curve::segment(Point::scalar(2.0), Point::scalar(6.0)).unwrap();
        let r = c.restrict(0.25, 0.75).unwrap();
        assert_eq!(r.start(), Point::scalar(3.0));
        assert_eq!(r.end(), Point::scalar(5.0));
        assert!(c.restrict(0.5, 0.5).is_err());
    }
}
