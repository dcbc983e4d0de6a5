//! Constant-speed geodesics in catalog spaces and products, and the checks
//! built on them: geodesy, uniqueness, Busemann convexity and the CAT(0)
//! four-point comparison.

use crate::phi::PhiClass;
use crate::product::ProductSpace;
use crate::report::{ValidationReport, Verdict, Witness, WorstTracker};
use crate::spaces::{Exponent, MetricSpace, Point, SpaceError};
use crate::Tolerances;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub const GEODESY: &str = "geodesy";
pub const GEODESIC_COMPONENTS: &str = "geodesic-component-speed";
pub const GEODESIC_UNIQUENESS: &str = "geodesic-uniqueness";
pub const BUSEMANN_CONVEXITY: &str = "busemann-convexity";
pub const CAT0_FOUR_POINT: &str = "cat0-four-point";

/// Two geodesics with the same endpoints coincide when their sup-distance on
/// the grid is at most this fraction of `max(1, D)`. Concatenations through a
/// point at transverse offset `h` from a strictly convex geodesic have excess
/// `O(h² / D)`, so a relative threshold of `τ_metric` would accept offsets
/// near `sqrt(τ) D` as distinct geodesics.
pub const COINCIDENCE: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeodesicError {
    #[error("{0} is not a geodesic space")]
    NotGeodesic(String),
    #[error("phi is {class}; product geodesics need a norm-induced phi")]
    PhiNotNormInduced { class: PhiClass },
    #[error("invalid selector: {0}")]
    InvalidSelector(String),
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Chooses a representative when geodesics are not unique.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selector {
    /// The affine segment, a geodesic in every normed space.
    #[default]
    Affine,
    /// 1-based coordinate. In `ℓ^1` the coordinates move one at a time
    /// starting from this one; in `ℓ^∞` this coordinate moves at full speed.
    /// Uniquely geodesic spaces ignore it.
    Corner(usize),
}

type GeodesicFn = Arc<dyn Fn(f64) -> Point + Send + Sync>;

/// A unit-speed geodesic `γ: [0, D] → X` with `γ(0) = start`, `γ(D) = end`.
#[derive(Clone)]
pub struct Geodesic {
    space: MetricSpace,
    start: Point,
    end: Point,
    length: f64,
    label: String,
    eval: GeodesicFn,
}

impl fmt::Debug for Geodesic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Geodesic")
            .field("space", &self.space.to_string())
            .field("start", &self.start)
            .field("end", &self.end)
            .field("length", &self.length)
            .field("label", &self.label)
            .finish()
    }
}

impl Geodesic {
    /// Wraps an evaluator on `[0, length]`. Nothing is verified; see [`geodesy_test`].
    pub fn from_fn(
        space: MetricSpace,
        start: Point,
        end: Point,
        length: f64,
        label: impl Into<String>,
        eval: impl Fn(f64) -> Point + Send + Sync + 'static,
    ) -> Self {
        Geodesic {
            space,
            start,
            end,
            length,
            label: label.into(),
            eval: Arc::new(eval),
        }
    }

    fn constant(space: &MetricSpace, x: &Point) -> Self {
        let p = x.clone();
        Geodesic::from_fn(
            space.clone(),
            x.clone(),
            x.clone(),
            0.0,
            "constant",
            move |_| p.clone(),
        )
    }

    fn affine(space: &MetricSpace, x: &Point, y: &Point, length: f64) -> Self {
        if length == 0.0 {
            return Geodesic::constant(space, x);
        }
        let (a, b) = (x.clone(), y.clone());
        Geodesic::from_fn(
            space.clone(),
            x.clone(),
            y.clone(),
            length,
            "affine",
            move |t| Point::lerp(&a, &b, t / length).expect("endpoints share a coordinate shape"),
        )
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn start(&self) -> &Point {
        &self.start
    }

    pub fn end(&self) -> &Point {
        &self.end
    }

    /// The total distance `D`.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `γ(t)` for `t` clamped to `[0, D]`; the endpoints are returned exactly.
    pub fn at(&self, t: f64) -> Point {
        if t <= 0.0 {
            self.start.clone()
        } else if t >= self.length {
            self.end.clone()
        } else {
            (self.eval)(t)
        }
    }

    /// `γ(u D)` for `u ∈ [0, 1]`.
    pub fn at_fraction(&self, u: f64) -> Point {
        if u >= 1.0 {
            self.end.clone()
        } else {
            self.at(u * self.length)
        }
    }

    /// `a` followed by `b`, renormalized to unit speed on `[0, D_a + D_b]`.
    pub fn concat(a: &Geodesic, b: &Geodesic) -> Geodesic {
        let (first, second) = (a.clone(), b.clone());
        let split = a.length;
        Geodesic::from_fn(
            a.space.clone(),
            a.start.clone(),
            b.end.clone(),
            a.length + b.length,
            format!("{} + {}", a.label, b.label),
            move |t| {
                if t <= split {
                    first.at(t)
                } else {
                    second.at(t - split)
                }
            },
        )
    }
}

/// Closed-form geodesic from `x` to `y` in a catalog space.
pub fn factor_geodesic(
    space: &MetricSpace,
    x: &Point,
    y: &Point,
    selector: Selector,
) -> Result<Geodesic, GeodesicError> {
    space.validate_point(x)?;
    space.validate_point(y)?;
    let d = space.distance(x, y)?;
    match space {
        MetricSpace::RealLine | MetricSpace::HalfLine => {
            check_corner(selector, 1)?;
            Ok(Geodesic::affine(space, x, y, d))
        }
        MetricSpace::Lp(lp) => {
            check_corner(selector, lp.dimension)?;
            let (Selector::Corner(k), false) = (selector, d == 0.0) else {
                return Ok(Geodesic::affine(space, x, y, d));
            };
            let (a, b) = (x.coords().unwrap().to_vec(), y.coords().unwrap().to_vec());
            let weights = lp.weights.clone();
            let m = lp.dimension;
            match lp.exponent {
                Exponent::Finite(p) if p == 1.0 && m > 1 => Ok(Geodesic::from_fn(
                    space.clone(),
                    x.clone(),
                    y.clone(),
                    d,
                    format!("corner({k})"),
                    move |t| {
                        let mut v = a.clone();
                        let mut left = t;
                        for i in (0..m).map(|j| (k - 1 + j) % m) {
                            let span = weights[i] * (b[i] - a[i]).abs();
                            if left >= span {
                                v[i] = b[i];
                                left -= span;
                            } else {
                                v[i] = a[i] + (b[i] - a[i]).signum() * left / weights[i];
                                break;
                            }
                        }
                        Point::Coords(v)
                    },
                )),
                Exponent::Infinity if m > 1 => Ok(Geodesic::from_fn(
                    space.clone(),
                    x.clone(),
                    y.clone(),
                    d,
                    format!("corner({k})"),
                    move |t| {
                        let mut v: Vec<f64> = a
                            .iter()
                            .zip(&b)
                            .map(|(u, w)| u + (t / d) * (w - u))
                            .collect();
                        let i = k - 1;
                        let reach = (t / weights[i]).min((b[i] - a[i]).abs());
                        v[i] = a[i] + (b[i] - a[i]).signum() * reach;
                        Point::Coords(v)
                    },
                )),
                _ => Ok(Geodesic::affine(space, x, y, d)),
            }
        }
        MetricSpace::Discrete { points: 1 } => Ok(Geodesic::constant(space, x)),
        MetricSpace::Finite(m) if m.len() == 1 => Ok(Geodesic::constant(space, x)),
        MetricSpace::Discrete { .. } | MetricSpace::Finite(_) => {
            Err(GeodesicError::NotGeodesic(space.to_string()))
        }
        MetricSpace::Product(p) => product_geodesic(p, x, y, &[]),
    }
}

fn check_corner(selector: Selector, dimension: usize) -> Result<(), GeodesicError> {
    match selector {
        Selector::Corner(k) if k == 0 || k > dimension => Err(GeodesicError::InvalidSelector(
            format!("corner({k}) on a space of dimension {dimension}"),
        )),
        _ => Ok(()),
    }
}

/// The product geodesic: factor `i` follows its own geodesic at speed
/// `d_i / D`, so `d_i(x_i, γ_i(t)) = (t / D) d_i(x_i, y_i)`.
///
/// An empty selector list means affine in every factor.
pub fn product_geodesic(
    prod: &ProductSpace,
    x: &Point,
    y: &Point,
    selectors: &[Selector],
) -> Result<Geodesic, GeodesicError> {
    let class = prod.phi().class();
    if class < PhiClass::NormInduced {
        return Err(GeodesicError::PhiNotNormInduced { class });
    }
    if !selectors.is_empty() && selectors.len() != prod.arity() {
        return Err(GeodesicError::InvalidSelector(format!(
            "{} selectors for {} factors",
            selectors.len(),
            prod.arity()
        )));
    }
    let space = MetricSpace::product(prod.clone());
    space.validate_point(x)?;
    space.validate_point(y)?;
    let (xs, ys) = (x.factors().unwrap(), y.factors().unwrap());
    let mut parts = Vec::with_capacity(prod.arity());
    for (i, f) in prod.factors().iter().enumerate() {
        let sel = selectors.get(i).copied().unwrap_or_default();
        parts.push(factor_geodesic(f, &xs[i], &ys[i], sel)?);
    }
    let lengths: Vec<f64> = parts.iter().map(Geodesic::length).collect();
    let total = prod.phi().eval_unchecked(&lengths);
    if total == 0.0 {
        return Ok(Geodesic::constant(&space, x));
    }
    let label = parts
        .iter()
        .map(|g| g.label.clone())
        .collect::<Vec<_>>()
        .join(" x ");
    Ok(Geodesic::from_fn(
        space,
        x.clone(),
        y.clone(),
        total,
        format!("product[{label}]"),
        move |t| Point::Tuple(parts.iter().map(|g| g.at(t * g.length / total)).collect()),
    ))
}

fn check_grid(grid: usize) -> Result<(), GeodesicError> {
    if grid < 2 {
        return Err(GeodesicError::Invalid(format!(
            "grid must have at least 2 points, got {grid}"
        )));
    }
    Ok(())
}

fn grid_params(length: f64, grid: usize) -> Vec<f64> {
    (0..grid)
        .map(|j| {
            if j + 1 == grid {
                length
            } else {
                length * j as f64 / (grid - 1) as f64
            }
        })
        .collect()
}

/// `|d(γ(s), γ(t)) - |s - t|| <= τ max(1, D)` on all pairs of a uniform
/// grid of `grid` parameters, plus `γ(0) = x` and `γ(D) = y`.
pub fn geodesy_test(
    space: &MetricSpace,
    g: &Geodesic,
    grid: usize,
    tol: &Tolerances,
) -> Result<ValidationReport, GeodesicError> {
    check_grid(grid)?;
    let tolerance = tol.metric_at(g.length);
    let mut tracker = WorstTracker::new(GEODESY, tolerance);
    let ts = grid_params(g.length, grid);
    let points: Vec<Point> = ts.iter().map(|&t| g.at(t)).collect();
    for p in &points {
        space.validate_point(p)?;
    }
    for (label, end, param) in [("start", &g.start, 0), ("end", &g.end, grid - 1)] {
        let gap = space.distance(end, &points[param])?;
        tracker.observe(gap, || {
            Witness::new()
                .with(label, end.flatten())
                .with("curve_point", points[param].flatten())
        });
    }
    for i in 0..grid {
        for j in i + 1..grid {
            let d = space.distance(&points[i], &points[j])?;
            let gap = (d - (ts[j] - ts[i])).abs();
            tracker.observe(gap, || {
                Witness::new()
                    .with("s_t", vec![ts[i], ts[j]])
                    .with("distance", vec![d])
                    .with("gamma_s", points[i].flatten())
                    .with("gamma_t", points[j].flatten())
            });
        }
    }
    Ok(tracker.finish())
}

/// The `λ = t / D` identity `d_i(x_i, γ_i(t)) = (t / D) d_i(x_i, y_i)` for
/// every factor on a uniform grid of `grid` parameters.
pub fn component_speed_check(
    prod: &ProductSpace,
    g: &Geodesic,
    grid: usize,
    tol: &Tolerances,
) -> Result<ValidationReport, GeodesicError> {
    check_grid(grid)?;
    let tolerance = tol.metric_at(g.length);
    let mut tracker = WorstTracker::new(GEODESIC_COMPONENTS, tolerance);
    let dist = prod.distance_vector(&g.start, &g.end)?;
    let xs = g.start.factors().unwrap().to_vec();
    for t in grid_params(g.length, grid) {
        let p = g.at(t);
        let parts = p
            .factors()
            .ok_or_else(|| GeodesicError::Invalid("not a product geodesic".into()))?;
        let lambda = if g.length == 0.0 { 0.0 } else { t / g.length };
        for (i, f) in prod.factors().iter().enumerate() {
            let moved = f.distance(&xs[i], &parts[i])?;
            let gap = (moved - lambda * dist[i]).abs();
            tracker.observe(gap, || {
                Witness::new()
                    .with("t", vec![t])
                    .with("factor", vec![i as f64])
                    .with("moved_and_expected", vec![moved, lambda * dist[i]])
            });
        }
    }
    Ok(tracker.finish())
}

/// Sup over a uniform grid of `u ∈ [0, 1]` of `d(a(u D_a), b(u D_b))`, with its argmax.
fn sup_distance(space: &MetricSpace, a: &Geodesic, b: &Geodesic, grid: usize) -> (f64, f64) {
    let mut best = (0.0, 0.0);
    for u in grid_params(1.0, grid) {
        let d = space.distance_unchecked(&a.at_fraction(u), &b.at_fraction(u));
        if d > best.0 || d.is_nan() {
            best = (d, u);
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessParams {
    /// Grid size for geodesy tests and sup-distances.
    pub grid: usize,
    /// Midpoint perturbations tried (axis offsets first, then random).
    pub perturbations: usize,
    pub seed: u64,
}

impl Default for UniquenessParams {
    fn default() -> Self {
        UniquenessParams {
            grid: 33,
            perturbations: 64,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct UniquenessProbe {
    /// Pass when every geodesic found coincides with the first.
    pub report: ValidationReport,
    /// The first geodesic, followed by the most distant other geodesic when one was found.
    pub geodesics: Vec<Geodesic>,
    pub sup_distance: f64,
}

impl UniquenessProbe {
    pub fn is_unique(&self) -> bool {
        self.report.passed()
    }
}

/// Searches for a second geodesic from `x` to `y`.
///
/// Candidates are the product geodesics for each selector set and
/// concatenations through perturbed midpoints `m'` (within `D / 4`) with
/// `d(x, m') + d(m', y) <= D + τ`. A candidate counts only if it passes
/// [`geodesy_test`]; it is distinct if its sup-distance from the first
/// geodesic exceeds `COINCIDENCE · max(1, D)`.
pub fn uniqueness_probe(
    prod: &ProductSpace,
    x: &Point,
    y: &Point,
    selector_sets: &[Vec<Selector>],
    params: &UniquenessParams,
    tol: &Tolerances,
) -> Result<UniquenessProbe, GeodesicError> {
    check_grid(params.grid)?;
    let space = MetricSpace::product(prod.clone());
    let first_set: &[Selector] = selector_sets.first().map(Vec::as_slice).unwrap_or(&[]);
    let base = product_geodesic(prod, x, y, first_set)?;
    let total = base.length;
    let threshold = COINCIDENCE * total.max(1.0);

    let mut candidates = Vec::new();
    for set in selector_sets.iter().skip(1) {
        candidates.push(product_geodesic(prod, x, y, set)?);
    }
    let mut rejected = 0usize;
    if total > 0.0 {
        let mid = base.at(total / 2.0);
        let radius = total / 4.0;
        let mut rng = crate::sampling::seeded_rng(params.seed);
        let mut offsets = space.axis_offsets(&mid, radius);
        offsets.truncate(params.perturbations);
        while offsets.len() < params.perturbations {
            offsets.push(space.perturb(&mid, radius, &mut rng));
        }
        for m in offsets {
            if space.validate_point(&m).is_err() {
                rejected += 1;
                continue;
            }
            let through = space.distance(x, &m)? + space.distance(&m, y)?;
            if through > total + tol.metric_at(total) {
                rejected += 1;
                continue;
            }
            let a = product_geodesic(prod, x, &m, first_set)?;
            let b = product_geodesic(prod, &m, y, first_set)?;
            candidates.push(Geodesic::concat(&a, &b));
        }
    }

    let mut samples = 1usize;
    let mut best: Option<(f64, f64, Geodesic)> = None;
    for c in candidates {
        if !geodesy_test(&space, &c, params.grid, tol)?.passed() {
            rejected += 1;
            continue;
        }
        samples += 1;
        let (sup, at) = sup_distance(&space, &base, &c, params.grid);
        if best.as_ref().is_none_or(|(s, _, _)| sup > *s) {
            best = Some((sup, at, c));
        }
    }

    let sup = best.as_ref().map_or(0.0, |b| b.0);
    let distinct = sup > threshold;
    let mut witness = Witness::new()
        .with("start", x.flatten())
        .with("end", y.flatten())
        .with("length", vec![total]);
    let mut geodesics = vec![base.clone()];
    if let (true, Some((_, u, other))) = (distinct, &best) {
        witness.push("parameter_fraction", vec![*u]);
        witness.push("first", base.at_fraction(*u).flatten());
        witness.push("second", other.at_fraction(*u).flatten());
        geodesics.push(other.clone());
    }
    let report = ValidationReport {
        condition: GEODESIC_UNIQUENESS.into(),
        verdict: if distinct {
            Verdict::Fail
        } else {
            Verdict::Pass
        },
        samples,
        worst_margin: sup,
        tolerance: threshold,
        witness,
        notes: vec![format!(
            "{rejected} candidate(s) were not geodesics and were discarded"
        )],
    };
    Ok(UniquenessProbe {
        report,
        geodesics,
        sup_distance: sup,
    })
}

/// Midpoint convexity of `f(s, t) = d(γ_1(s), γ_2(t))` on `[0, 1]²`:
/// `f((s+s')/2, (t+t')/2) <= (f(s,t) + f(s',t')) / 2` for all pairs of
/// points of a `grid × grid` lattice, with both geodesics on unit parameter.
///
/// The check is global along the given geodesics; local convexity at small
/// scales is not probed separately.
pub fn busemann_convexity_check(
    space: &MetricSpace,
    g1: &Geodesic,
    g2: &Geodesic,
    grid: usize,
    tol: &Tolerances,
) -> Result<ValidationReport, GeodesicError> {
    check_grid(grid)?;
    let half = 2 * grid - 1;
    let us = grid_params(1.0, half);
    let p1: Vec<Point> = us.iter().map(|&u| g1.at_fraction(u)).collect();
    let p2: Vec<Point> = us.iter().map(|&u| g2.at_fraction(u)).collect();
    for p in p1.iter().chain(&p2) {
        space.validate_point(p)?;
    }
    let table: Vec<f64> = p1
        .iter()
        .flat_map(|a| p2.iter().map(move |b| (a, b)))
        .map(|(a, b)| space.distance_unchecked(a, b))
        .collect();
    let f = |a: usize, b: usize| table[a * half + b];

    let mut tracker = WorstTracker::new(BUSEMANN_CONVEXITY, tol.metric);
    let lattice: Vec<(usize, usize)> = (0..grid)
        .flat_map(|i| (0..grid).map(move |j| (i, j)))
        .collect();
    for (k, &(i, j)) in lattice.iter().enumerate() {
        for &(i2, j2) in &lattice[k + 1..] {
            let mid = f(i + i2, j + j2);
            let avg = 0.5 * (f(2 * i, 2 * j) + f(2 * i2, 2 * j2));
            tracker.observe_scaled(mid - avg, tol.metric_at(avg), || {
                Witness::new()
                    .with("s_t", vec![us[2 * i], us[2 * j]])
                    .with("s2_t2", vec![us[2 * i2], us[2 * j2]])
                    .with("midpoint_distance", vec![mid])
                    .with("average_distance", vec![avg])
            });
        }
    }
    Ok(tracker
        .finish()
        .with_note("convexity is checked globally along the given geodesics"))
}

/// Where the comparison triangles come from.
#[derive(Clone, Debug)]
pub enum TriangleSampler {
    /// `count` triangles with vertices drawn within `radius`.
    Random { radius: f64 },
    /// The given triangles `(p, q, r)`; `count` is ignored.
    Fixed(Vec<[Point; 3]>),
}

/// The affine-selector geodesic midpoint of `q` and `r`.
pub fn geodesic_midpoint(
    space: &MetricSpace,
    q: &Point,
    r: &Point,
) -> Result<Point, GeodesicError> {
    Ok(factor_geodesic(space, q, r, Selector::Affine)?.at_fraction(0.5))
}

/// Length of the median from `p̄` in a Euclidean triangle with sides
/// `|p̄q̄| = a`, `|p̄r̄| = b`, `|q̄r̄| = c`.
pub fn comparison_median(a: f64, b: f64, c: f64) -> f64 {
    (0.25 * (2.0 * a * a + 2.0 * b * b - c * c)).max(0.0).sqrt()
}

/// The κ = 0 comparison: for each triangle `(p, q, r)` with geodesic
/// midpoint `m` of `q, r`, `d(p, m) <= |p̄ m̄|` in the Euclidean comparison
/// triangle. Triangles violating the triangle inequality beyond `τ` are
/// skipped and counted in a note.
pub fn cat0_four_point_check(
    space: &MetricSpace,
    sampler: &TriangleSampler,
    count: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ValidationReport, GeodesicError> {
    let triangles: Vec<[Point; 3]> = match sampler {
        TriangleSampler::Fixed(list) => list.clone(),
        TriangleSampler::Random { radius } => {
            if !(radius.is_finite() && *radius > 0.0) {
                return Err(GeodesicError::Invalid(format!(
                    "radius must be positive, got {radius}"
                )));
            }
            let mut rng = crate::sampling::seeded_rng(seed);
            (0..count)
                .map(|_| {
                    [
                        space.sample_point(&mut rng, *radius),
                        space.sample_point(&mut rng, *radius),
                        space.sample_point(&mut rng, *radius),
                    ]
                })
                .collect()
        }
    };

    let mut tracker = WorstTracker::new(CAT0_FOUR_POINT, tol.metric);
    let mut skipped = 0usize;
    for [p, q, r] in &triangles {
        let (a, b, c) = (
            space.distance(p, q)?,
            space.distance(p, r)?,
            space.distance(q, r)?,
        );
        let slack = tol.metric_at(a + b + c);
        if a > b + c + slack || b > a + c + slack || c > a + b + slack {
            skipped += 1;
            continue;
        }
        let m = geodesic_midpoint(space, q, r)?;
        let dpm = space.distance(p, &m)?;
        let median = comparison_median(a, b, c);
        tracker.observe_scaled(dpm - median, tol.metric_at(dpm.max(median)), || {
            Witness::new()
                .with("p", p.flatten())
                .with("q", q.flatten())
                .with("r", r.flatten())
                .with("m", m.flatten())
                .with("sides_pq_pr_qr", vec![a, b, c])
                .with("d_pm_and_comparison", vec![dpm, median])
        });
    }
    let mut report = tracker.finish();
    if skipped > 0 {
        report = report.with_note(format!("{skipped} degenerate triangle(s) skipped"));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::PhiFunction;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn plane(phi: PhiFunction) -> ProductSpace {
        ProductSpace::new(vec![MetricSpace::RealLine, MetricSpace::RealLine], phi).unwrap()
    }

    #[test]
    fn line_and_half_line() {
        let g = factor_geodesic(
            &MetricSpace::RealLine,
            &Point::scalar(0.0),
            &Point::scalar(5.0),
            Selector::Affine,
        )
        .unwrap();
        assert_eq!(g.length(), 5.0);
        assert_eq!(g.at(2.0), Point::scalar(2.0));
        let h = factor_geodesic(
            &MetricSpace::HalfLine,
            &Point::scalar(2.0),
            &Point::scalar(0.0),
            Selector::Affine,
        )
        .unwrap();
        assert_eq!(h.at(0.5), Point::scalar(1.5));
        assert_eq!(h.at(2.0), Point::scalar(0.0));
        assert!(geodesy_test(&MetricSpace::HalfLine, &h, 16, &tol())
            .unwrap()
            .passed());
    }

    #[test]
    fn taxicab_corner_path() {
        let l1 = MetricSpace::lp(2, 1.0).unwrap();
        let (x, y) = (Point::Coords(vec![0.0, 0.0]), Point::Coords(vec![1.0, 1.0]));
        let g = factor_geodesic(&l1, &x, &y, Selector::Corner(1)).unwrap();
        assert_eq!(g.length(), 2.0);
        assert_eq!(g.at(1.0), Point::Coords(vec![1.0, 0.0]));
        assert_eq!(g.at(1.5), Point::Coords(vec![1.0, 0.5]));
        assert!(geodesy_test(&l1, &g, 33, &tol()).unwrap().passed());
        let g2 = factor_geodesic(&l1, &x, &y, Selector::Corner(2)).unwrap();
        assert_eq!(g2.at(1.0), Point::Coords(vec![0.0, 1.0]));
        assert!(factor_geodesic(&l1, &x, &y, Selector::Corner(3)).is_err());
    }

    #[test]
    fn max_norm_corner_path() {
        let linf = MetricSpace::lp_inf(2).unwrap();
        let (x, y) = (Point::Coords(vec![0.0, 0.0]), Point::Coords(vec![2.0, 1.0]));
        let g = factor_geodesic(&linf, &x, &y, Selector::Corner(2)).unwrap();
        assert_eq!(g.at(1.0), Point::Coords(vec![1.0, 1.0]));
        assert!(geodesy_test(&linf, &g, 33, &tol()).unwrap().passed());
    }

    #[test]
    fn discrete_spaces_are_not_geodesic() {
        let d = MetricSpace::discrete(3).unwrap();
        assert!(matches!(
            factor_geodesic(&d, &Point::Index(0), &Point::Index(1), Selector::Affine),
            Err(GeodesicError::NotGeodesic(_))
        ));
    }

    #[test]
    fn euclidean_product_midpoint() {
        let prod = plane(PhiFunction::euclidean(2).unwrap());
        let g = product_geodesic(
            &prod,
            &Point::scalars(&[0.0, 0.0]),
            &Point::scalars(&[3.0, 4.0]),
            &[],
        )
        .unwrap();
        assert_eq!(g.length(), 5.0);
        assert_eq!(g.at(2.5), Point::scalars(&[1.5, 2.0]));
        let space = MetricSpace::product(prod.clone());
        assert!(geodesy_test(&space, &g, 64, &tol()).unwrap().passed());
        assert!(component_speed_check(&prod, &g, 64, &tol())
            .unwrap()
            .passed());
    }

    #[test]
    fn sum_product_over_half_lines() {
        let prod = ProductSpace::new(
            vec![MetricSpace::HalfLine, MetricSpace::HalfLine],
            PhiFunction::sum(2).unwrap(),
        )
        .unwrap();
        let g = product_geodesic(
            &prod,
            &Point::scalars(&[1.0, 0.0]),
            &Point::scalars(&[0.0, 1.0]),
            &[],
        )
        .unwrap();
        assert_eq!(g.length(), 2.0);
        assert_eq!(g.at(1.0), Point::scalars(&[0.5, 0.5]));
        assert!(geodesy_test(&MetricSpace::product(prod), &g, 64, &tol())
            .unwrap()
            .passed());
    }

    #[test]
    fn degenerate_and_refused_products() {
        let prod = plane(PhiFunction::euclidean(2).unwrap());
        let x = Point::scalars(&[1.0, 2.0]);
        let g = product_geodesic(&prod, &x, &x, &[]).unwrap();
        assert_eq!(g.length(), 0.0);
        assert_eq!(g.at(0.3), x);
        let two = plane(PhiFunction::two_valued(2).unwrap());
        assert!(matches!(
            product_geodesic(&two, &x, &Point::scalars(&[0.0, 0.0]), &[]),
            Err(GeodesicError::PhiNotNormInduced {
                class: PhiClass::MetricCompatible
            })
        ));
    }

    #[test]
    fn cubic_speed_path_is_not_geodesic() {
        let g = Geodesic::from_fn(
            MetricSpace::RealLine,
            Point::scalar(0.0),
            Point::scalar(1.0),
            1.0,
            "cubic",
            |t| Point::scalar(t.powi(3)),
        );
        let r = geodesy_test(&MetricSpace::RealLine, &g, 16, &tol()).unwrap();
        assert!(r.failed());
    }

    #[test]
    fn sum_plane_has_two_geodesics() {
        let prod = plane(PhiFunction::sum(2).unwrap());
        let probe = uniqueness_probe(
            &prod,
            &Point::scalars(&[0.0, 0.0]),
            &Point::scalars(&[1.0, 1.0]),
            &[],
            &UniquenessParams::default(),
            &tol(),
        )
        .unwrap();
        assert!(!probe.is_unique());
        assert!(probe.sup_distance > 0.1);
        assert_eq!(probe.geodesics.len(), 2);
        let space = MetricSpace::product(prod);
        for g in &probe.geodesics {
            assert_eq!(g.length(), 2.0);
            assert!(geodesy_test(&space, g, 33, &tol()).unwrap().passed());
        }
    }

    #[test]
    fn max_plane_has_wandering_geodesics() {
        let prod = plane(PhiFunction::max(2).unwrap());
        let probe = uniqueness_probe(
            &prod,
            &Point::scalars(&[0.0, 0.0]),
            &Point::scalars(&[1.0, 0.0]),
            &[],
            &UniquenessParams::default(),
            &tol(),
        )
        .unwrap();
        assert!(!probe.is_unique());
        // an explicit wandering geodesic (t, ε min(t, 1-t))
        let eps = 0.5;
        let g = Geodesic::from_fn(
            MetricSpace::product(prod.clone()),
            Point::scalars(&[0.0, 0.0]),
            Point::scalars(&[1.0, 0.0]),
            1.0,
            "wander",
            move |t| Point::scalars(&[t, eps * t.min(1.0 - t)]),
        );
        assert!(geodesy_test(&MetricSpace::product(prod), &g, 64, &tol())
            .unwrap()
            .passed());
    }

    #[test]
    fn euclidean_plane_is_uniquely_geodesic() {
        let prod = plane(PhiFunction::euclidean(2).unwrap());
        let probe = uniqueness_probe(
            &prod,
            &Point::scalars(&[-1.0, 2.0]),
            &Point::scalars(&[3.0, 0.5]),
            &[],
            &UniquenessParams::default(),
            &tol(),
        )
        .unwrap();
        assert!(probe.is_unique(), "{}", probe.report);
    }

    #[test]
    fn selector_sets_yield_candidates() {
        let l1 = MetricSpace::lp(2, 1.0).unwrap();
        let prod = ProductSpace::new(
            vec![l1, MetricSpace::RealLine],
            PhiFunction::euclidean(2).unwrap(),
        )
        .unwrap();
        let x = Point::Tuple(vec![Point::Coords(vec![0.0, 0.0]), Point::scalar(0.0)]);
        let y = Point::Tuple(vec![Point::Coords(vec![1.0, 1.0]), Point::scalar(1.0)]);
        let params = UniquenessParams {
            perturbations: 0,
            ..UniquenessParams::default()
        };
        let sets = vec![
            vec![Selector::Affine, Selector::Affine],
            vec![Selector::Corner(1), Selector::Affine],
        ];
        let probe = uniqueness_probe(&prod, &x, &y, &sets, &params, &tol()).unwrap();
        assert!(!probe.is_unique());
        assert_eq!(probe.report.samples, 2);
    }

    #[test]
    fn euclidean_segments_are_busemann_convex() {
        let e2 = MetricSpace::lp(2, 2.0).unwrap();
        let g1 = factor_geodesic(
            &e2,
            &Point::Coords(vec![0.0, 0.0]),
            &Point::Coords(vec![4.0, 1.0]),
            Selector::Affine,
        )
        .unwrap();
        let g2 = factor_geodesic(
            &e2,
            &Point::Coords(vec![1.0, 3.0]),
            &Point::Coords(vec![-2.0, 0.5]),
            Selector::Affine,
        )
        .unwrap();
        let r = busemann_convexity_check(&e2, &g1, &g2, 12, &tol()).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.samples, 144 * 143 / 2);
    }

    #[test]
    fn corner_against_diagonal_in_the_sum_plane() {
        let prod = plane(PhiFunction::sum(2).unwrap());
        let space = MetricSpace::product(prod.clone());
        let (x, y) = (Point::scalars(&[0.0, 0.0]), Point::scalars(&[1.0, 1.0]));
        let diagonal = product_geodesic(&prod, &x, &y, &[]).unwrap();
        let corner = Geodesic::concat(
            &product_geodesic(&prod, &x, &Point::scalars(&[1.0, 0.0]), &[]).unwrap(),
            &product_geodesic(&prod, &Point::scalars(&[1.0, 0.0]), &y, &[]).unwrap(),
        );
        let r = busemann_convexity_check(&space, &corner, &diagonal, 9, &tol()).unwrap();
        assert_ne!(r.verdict, Verdict::Undetermined);
    }

    #[test]
    fn sum_plane_triangle_fails_comparison() {
        let space = MetricSpace::product(plane(PhiFunction::sum(2).unwrap()));
        let tri = [
            Point::scalars(&[0.0, 0.0]),
            Point::scalars(&[2.0, 0.0]),
            Point::scalars(&[0.0, 2.0]),
        ];
        let r = cat0_four_point_check(&space, &TriangleSampler::Fixed(vec![tri]), 0, 0, &tol())
            .unwrap();
        assert!(r.failed());
        assert_eq!(r.worst_margin, 2.0);
        assert_eq!(r.witness.get("m").unwrap(), &[1.0, 1.0]);
    }

    #[test]
    fn euclidean_plane_passes_comparison() {
        let space = MetricSpace::product(plane(PhiFunction::euclidean(2).unwrap()));
        let r = cat0_four_point_check(
            &space,
            &TriangleSampler::Random { radius: 10.0 },
            500,
            0,
            &tol(),
        )
        .unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn median_formula() {
        assert_eq!(comparison_median(2.0, 2.0, 4.0), 0.0);
        assert!((comparison_median(3.0, 4.0, 5.0) - 2.5).abs() < 1e-15);
    }
}
