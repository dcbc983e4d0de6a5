//! Minkowski rank: declared values for catalog spaces, additivity over
//! products, the half-line counterexample, a brute-force finite embedding
//! oracle and the per-factor pseudonorm decomposition of an isometric
//! embedding of a normed space.

use crate::phi::PhiClass;
use crate::product::ProductSpace;
use crate::report::{ValidationReport, Witness, WorstTracker};
use crate::spaces::{Exponent, FiniteMetric, MetricSpace, Point, SpaceError};
use crate::Tolerances;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub const COUNTEREXAMPLE_LINE: &str = "counterexample-geodesic-line";
pub const ALPHA_ISOMETRY: &str = "alpha-isometry";
pub const ALPHA_BASE_INDEPENDENCE: &str = "alpha-base-independence";
pub const ALPHA_HOMOGENEITY: &str = "alpha-homogeneity";
pub const ALPHA_TRIANGLE: &str = "alpha-triangle";

/// Largest pattern the embedding oracle accepts.
pub const MAX_PATTERN: usize = 8;
/// Largest target sample the embedding oracle accepts.
pub const MAX_SAMPLE: usize = 64;

/// Scalars used in the homogeneity check of the decomposition.
pub const HOMOGENEITY_SCALARS: [f64; 5] = [-2.0, -0.5, 0.5, 2.0, 3.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RankError {
    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("phi is {class}; the decomposition needs a strictly convex norm")]
    NotStrictlyConvex { class: PhiClass },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum RankValue {
    Exact(usize),
    /// Only a lower bound is known.
    AtLeast(usize),
    Unknown,
}

impl fmt::Display for RankValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankValue::Exact(r) => write!(f, "{r}"),
            RankValue::AtLeast(r) => write!(f, ">= {r}"),
            RankValue::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankProvenance {
    /// Catalog metadata.
    Declared,
    /// Sum of factor ranks under a strictly convex norm `Φ`.
    Additivity,
    /// Sum of factor ranks as a lower bound only.
    CounterexampleLowerBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankRecord {
    pub space: String,
    pub rank: RankValue,
    pub provenance: RankProvenance,
    /// False when the value is a lower bound that may be strict.
    pub additivity_guaranteed: bool,
    /// Set only when the caller asserts local compactness, convexity and a
    /// cocompact isometry group; the quasi-Euclidean rank then equals `rank`.
    pub quasi_euclidean_equal: bool,
    /// Euclidean rank, reported only where it provably equals `rank`.
    pub euclidean_rank: Option<usize>,
    pub warnings: Vec<String>,
}

/// Rank metadata of a catalog space; products defer to [`product_rank`].
pub fn declared_rank(space: &MetricSpace) -> RankRecord {
    if let MetricSpace::Product(p) = space {
        return product_rank(p);
    }
    let rank = space
        .properties()
        .minkowski_rank
        .map_or(RankValue::Unknown, RankValue::Exact);
    let euclidean_rank = match space {
        MetricSpace::RealLine => Some(1),
        MetricSpace::Lp(lp) if lp.exponent == Exponent::Finite(2.0) => Some(lp.dimension),
        _ => None,
    };
    RankRecord {
        space: space.to_string(),
        rank,
        provenance: RankProvenance::Declared,
        additivity_guaranteed: true,
        quasi_euclidean_equal: false,
        euclidean_rank,
        warnings: Vec::new(),
    }
}

/// Rank of a product without asserting the quasi-Euclidean hypotheses.
pub fn product_rank(prod: &ProductSpace) -> RankRecord {
    product_rank_with(prod, false)
}

/// Rank of a product. Strictly convex norm `Φ`: the sum of the factor ranks.
/// Norm-induced but not strictly convex: the sum only as a lower bound.
/// Weaker `Φ` or an unknown factor rank: unknown.
pub fn product_rank_with(prod: &ProductSpace, assume_quasi_euclidean: bool) -> RankRecord {
    let class = prod.phi().class();
    let factor_ranks: Option<usize> = prod
        .factors()
        .iter()
        .map(|f| match declared_rank(f).rank {
            RankValue::Exact(r) => Some(r),
            _ => None,
        })
        .sum();
    let mut warnings = Vec::new();
    let (rank, provenance, guaranteed) = match factor_ranks {
        None => {
            warnings.push("a factor rank is unknown".to_string());
            (RankValue::Unknown, RankProvenance::Declared, false)
        }
        Some(sum) if class >= PhiClass::StrictlyConvexNorm => {
            (RankValue::Exact(sum), RankProvenance::Additivity, true)
        }
        Some(sum) if class >= PhiClass::NormInduced => {
            warnings.push(format!(
                "phi is {class}; additivity is not guaranteed and the rank may exceed {sum}"
            ));
            (
                RankValue::AtLeast(sum),
                RankProvenance::CounterexampleLowerBound,
                false,
            )
        }
        Some(_) => {
            warnings.push(format!("phi is {class}; no rank statement is available"));
            (RankValue::Unknown, RankProvenance::Declared, false)
        }
    };
    let quasi = assume_quasi_euclidean && guaranteed;
    if assume_quasi_euclidean && !guaranteed {
        warnings.push("the quasi-Euclidean rank is not additive for this phi".to_string());
    }
    RankRecord {
        space: prod.to_string(),
        rank,
        provenance,
        additivity_guaranteed: guaranteed,
        quasi_euclidean_equal: quasi,
        euclidean_rank: None,
        warnings,
    }
}

/// The sum-`Φ` product of two half-lines.
pub fn sum_half_lines() -> ProductSpace {
    ProductSpace::new(
        vec![MetricSpace::HalfLine, MetricSpace::HalfLine],
        crate::phi::PhiFunction::sum(2).expect("dimension 2 is valid"),
    )
    .expect("arity matches")
}

/// `c(t) = (-t, 0)` for `t <= 0` and `(0, t)` for `t >= 0`.
pub fn counterexample_line(t: f64) -> Point {
    if t <= 0.0 {
        Point::scalars(&[-t, 0.0])
    } else {
        Point::scalars(&[0.0, t])
    }
}

/// Verifies `d_Φ(c(s), c(t)) = |s - t|` exactly on `grid` evenly spaced
/// parameters in `[-T, T]`: a line embeds isometrically in a product of two
/// rank-zero factors.
pub fn counterexample_sum_halflines(
    t_max: f64,
    grid: usize,
) -> Result<ValidationReport, RankError> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(RankError::Invalid(format!(
            "T must be positive, got {t_max}"
        )));
    }
    if grid < 2 {
        return Err(RankError::Invalid(format!(
            "grid must have at least 2 points, got {grid}"
        )));
    }
    let prod = sum_half_lines();
    let ts: Vec<f64> = (0..grid)
        .map(|j| -t_max + 2.0 * t_max * j as f64 / (grid - 1) as f64)
        .collect();
    let points: Vec<Point> = ts.iter().map(|&t| counterexample_line(t)).collect();
    let mut tracker = WorstTracker::new(COUNTEREXAMPLE_LINE, 0.0);
    for i in 0..grid {
        for j in i..grid {
            let d = prod.distance(&points[i], &points[j])?;
            let gap = (d - (ts[j] - ts[i]).abs()).abs();
            tracker.observe(gap, || {
                Witness::new()
                    .with("s_t", vec![ts[i], ts[j]])
                    .with("distance", vec![d])
            });
        }
    }
    Ok(tracker.finish())
}

/// Result of an exhaustive search for an isometric copy of a finite pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingProbe {
    pub pattern: FiniteMetric,
    pub target: String,
    pub sample_size: usize,
    /// `assignment[k]` is the sample index of pattern point `k`; the
    /// lexicographically first match.
    pub assignment: Option<Vec<usize>>,
    /// Partial assignments visited.
    pub nodes: usize,
}

impl EmbeddingProbe {
    pub fn found(&self) -> bool {
        self.assignment.is_some()
    }
}

/// Searches injective maps from the pattern into `sample` that preserve
/// every pairwise distance within `τ_embed`, in lexicographic order.
pub fn finite_embedding_oracle(
    pattern: &FiniteMetric,
    sample: &[Point],
    space: &MetricSpace,
    tol: &Tolerances,
) -> Result<EmbeddingProbe, RankError> {
    if pattern.len() > MAX_PATTERN {
        return Err(RankError::BudgetExceeded(format!(
            "pattern has {} points, at most {MAX_PATTERN} allowed",
            pattern.len()
        )));
    }
    if sample.len() > MAX_SAMPLE {
        return Err(RankError::BudgetExceeded(format!(
            "sample has {} points, at most {MAX_SAMPLE} allowed",
            sample.len()
        )));
    }
    let n = sample.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = space.distance(&sample[i], &sample[j])?;
        }
    }

    let k = pattern.len();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut used = vec![false; n];
    let mut nodes = 0usize;
    let found = extend(
        pattern,
        &dist,
        n,
        tol.embed,
        &mut chosen,
        &mut used,
        &mut nodes,
    );
    Ok(EmbeddingProbe {
        pattern: pattern.clone(),
        target: space.to_string(),
        sample_size: n,
        assignment: found.then_some(chosen),
        nodes,
    })
}

fn extend(
    pattern: &FiniteMetric,
    dist: &[f64],
    n: usize,
    tol: f64,
    chosen: &mut Vec<usize>,
    used: &mut [bool],
    nodes: &mut usize,
) -> bool {
    let k = chosen.len();
    if k == pattern.len() {
        return true;
    }
    for cand in 0..n {
        if used[cand] {
            continue;
        }
        *nodes += 1;
        let fits = chosen
            .iter()
            .enumerate()
            .all(|(j, &s)| (dist[s * n + cand] - pattern.get(j, k)).abs() <= tol);
        if !fits {
            continue;
        }
        chosen.push(cand);
        used[cand] = true;
        if extend(pattern, dist, n, tol, chosen, used, nodes) {
            return true;
        }
        used[cand] = false;
        chosen.pop();
    }
    false
}

/// Per-factor functions `α_i(a, v) = d_i(φ_i(a), φ_i(a + v))` on a vector grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaDecomposition {
    pub base_a: Vec<f64>,
    pub base_b: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// `alpha_a[k][i] = α_i(a, vectors[k])`.
    pub alpha_a: Vec<Vec<f64>>,
    /// `alpha_b[k][i] = α_i(b, vectors[k])`.
    pub alpha_b: Vec<Vec<f64>>,
}

/// Decomposes a claimed isometric embedding `φ: (R^m, |·|) → (X, d_Φ)` into
/// the per-factor functions `α_i` and checks the pseudonorm properties:
/// the isometry identity `Φ(α(a, v)) = |v|` (relative to `|v|`), base
/// independence `α_i(a, v) = α_i(b, v)`, homogeneity
/// `α_i(a, λv) = |λ| α_i(a, v)` and the triangle inequality
/// `α_i(a, v + w) <= α_i(a, v) + α_i(a, w)`.
///
/// Reports are returned in that order; a failed isometry identity means the
/// map is not an isometric embedding, and the decomposition is still returned.
pub fn alpha_decompose(
    embedding: &dyn Fn(&[f64]) -> Point,
    source_norm: &dyn Fn(&[f64]) -> f64,
    prod: &ProductSpace,
    a: &[f64],
    b: &[f64],
    vectors: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<(AlphaDecomposition, Vec<ValidationReport>), RankError> {
    let class = prod.phi().class();
    if class < PhiClass::StrictlyConvexNorm {
        return Err(RankError::NotStrictlyConvex { class });
    }
    if a.len() != b.len() || vectors.iter().any(|v| v.len() != a.len()) {
        return Err(RankError::Invalid(
            "base points and vectors must share a dimension".into(),
        ));
    }
    let shift = |p: &[f64], v: &[f64], s: f64| -> Vec<f64> {
        p.iter().zip(v).map(|(x, y)| x + s * y).collect()
    };
    let alpha = |base: &[f64], v: &[f64]| -> Result<Vec<f64>, RankError> {
        Ok(prod.distance_vector(&embedding(base), &embedding(&shift(base, v, 1.0)))?)
    };

    let alpha_a = vectors
        .iter()
        .map(|v| alpha(a, v))
        .collect::<Result<Vec<_>, _>>()?;
    let alpha_b = vectors
        .iter()
        .map(|v| alpha(b, v))
        .collect::<Result<Vec<_>, _>>()?;

    let mut isometry = WorstTracker::new(ALPHA_ISOMETRY, tol.metric);
    for (v, (aa, ab)) in vectors.iter().zip(alpha_a.iter().zip(&alpha_b)) {
        let norm = source_norm(v);
        for (label, al) in [("alpha_at_a", aa), ("alpha_at_b", ab)] {
            let phi = prod.phi().eval_unchecked(al);
            let gap = if norm > 0.0 {
                (phi - norm).abs() / norm
            } else {
                phi
            };
            isometry.observe(gap, || {
                Witness::new()
                    .with("v", v.clone())
                    .with(label, al.clone())
                    .with("phi_alpha_and_norm", vec![phi, norm])
            });
        }
    }

    let mut base = WorstTracker::new(ALPHA_BASE_INDEPENDENCE, tol.metric);
    for (v, (aa, ab)) in vectors.iter().zip(alpha_a.iter().zip(&alpha_b)) {
        for i in 0..aa.len() {
            let gap = (aa[i] - ab[i]).abs();
            base.observe_scaled(gap, tol.metric_at(aa[i].max(ab[i])), || {
                Witness::new()
                    .with("v", v.clone())
                    .with("factor", vec![i as f64])
                    .with("alpha_a_alpha_b", vec![aa[i], ab[i]])
            });
        }
    }

    let mut homogeneity = WorstTracker::new(ALPHA_HOMOGENEITY, tol.metric);
    for (v, aa) in vectors.iter().zip(&alpha_a) {
        for lambda in HOMOGENEITY_SCALARS {
            let scaled = alpha(a, &shift(&vec![0.0; v.len()], v, lambda))?;
            for i in 0..aa.len() {
                let expected = lambda.abs() * aa[i];
                let gap = (scaled[i] - expected).abs();
                homogeneity.observe_scaled(gap, tol.metric_at(expected), || {
                    Witness::new()
                        .with("v", v.clone())
                        .with("lambda", vec![lambda])
                        .with("factor", vec![i as f64])
                        .with("scaled_and_expected", vec![scaled[i], expected])
                });
            }
        }
    }

    let mut triangle = WorstTracker::new(ALPHA_TRIANGLE, tol.metric);
    for (k, v) in vectors.iter().enumerate() {
        for (l, w) in vectors.iter().enumerate().skip(k) {
            let sum = alpha(a, &shift(v, w, 1.0))?;
            for i in 0..sum.len() {
                let bound = alpha_a[k][i] + alpha_a[l][i];
                triangle.observe_scaled(sum[i] - bound, tol.metric_at(bound), || {
                    Witness::new()
                        .with("v", v.clone())
                        .with("w", w.clone())
                        .with("factor", vec![i as f64])
                        .with("alpha_sum_and_bound", vec![sum[i], bound])
                });
            }
        }
    }

    let mut iso = isometry.finish();
    if iso.failed() {
        iso = iso.with_note("not an isometric embedding");
    }
    let reports = vec![iso, base.finish(), homogeneity.finish(), triangle.finish()];
    Ok((
        AlphaDecomposition {
            base_a: a.to_vec(),
            base_b: b.to_vec(),
            vectors: vectors.to_vec(),
            alpha_a,
            alpha_b,
        },
        reports,
    ))
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
    fn declared_catalog_ranks() {
        assert_eq!(
            declared_rank(&MetricSpace::HalfLine).rank,
            RankValue::Exact(0)
        );
        let l = declared_rank(&MetricSpace::lp(3, 2.0).unwrap());
        assert_eq!(l.rank, RankValue::Exact(3));
        assert_eq!(l.euclidean_rank, Some(3));
        assert_eq!(
            declared_rank(&MetricSpace::lp(3, 1.0).unwrap()).euclidean_rank,
            None
        );
        assert_eq!(
            declared_rank(&MetricSpace::discrete(7).unwrap()).rank,
            RankValue::Exact(0)
        );
        assert_eq!(
            declared_rank(&MetricSpace::RealLine).provenance,
            RankProvenance::Declared
        );
    }

    #[test]
    fn additivity_under_euclidean_phi() {
        let p = ProductSpace::new(
            vec![MetricSpace::RealLine, MetricSpace::HalfLine],
            PhiFunction::euclidean(2).unwrap(),
        )
        .unwrap();
        let r = product_rank(&p);
        assert_eq!(r.rank, RankValue::Exact(1));
        assert_eq!(r.provenance, RankProvenance::Additivity);
        let q = ProductSpace::new(
            vec![
                MetricSpace::lp(2, 2.0).unwrap(),
                MetricSpace::lp(3, 2.0).unwrap(),
            ],
            PhiFunction::euclidean(2).unwrap(),
        )
        .unwrap();
        assert_eq!(product_rank(&q).rank, RankValue::Exact(5));
    }

    #[test]
    fn sum_phi_only_bounds_the_rank() {
        let r = product_rank(&sum_half_lines());
        assert_eq!(r.rank, RankValue::AtLeast(0));
        assert_eq!(r.provenance, RankProvenance::CounterexampleLowerBound);
        assert!(!r.additivity_guaranteed);
        let q = product_rank_with(&sum_half_lines(), true);
        assert!(!q.quasi_euclidean_equal);
        assert!(q.warnings.iter().any(|w| w.contains("quasi-Euclidean")));
    }

    #[test]
    fn weak_phi_and_asserted_hypotheses() {
        assert_eq!(
            product_rank(&plane(PhiFunction::two_valued(2).unwrap())).rank,
            RankValue::Unknown
        );
        let r = product_rank_with(&plane(PhiFunction::euclidean(2).unwrap()), true);
        assert!(r.quasi_euclidean_equal);
        assert_eq!(r.rank, RankValue::Exact(2));
    }

    #[test]
    fn counterexample_line_is_exact() {
        let prod = sum_half_lines();
        assert_eq!(
            prod.distance(&counterexample_line(-1.0), &counterexample_line(1.0)),
            Ok(2.0)
        );
        assert_eq!(
            prod.distance(&counterexample_line(-3.0), &counterexample_line(-1.0)),
            Ok(2.0)
        );
        assert_eq!(
            prod.distance(&counterexample_line(0.5), &counterexample_line(0.5)),
            Ok(0.0)
        );
        let r = counterexample_sum_halflines(10.0, 101).unwrap();
        assert!(r.passed());
        assert_eq!(r.worst_margin, 0.0);
        assert_eq!(r.samples, 101 * 102 / 2);
    }

    fn line_grid(n: usize, step: f64) -> Vec<Point> {
        (0..n).map(|i| Point::scalar(i as f64 * step)).collect()
    }

    #[test]
    fn three_point_line_in_the_half_line() {
        let pattern = FiniteMetric::new(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ])
        .unwrap();
        let probe = finite_embedding_oracle(
            &pattern,
            &line_grid(21, 0.5),
            &MetricSpace::HalfLine,
            &tol(),
        )
        .unwrap();
        assert_eq!(probe.assignment, Some(vec![0, 2, 4]));
    }

    #[test]
    fn equilateral_triple_misses_the_line() {
        let pattern = FiniteMetric::new(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        let probe = finite_embedding_oracle(
            &pattern,
            &line_grid(64, 0.25),
            &MetricSpace::RealLine,
            &tol(),
        )
        .unwrap();
        assert!(!probe.found());
    }

    #[test]
    fn oracle_budget() {
        let big = FiniteMetric::new(
            (0..9)
                .map(|i| (0..9).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
                .collect(),
        )
        .unwrap();
        assert!(matches!(
            finite_embedding_oracle(&big, &[], &MetricSpace::RealLine, &tol()),
            Err(RankError::BudgetExceeded(_))
        ));
        let small = FiniteMetric::new(vec![vec![0.0]]).unwrap();
        assert!(matches!(
            finite_embedding_oracle(&small, &line_grid(65, 1.0), &MetricSpace::RealLine, &tol()),
            Err(RankError::BudgetExceeded(_))
        ));
    }

    fn grid_vectors() -> Vec<Vec<f64>> {
        [-2.0, -1.0, -0.25, 0.0, 0.5, 1.0, 1.5]
            .iter()
            .map(|&v| vec![v])
            .collect()
    }

    fn decompose(embed: fn(&[f64]) -> Point) -> Vec<ValidationReport> {
        let prod = plane(PhiFunction::euclidean(2).unwrap());
        let norm = |v: &[f64]| v[0].abs();
        alpha_decompose(
            &embed,
            &norm,
            &prod,
            &[0.3],
            &[-1.7],
            &grid_vectors(),
            &tol(),
        )
        .unwrap()
        .1
    }

    #[test]
    fn axis_embedding_decomposes() {
        let reports = decompose(|t| Point::scalars(&[t[0], 0.0]));
        assert!(reports.iter().all(ValidationReport::passed));
    }

    #[test]
    fn rescaled_diagonal_decomposes() {
        use std::f64::consts::FRAC_1_SQRT_2 as S;
        let reports = decompose(|t| Point::scalars(&[t[0] * S, t[0] * S]));
        assert!(reports.iter().all(ValidationReport::passed), "{reports:?}");
    }

    #[test]
    fn unrescaled_diagonal_is_not_isometric() {
        let reports = decompose(|t| Point::scalars(&[t[0], t[0]]));
        assert!(reports[0].failed());
        assert!((reports[0].worst_margin - (2f64.sqrt() - 1.0)).abs() < 1e-9);
        assert!(reports[1..].iter().all(ValidationReport::passed));
    }

    #[test]
    fn decomposition_needs_strict_convexity() {
        let prod = plane(PhiFunction::sum(2).unwrap());
        let embed = |t: &[f64]| Point::scalars(&[t[0], 0.0]);
        let norm = |v: &[f64]| v[0].abs();
        assert!(matches!(
            alpha_decompose(
                &embed,
                &norm,
                &prod,
                &[0.0],
                &[1.0],
                &grid_vectors(),
                &tol()
            ),
            Err(RankError::NotStrictlyConvex {
                class: PhiClass::NormInduced
            })
        ));
    }
}
