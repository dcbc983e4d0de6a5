//! Sampled checks of the conditions on `Φ`.
//!
//! Each check combines deliberate corner cases (zero, axis vectors, equal
//! components, tiny components) with quasi-uniform samples of `[0, R]ⁿ`.
//! Corner cases are evaluated first so exact witnesses win ties.

use super::{PhiFunction, PsiNorm};
use crate::report::{ValidationReport, Verdict, Witness, WorstTracker};
use crate::sampling::{derive_seed, QuasiUniform};
use crate::Tolerances;
use serde::{Deserialize, Serialize};

pub const CONDITION_A: &str = "condition-A";
pub const CONDITION_B: &str = "condition-B";
pub const POSITIVITY: &str = "condition-1-positivity";
pub const MONOTONICITY: &str = "condition-2-monotonicity";
pub const SUBADDITIVITY: &str = "condition-3-subadditivity";
pub const HOMOGENEITY: &str = "condition-4-homogeneity";
pub const CONDITION_5: &str = "condition-5-orthogonality";
pub const STRICT_CONVEXITY: &str = "strict-convexity";

const TINY: f64 = 1e-6;
/// Minimum Ψ-distance between `x` and `±y` for a strict convexity sample.
const SEPARATION: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerParams {
    pub count: usize,
    pub seed: u64,
    /// Side length `R` of the sampled box `[0, R]ⁿ`.
    pub radius: f64,
    pub tolerances: Tolerances,
}

impl Default for SamplerParams {
    fn default() -> Self {
        SamplerParams {
            count: 10_000,
            seed: 0,
            radius: 10.0,
            tolerances: Tolerances::default(),
        }
    }
}

impl SamplerParams {
    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn quasi(&self, dimension: usize, stream: u64) -> QuasiUniform {
        QuasiUniform::new(dimension, derive_seed(self.seed, stream))
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

fn leq(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn axis(n: usize, i: usize, value: f64) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = value;
    e
}

/// Nonzero corner vectors of `Qⁿ`: scaled axis vectors, constant vectors and
/// mixes of tiny and unit components.
fn corners(n: usize, radius: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..n {
        for v in [1.0, TINY, radius / 2.0] {
            out.push(axis(n, i, v));
        }
    }
    for v in [1.0, TINY, radius] {
        out.push(vec![v; n]);
    }
    if n > 1 {
        let mut mixed = vec![1.0; n];
        mixed[0] = TINY;
        out.push(mixed);
        let mut mixed = vec![TINY; n];
        mixed[n - 1] = radius;
        out.push(mixed);
    }
    out
}

fn quadrant_point(u: &[f64], radius: f64) -> Vec<f64> {
    u.iter().map(|x| x * radius).collect()
}

/// `(A)`: `Φ ≥ 0` and `Φ(q) = 0 ⇔ q = 0`.
///
/// The margin is `Φ(0)` at the origin and `-Φ(q)` elsewhere; a nonzero `q`
/// fails when `Φ(q) ≤ τ`.
pub fn check_condition_a(phi: &PhiFunction, params: &SamplerParams) -> ValidationReport {
    positivity_report(phi, params, CONDITION_A, 1)
}

fn positivity_report(
    phi: &PhiFunction,
    params: &SamplerParams,
    id: &str,
    stream: u64,
) -> ValidationReport {
    let n = phi.dimension();
    let tau = params.tolerances.metric;
    let mut t = WorstTracker::new(id, tau);
    let zero = vec![0.0; n];
    let at_zero = phi.eval_unchecked(&zero);
    t.observe_with(at_zero, !(at_zero.abs() <= tau), || {
        Witness::new()
            .with("q", zero.clone())
            .with("phi", vec![at_zero])
    });
    let probe = |q: Vec<f64>, t: &mut WorstTracker| {
        let v = phi.eval_unchecked(&q);
        t.observe_with(-v, !(v > tau), || {
            Witness::new().with("q", q).with("phi", vec![v])
        });
    };
    for q in corners(n, params.radius) {
        probe(q, &mut t);
    }
    let mut quasi = params.quasi(n, stream);
    for _ in 0..params.count {
        let q = quadrant_point(&quasi.next_point(), params.radius);
        if q.iter().all(|&x| x == 0.0) {
            continue;
        }
        probe(q, &mut t);
    }
    t.finish()
}

/// Excess `Φ(q_j) - Φ(q_k) - Φ(q_l)` of one triple, or `None` when the
/// hypothesis `q_j ≤ q_k + q_l` does not hold.
pub fn condition_b_excess(phi: &PhiFunction, qj: &[f64], qk: &[f64], ql: &[f64]) -> Option<f64> {
    if !leq(qj, &add(qk, ql)) {
        return None;
    }
    Some(phi.eval_unchecked(qj) - phi.eval_unchecked(qk) - phi.eval_unchecked(ql))
}

/// `(B)`: for all `q¹, q², q³` and every permutation with `q^j ≤ q^k + q^l`,
/// `Φ(q^j) ≤ Φ(q^k) + Φ(q^l)`.
///
/// Samples rotate through three shapes: `r = s ⊙ (p + q)` with `s ∈ [0,1)ⁿ`,
/// the sum triple `r = p + q`, and the doubled triple `(p', q, q)` with
/// `p' ≤ 2q`. Every permutation whose hypothesis holds is checked.
pub fn check_condition_b(phi: &PhiFunction, params: &SamplerParams) -> ValidationReport {
    let n = phi.dimension();
    let tol = params.tolerances;
    let mut t = WorstTracker::new(CONDITION_B, tol.metric);
    let triple = |a: Vec<f64>, b: Vec<f64>, c: Vec<f64>, t: &mut WorstTracker| {
        let pts = [&a, &b, &c];
        for (j, k, l) in [(0, 1, 2), (1, 0, 2), (2, 0, 1)] {
            let (qj, qk, ql) = (pts[j], pts[k], pts[l]);
            if let Some(excess) = condition_b_excess(phi, qj, qk, ql) {
                let bound = phi.eval_unchecked(qk) + phi.eval_unchecked(ql);
                t.observe_scaled(excess, tol.metric_at(bound), || {
                    Witness::new()
                        .with("q_j", qj.clone())
                        .with("q_k", qk.clone())
                        .with("q_l", ql.clone())
                        .with(
                            "phi",
                            vec![
                                phi.eval_unchecked(qj),
                                phi.eval_unchecked(qk),
                                phi.eval_unchecked(ql),
                            ],
                        )
                });
            }
        }
    };

    let mut cs = corners(n, params.radius);
    cs.push(vec![0.0; n]);
    for a in &cs {
        for b in &cs {
            triple(add(a, b), a.clone(), b.clone(), &mut t);
            let doubled = scale(b, 2.0);
            if leq(a, &doubled) {
                triple(a.clone(), b.clone(), b.clone(), &mut t);
            }
        }
    }

    let mut quasi = params.quasi(3 * n, 2);
    for k in 0..params.count {
        let u = quasi.next_point();
        let p = quadrant_point(&u[..n], params.radius);
        let q = quadrant_point(&u[n..2 * n], params.radius);
        let s = &u[2 * n..];
        match k % 3 {
            0 => {
                let r: Vec<f64> = add(&p, &q).iter().zip(s).map(|(x, f)| x * f).collect();
                triple(r, p, q, &mut t);
            }
            1 => triple(add(&p, &q), p, q, &mut t),
            _ => {
                let p2: Vec<f64> = q.iter().zip(s).map(|(x, f)| 2.0 * x * f).collect();
                triple(p2, q.clone(), q, &mut t);
            }
        }
    }
    t.finish()
        .with_note("every permutation whose hypothesis q_j <= q_k + q_l holds is checked")
}

/// Conditions (1)-(4): positivity, monotonicity, subadditivity and positive
/// homogeneity on the quadrant, in that order.
pub fn check_conditions_1_to_4(phi: &PhiFunction, params: &SamplerParams) -> Vec<ValidationReport> {
    vec![
        positivity_report(phi, params, POSITIVITY, 3),
        check_monotonicity(phi, params),
        check_subadditivity(phi, params),
        check_homogeneity(phi, params),
    ]
}

fn check_monotonicity(phi: &PhiFunction, params: &SamplerParams) -> ValidationReport {
    let n = phi.dimension();
    let tol = params.tolerances;
    let mut t = WorstTracker::new(MONOTONICITY, tol.metric);
    let pair = |lo: Vec<f64>, hi: Vec<f64>, t: &mut WorstTracker| {
        let (a, b) = (phi.eval_unchecked(&lo), phi.eval_unchecked(&hi));
        t.observe_scaled(a - b, tol.metric_at(b), || {
            Witness::new()
                .with("q", lo)
                .with("p", hi)
                .with("phi", vec![a, b])
        });
    };
    let mut cs = corners(n, params.radius);
    cs.push(vec![0.0; n]);
    for a in &cs {
        for b in &cs {
            pair(a.clone(), add(a, b), &mut t);
        }
    }
    let mut quasi = params.quasi(3 * n, 4);
    for _ in 0..params.count {
        let u = quasi.next_point();
        let q = quadrant_point(&u[..n], params.radius);
        let inc: Vec<f64> = (0..n)
            .map(|i| {
                if u[2 * n + i] < 0.5 {
                    0.0
                } else {
                    u[n + i] * params.radius
                }
            })
            .collect();
        let p = add(&q, &inc);
        pair(q, p, &mut t);
    }
    t.finish()
}

fn check_subadditivity(phi: &PhiFunction, params: &SamplerParams) -> ValidationReport {
    let n = phi.dimension();
    let tol = params.tolerances;
    let mut t = WorstTracker::new(SUBADDITIVITY, tol.metric);
    let pair = |p: Vec<f64>, q: Vec<f64>, t: &mut WorstTracker| {
        let s = add(&p, &q);
        let (a, b, c) = (
            phi.eval_unchecked(&s),
            phi.eval_unchecked(&p),
            phi.eval_unchecked(&q),
        );
        t.observe_scaled(a - b - c, tol.metric_at(b + c), || {
            Witness::new()
                .with("p", p)
                .with("q", q)
                .with("phi", vec![a, b, c])
        });
    };
    let mut cs = corners(n, params.radius);
    cs.push(vec![0.0; n]);
    for a in &cs {
        for b in &cs {
            pair(a.clone(), b.clone(), &mut t);
        }
    }
    let mut quasi = params.quasi(2 * n, 5);
    for _ in 0..params.count {
        let u = quasi.next_point();
        pair(
            quadrant_point(&u[..n], params.radius),
            quadrant_point(&u[n..], params.radius),
            &mut t,
        );
    }
    t.finish()
}

fn check_homogeneity(phi: &PhiFunction, params: &SamplerParams) -> ValidationReport {
    let n = phi.dimension();
    let tol = params.tolerances;
    let mut t = WorstTracker::new(HOMOGENEITY, tol.metric);
    let probe = |lambda: f64, q: Vec<f64>, t: &mut WorstTracker| {
        let lhs = phi.eval_unchecked(&scale(&q, lambda));
        let rhs = lambda * phi.eval_unchecked(&q);
        t.observe_scaled((lhs - rhs).abs(), tol.metric_at(rhs), || {
            Witness::new()
                .with("lambda", vec![lambda])
                .with("q", q)
                .with("phi", vec![lhs, rhs])
        });
    };
    for q in corners(n, params.radius) {
        for lambda in [2.0, 0.5, 3.0, 0.0] {
            probe(lambda, q.clone(), &mut t);
        }
    }
    let mut quasi = params.quasi(n + 1, 6);
    for _ in 0..params.count {
        let u = quasi.next_point();
        probe(4.0 * u[n], quadrant_point(&u[..n], params.radius), &mut t);
    }
    t.finish()
}

/// `Φ²(Σ λ_i e_i) - Σ Φ²(λ_i e_i)`.
pub fn condition_5_defect(phi: &PhiFunction, lambda: &[f64]) -> f64 {
    let n = phi.dimension();
    let whole = phi.eval_unchecked(lambda).powi(2);
    let parts: f64 = (0..n)
        .map(|i| phi.eval_unchecked(&axis(n, i, lambda[i])).powi(2))
        .sum();
    whole - parts
}

/// Condition (5): `Φ²(Σ λ_i e_i) = Σ Φ²(λ_i e_i)` for all `λ_i > 0`.
pub fn check_condition_5(phi: &PhiFunction, params: &SamplerParams) -> ValidationReport {
    let n = phi.dimension();
    let tol = params.tolerances;
    let mut t = WorstTracker::new(CONDITION_5, tol.metric);
    let probe = |lambda: Vec<f64>, t: &mut WorstTracker| {
        let defect = condition_5_defect(phi, &lambda);
        let scale = phi.eval_unchecked(&lambda).powi(2);
        t.observe_scaled(defect.abs(), tol.metric_at(scale), || {
            Witness::new()
                .with("lambda", lambda)
                .with("defect", vec![defect])
        });
    };
    probe(vec![1.0; n], &mut t);
    for q in corners(n, params.radius) {
        probe(
            q.iter().map(|&x| if x == 0.0 { 1.0 } else { x }).collect(),
            &mut t,
        );
    }
    let mut quasi = params.quasi(n, 7);
    for _ in 0..params.count {
        let lambda: Vec<f64> = quasi
            .next_point()
            .iter()
            .map(|u| TINY + u * params.radius)
            .collect();
        probe(lambda, &mut t);
    }
    t.finish()
}

/// Strict convexity of the unit ball of `Ψ`.
///
/// Requires `Φ` to pass (1)-(4); otherwise the verdict is undetermined.
pub fn check_strict_convexity(psi: &PsiNorm, params: &SamplerParams) -> ValidationReport {
    let pre = check_conditions_1_to_4(psi.phi(), params);
    if let Some(bad) = pre.iter().find(|r| !r.passed()) {
        return ValidationReport::undetermined(
            STRICT_CONVEXITY,
            format!(
                "precondition {} did not pass; Ψ is not known to be a norm",
                bad.condition
            ),
        );
    }
    strict_convexity_unchecked(psi, params)
}

/// Samples pairs of unit vectors `x, y` with `Ψ(x ∓ y) ≥ 1/4` and fails when
/// `Ψ((x + y)/2) ≥ 1 - τ_strict`. The margin is `Ψ((x + y)/2) - 1`.
pub(crate) fn strict_convexity_unchecked(
    psi: &PsiNorm,
    params: &SamplerParams,
) -> ValidationReport {
    let n = psi.dimension();
    let slack = params.tolerances.strict;
    if n == 1 {
        return ValidationReport {
            condition: STRICT_CONVEXITY.into(),
            verdict: Verdict::Pass,
            samples: 0,
            worst_margin: 0.0,
            tolerance: slack,
            witness: Witness::new(),
            notes: vec![
                "one-dimensional unit balls have no non-parallel pairs; holds vacuously".into(),
            ],
        };
    }
    let mut t = WorstTracker::new(STRICT_CONVEXITY, slack);
    let probe = |x: Vec<f64>, y: Vec<f64>, t: &mut WorstTracker| {
        let (nx, ny) = (psi.eval_unchecked(&x), psi.eval_unchecked(&y));
        if !(nx > 0.0 && ny > 0.0) {
            return;
        }
        let x = scale(&x, 1.0 / nx);
        let y = scale(&y, 1.0 / ny);
        let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let sum = add(&x, &y);
        if psi.eval_unchecked(&diff) < SEPARATION || psi.eval_unchecked(&sum) < SEPARATION {
            return;
        }
        let mid = psi.eval_unchecked(&scale(&sum, 0.5));
        let margin = mid - 1.0;
        t.observe_with(margin, margin >= -slack, || {
            Witness::new()
                .with("x", x)
                .with("y", y)
                .with("psi_midpoint", vec![mid])
        });
    };
    for i in 0..n {
        for j in (i + 1)..n {
            probe(axis(n, i, 1.0), axis(n, j, 1.0), &mut t);
            let mut plus = axis(n, i, 1.0);
            plus[j] = 1.0;
            let mut minus = axis(n, i, 1.0);
            minus[j] = -1.0;
            probe(plus, minus, &mut t);
        }
    }
    let ones = vec![1.0; n];
    for i in 0..n {
        let mut flipped = ones.clone();
        flipped[i] = -1.0;
        probe(ones.clone(), flipped, &mut t);
    }
    let mut quasi = params.quasi(2 * n, 8);
    for _ in 0..params.count {
        let u = quasi.next_point();
        let x = u[..n].iter().map(|v| 2.0 * v - 1.0).collect();
        let y = u[n..].iter().map(|v| 2.0 * v - 1.0).collect();
        probe(x, y, &mut t);
    }
    t.finish()
        .with_note("fails when the midpoint of separated unit vectors has norm >= 1 - tolerance")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Exponent;

    fn small() -> SamplerParams {
        SamplerParams::default().with_count(2_000)
    }

    #[test]
    fn weighted_lp_passes_condition_a() {
        for phi in [
            PhiFunction::lp(3, 1.5).unwrap(),
            PhiFunction::weighted_lp(Exponent::Infinity, vec![1.0, 2.0]).unwrap(),
            PhiFunction::weighted_lp(Exponent::Finite(1.0), vec![0.1, 5.0]).unwrap(),
        ] {
            assert!(check_condition_a(&phi, &small()).passed(), "{phi}");
        }
    }

    #[test]
    fn first_coordinate_fails_condition_a_at_axis() {
        let phi = PhiFunction::coordinate_power(2, 0, 1.0).unwrap();
        let r = check_condition_a(&phi, &small());
        assert!(r.failed());
        let q = r.witness.get("q").unwrap();
        assert_eq!(q[0], 0.0);
        assert!(q[1] > 0.0);
        assert_eq!(phi.eval(&[0.0, 1.0]), Ok(0.0));
    }

    #[test]
    fn two_valued_passes_a_and_b() {
        let phi = PhiFunction::two_valued(2).unwrap();
        assert!(check_condition_a(&phi, &small()).passed());
        assert!(check_condition_b(&phi, &small()).passed());
    }

    #[test]
    fn euclidean_sample_triple_contributes_pass() {
        let phi = PhiFunction::euclidean(2).unwrap();
        let e = condition_b_excess(&phi, &[1.0, 1.0], &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((e - (2f64.sqrt() - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn squared_coordinate_fails_condition_b() {
        let phi = PhiFunction::coordinate_power(1, 0, 2.0).unwrap();
        assert_eq!(condition_b_excess(&phi, &[2.0], &[1.0], &[1.0]), Some(2.0));
        let r = check_condition_b(&phi, &small());
        assert!(r.failed());
        let (j, k, l) = (
            r.witness.get("q_j").unwrap()[0],
            r.witness.get("q_k").unwrap()[0],
            r.witness.get("q_l").unwrap()[0],
        );
        assert!(j <= k + l);
        assert!(j * j > k * k + l * l);
    }

    #[test]
    fn hypothesis_gate_in_condition_b() {
        let phi = PhiFunction::sum(1).unwrap();
        assert_eq!(condition_b_excess(&phi, &[3.0], &[1.0], &[1.0]), None);
    }

    #[test]
    fn sum_and_lp3_pass_conditions_1_to_4() {
        for phi in [
            PhiFunction::sum(3).unwrap(),
            PhiFunction::lp(2, 3.0).unwrap(),
        ] {
            for r in check_conditions_1_to_4(&phi, &small()) {
                assert!(r.passed(), "{phi}: {r}");
            }
        }
    }

    #[test]
    fn two_valued_fails_homogeneity_only() {
        let phi = PhiFunction::two_valued(2).unwrap();
        let reports = check_conditions_1_to_4(&phi, &small());
        assert!(reports[0].passed());
        assert!(reports[1].passed());
        assert!(reports[2].passed());
        let h = &reports[3];
        assert!(h.failed());
        let lambda = h.witness.get("lambda").unwrap()[0];
        let vals = h.witness.get("phi").unwrap();
        assert!([1.0, 2.0].contains(&vals[0]) || vals[0] == 0.0);
        assert_ne!(vals[0], vals[1]);
        assert!(lambda != 1.0);
    }

    #[test]
    fn non_monotone_custom_fails_monotonicity() {
        // Φ(q) = |q1 - q2| + small: not monotone in q2
        let phi =
            PhiFunction::custom(2, "gap", |q| (q[0] - q[1]).abs() + 0.1 * (q[0] + q[1])).unwrap();
        let reports = check_conditions_1_to_4(&phi, &small());
        assert!(reports[1].failed());
    }

    #[test]
    fn condition_5_values() {
        let p1 = PhiFunction::lp(2, 1.0).unwrap();
        assert_eq!(condition_5_defect(&p1, &[1.0, 1.0]), 2.0);
        let p4 = PhiFunction::lp(2, 4.0).unwrap();
        let d = condition_5_defect(&p4, &[1.0, 1.0]);
        assert!((d - (2f64.sqrt() - 2.0)).abs() < 1e-12);
        assert!(check_condition_5(
            &PhiFunction::weighted_euclidean(vec![1.0, 4.0]).unwrap(),
            &small()
        )
        .passed());
        assert!(check_condition_5(&p1, &small()).failed());
        assert!(check_condition_5(&p4, &small()).failed());
    }

    #[test]
    fn strict_convexity_examples() {
        let euclid = PhiFunction::euclidean(2).unwrap().psi();
        assert!(check_strict_convexity(&euclid, &small()).passed());

        let sum = PhiFunction::sum(2).unwrap().psi();
        let r = check_strict_convexity(&sum, &small());
        assert!(r.failed());
        assert_eq!(r.witness.get("x"), Some(&[1.0, 0.0][..]));
        assert_eq!(r.witness.get("y"), Some(&[0.0, 1.0][..]));
        assert_eq!(r.witness.get("psi_midpoint"), Some(&[1.0][..]));

        let max = PhiFunction::max(2).unwrap().psi();
        let r = check_strict_convexity(&max, &small());
        assert!(r.failed());
        assert_eq!(r.witness.get("x"), Some(&[1.0, 1.0][..]));
        assert_eq!(r.witness.get("y"), Some(&[1.0, -1.0][..]));
    }

    #[test]
    fn strict_convexity_is_undetermined_without_a_norm() {
        let r = check_strict_convexity(&PhiFunction::two_valued(2).unwrap().psi(), &small());
        assert_eq!(r.verdict, crate::Verdict::Undetermined);
    }

    #[test]
    fn strict_convexity_of_one_dimensional_psi() {
        let r = check_strict_convexity(&PhiFunction::sum(1).unwrap().psi(), &small());
        assert!(r.passed());
        assert_eq!(r.samples, 0);
    }

    #[test]
    fn reports_are_seed_deterministic() {
        let phi = PhiFunction::lp(3, 1.5).unwrap();
        let a = check_condition_b(&phi, &small().with_seed(4));
        let b = check_condition_b(&phi, &small().with_seed(4));
        assert_eq!(a, b);
    }
}
