use phiprod::curves::{curve_length, Curve};
use phiprod::geodesics::{
    component_speed_check, geodesy_test, product_geodesic, uniqueness_probe, UniquenessParams,
};
use phiprod::*;
use proptest::prelude::*;

fn strict_phis() -> Vec<PhiFunction> {
    vec![
        PhiFunction::euclidean(2).unwrap(),
        PhiFunction::weighted_euclidean(vec![1.0, 4.0]).unwrap(),
        PhiFunction::lp(2, 3.0).unwrap(),
        PhiFunction::lp(2, 1.5).unwrap(),
    ]
}

fn norm_phis() -> Vec<PhiFunction> {
    let mut v = strict_phis();
    v.push(PhiFunction::sum(2).unwrap());
    v.push(PhiFunction::max(2).unwrap());
    v
}

fn vertices(space: &MetricSpace, raw: &[(f64, f64)]) -> Vec<Point> {
    raw.iter()
        .map(|&(a, b)| match space {
            MetricSpace::RealLine => Point::scalar(a),
            _ => Point::Coords(vec![a, b]),
        })
        .collect()
}

/// Exact length of a polyline whose segments are geodesics of `space`.
fn exact_length(space: &MetricSpace, v: &[Point]) -> f64 {
    v.windows(2)
        .map(|w| space.distance(&w[0], &w[1]).unwrap())
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn refinement_is_monotone_and_bounded_below(
        raw in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..6),
        planar in any::<bool>(),
    ) {
        let space = if planar { MetricSpace::lp(2, 3.0).unwrap() } else { MetricSpace::RealLine };
        let c = Curve::polyline_uniform(vertices(&space, &raw)).unwrap();
        let tol = Tolerances::default();
        let est = curve_length(&space, &c, 10, &tol).unwrap();
        let chord = space.distance(&c.start(), &c.end()).unwrap();
        prop_assert!(est.monotone);
        for w in est.trace.windows(2) {
            prop_assert!(w[1] >= w[0] - tol.metric_at(w[0]));
        }
        prop_assert!(est.trace.iter().all(|&l| l >= chord - tol.metric_at(chord)));
        prop_assert!(est.length <= exact_length(&space, c_vertices(&c)) + tol.metric_at(est.length));
    }

    /// With `K` corners across both components and `N` steps,
    /// `0 <= L_N - Φ(l_N) <= K Φ(l) / N`: non-straddling steps all equal
    /// `l / N`, monotonicity bounds `Φ(l_N)` below by their sum, and every
    /// straddling step is at most `Φ(l / N)`.
    #[test]
    fn product_length_gap_is_bounded_by_corners(
        phi_index in 0usize..6,
        planar in any::<bool>(),
        first in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..6),
        second in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..6),
    ) {
        let factor = if planar { MetricSpace::lp(2, 2.0).unwrap() } else { MetricSpace::RealLine };
        let prod = ProductSpace::new(vec![factor.clone(), factor.clone()], norm_phis()[phi_index].clone()).unwrap();
        let (va, vb) = (vertices(&factor, &first), vertices(&factor, &second));
        let (Ok(ca), Ok(cb)) = (
            Curve::constant_speed_polyline(&factor, va.clone()),
            Curve::constant_speed_polyline(&factor, vb.clone()),
        ) else {
            return Ok(());
        };
        let depth = 10;
        let n = (1u64 << depth) as f64;
        let tol = Tolerances::default();
        let la = curve_length(&factor, &ca, depth, &tol).unwrap().length;
        let lb = curve_length(&factor, &cb, depth, &tol).unwrap().length;
        let big = curve_length(&MetricSpace::product(prod.clone()), &Curve::product(vec![ca, cb]).unwrap(), depth, &tol).unwrap().length;
        let phi = prod.phi();
        let measured = phi.eval(&[la, lb]).unwrap();
        let exact = phi.eval(&[exact_length(&factor, &va), exact_length(&factor, &vb)]).unwrap();
        let corners = (va.len() - 2 + vb.len() - 2) as f64;
        let slack = 1e-9 * exact.max(1.0);
        prop_assert!(big - measured >= -slack);
        prop_assert!(big - measured <= corners * exact / n + slack);
        prop_assert!(big <= exact + slack);
    }

    #[test]
    fn product_geodesics_are_geodesics(
        phi_index in 0usize..6,
        x in prop::collection::vec(-10.0f64..10.0, 3),
        y in prop::collection::vec(-10.0f64..10.0, 3),
    ) {
        let factors = vec![MetricSpace::RealLine, MetricSpace::lp(2, 2.0).unwrap()];
        let prod = ProductSpace::new(factors, norm_phis()[phi_index].clone()).unwrap();
        let p = |v: &[f64]| Point::Tuple(vec![Point::scalar(v[0]), Point::Coords(vec![v[1], v[2]])]);
        let g = product_geodesic(&prod, &p(&x), &p(&y), &[]).unwrap();
        let tol = Tolerances::default();
        prop_assert!(geodesy_test(&MetricSpace::product(prod.clone()), &g, 24, &tol).unwrap().passed());
        prop_assert!(component_speed_check(&prod, &g, 24, &tol).unwrap().passed());
    }

    #[test]
    fn strictly_convex_products_are_uniquely_geodesic(
        phi_index in 0usize..4,
        x in prop::collection::vec(-10.0f64..10.0, 2),
        y in prop::collection::vec(-10.0f64..10.0, 2),
    ) {
        let prod = ProductSpace::new(vec![MetricSpace::RealLine, MetricSpace::RealLine], strict_phis()[phi_index].clone()).unwrap();
        let params = UniquenessParams { perturbations: 16, grid: 17, seed: 0 };
        let probe = uniqueness_probe(&prod, &Point::scalars(&x), &Point::scalars(&y), &[], &params, &Tolerances::default()).unwrap();
        prop_assert!(probe.is_unique(), "{}", probe.report);
    }
}

fn c_vertices(c: &Curve) -> &[Point] {
    match c.kind() {
        phiprod::curves::CurveKind::Polyline { vertices, .. } => vertices,
        _ => unreachable!(),
    }
}
