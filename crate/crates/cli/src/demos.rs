//! Built-in demos. Each emits its underlying reports as informational records
//! followed by one summary record that passes iff the expected behavior is
//! reproduced.

use crate::runner::{Ctx, Sink};
use crate::CliError;
use phiprod::geodesics::{self, TriangleSampler, UniquenessParams};
use phiprod::{
    curves, rank, MetricSpace, PhiFunction, Point, ProductSpace, ValidationReport, Verdict, Witness,
};
use serde_json::json;

pub const COUNTEREXAMPLE: &str = "counterexample";
pub const NON_LENGTH_SPACE: &str = "non-length-space";
pub const L1_NON_UNIQUENESS: &str = "L1-non-uniqueness";
pub const CAT0_FAILURE: &str = "CAT0-failure";

/// Demo names with one-line descriptions, in listing order.
pub const DEMOS: [(&str, &str); 4] = [
    (
        COUNTEREXAMPLE,
        "a geodesic line in the sum product of two half-lines, which both have rank 0",
    ),
    (
        NON_LENGTH_SPACE,
        "subdivision sums of paths in the two-valued product grow like 2^depth",
    ),
    (
        L1_NON_UNIQUENESS,
        "two distinct geodesics from (0,0) to (1,1) under the sum gluing",
    ),
    (
        CAT0_FAILURE,
        "the sum plane violates the CAT(0) comparison on a right triangle by exactly 2",
    ),
];

/// Sup-distance two geodesics must exceed to count as clearly distinct.
pub const DISTINCT_GEODESICS: f64 = 0.1;
/// The comparison excess of the demo triangle, an exact binary value.
pub const CAT0_EXCESS: f64 = 2.0;

pub fn listing() -> String {
    DEMOS
        .iter()
        .map(|(n, d)| format!("{n:<20} {d}\n"))
        .collect()
}

/// Rejects names that are not built-in demos.
pub fn validate(name: &str) -> Result<(), CliError> {
    if DEMOS.iter().any(|d| d.0 == name) {
        return Ok(());
    }
    let names: Vec<&str> = DEMOS.iter().map(|d| d.0).collect();
    Err(CliError::Config(format!(
        "unknown demo {name:?}; known: {}",
        names.join(", ")
    )))
}

fn summary(
    condition: String,
    reproduced: bool,
    witness: Witness,
    note: String,
) -> ValidationReport {
    ValidationReport {
        condition,
        verdict: if reproduced {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        samples: 1,
        worst_margin: 0.0,
        tolerance: 0.0,
        witness,
        notes: vec![note],
    }
}

fn sum_plane() -> ProductSpace {
    ProductSpace::new(
        vec![MetricSpace::RealLine, MetricSpace::RealLine],
        PhiFunction::sum(2).expect("dimension 2 is valid"),
    )
    .expect("arity matches")
}

pub(crate) fn run_demo(name: &str, ctx: &Ctx, sink: &mut Sink) -> Result<(), CliError> {
    let condition = format!("demo-{name}");
    match name {
        COUNTEREXAMPLE => {
            let line = rank::counterexample_sum_halflines(
                crate::runner::DEFAULT_COUNTEREXAMPLE_T,
                crate::runner::DEFAULT_COUNTEREXAMPLE_GRID,
            )?;
            let record = rank::product_rank(&rank::sum_half_lines());
            sink.report_as(ctx, &line, None, true);
            let reproduced = line.passed() && !record.additivity_guaranteed;
            let note = format!(
                "the line embeds isometrically while the product rank is reported as {}",
                record.rank
            );
            sink.report(
                ctx,
                &summary(condition, reproduced, Witness::new(), note),
                Some(json!(record)),
            );
        }
        NON_LENGTH_SPACE => {
            let r = curves::non_length_space_demo(
                ctx.depth_or(None, crate::runner::DEFAULT_NON_LENGTH_DEPTH),
                crate::runner::DEFAULT_NON_LENGTH_PATHS,
                ctx.seed,
                &ctx.tol,
            )?;
            sink.report_as(ctx, &r, None, true);
            let note = "every dyadic subdivision sum is at least the number of steps".to_string();
            sink.report(
                ctx,
                &summary(condition, r.passed(), r.witness.clone(), note),
                None,
            );
        }
        L1_NON_UNIQUENESS => {
            let prod = sum_plane();
            let x = Point::scalars(&[0.0, 0.0]);
            let y = Point::scalars(&[1.0, 1.0]);
            let params = UniquenessParams {
                seed: ctx.seed,
                ..UniquenessParams::default()
            };
            let probe = geodesics::uniqueness_probe(&prod, &x, &y, &[], &params, &ctx.tol)?;
            sink.report_as(ctx, &probe.report, None, true);
            let reproduced = !probe.is_unique() && probe.sup_distance > DISTINCT_GEODESICS;
            let labels: Vec<&str> = probe.geodesics.iter().map(|g| g.label()).collect();
            let note = format!("geodesics at sup-distance {} apart", probe.sup_distance);
            sink.report(
                ctx,
                &summary(
                    condition,
                    reproduced,
                    Witness::new().with("sup_distance", vec![probe.sup_distance]),
                    note,
                ),
                Some(json!({"geodesics": labels})),
            );
        }
        CAT0_FAILURE => {
            let space = MetricSpace::product(sum_plane());
            let triangle = [
                Point::scalars(&[0.0, 0.0]),
                Point::scalars(&[2.0, 0.0]),
                Point::scalars(&[0.0, 2.0]),
            ];
            let r = geodesics::cat0_four_point_check(
                &space,
                &TriangleSampler::Fixed(vec![triangle]),
                1,
                ctx.seed,
                &ctx.tol,
            )?;
            sink.report_as(ctx, &r, None, true);
            let reproduced = r.failed() && r.worst_margin == CAT0_EXCESS;
            let note = format!(
                "comparison excess {} on p=(0,0), q=(2,0), r=(0,2)",
                r.worst_margin
            );
            sink.report(
                ctx,
                &summary(condition, reproduced, r.witness.clone(), note),
                None,
            );
        }
        other => return validate(other),
    }
    Ok(())
}
