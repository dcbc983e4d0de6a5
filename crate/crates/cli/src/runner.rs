//! Executes the checks of a [`RunConfig`] and collects one record per condition.

use crate::config::{
    point_from_json, CheckDef, CheckKind, GeodesicQuery, Resolver, RunConfig, ToleranceOverrides,
};
use crate::{demos, CliError, EXIT_FAILURE, EXIT_PASS};
use phiprod::curves::{self, CurveError};
use phiprod::geodesics::{self, GeodesicError, TriangleSampler, UniquenessParams};
use phiprod::phi::{self, PhiError};
use phiprod::rank::{self, RankError};
use phiprod::spaces::{FiniteMetric, LpSpace, SpaceError};
use phiprod::{
    Geodesic, MetricSpace, Point, SamplerParams, Selector, Tolerances, ValidationReport, Verdict,
    Witness,
};
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::time::Instant;

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_TRIANGLES: usize = 1_000;
pub const DEFAULT_DEPTH: u32 = 12;
pub const DEFAULT_GEODESIC_GRID: usize = 64;
pub const DEFAULT_BUSEMANN_GRID: usize = 32;
pub const DEFAULT_ARCLENGTH_GRID: usize = 16;
pub const DEFAULT_NON_LENGTH_DEPTH: u32 = 10;
pub const DEFAULT_NON_LENGTH_PATHS: usize = 16;
pub const DEFAULT_COUNTEREXAMPLE_T: f64 = 10.0;
pub const DEFAULT_COUNTEREXAMPLE_GRID: usize = 101;
pub const DEFAULT_RADIUS: f64 = 10.0;

/// Command-line overrides applied on top of a config.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Replaces the config's global seed; per-check seeds still win.
    pub seed: Option<u64>,
    /// Replaces every sample count, including per-check ones.
    pub samples: Option<usize>,
    /// Replaces every subdivision depth, including per-check ones.
    pub depth: Option<u32>,
    /// Applied after config and per-check overrides.
    pub tolerances: ToleranceOverrides,
    /// Adds wall-clock time to records; output is then no longer reproducible.
    pub timing: bool,
}

/// One checked condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub index: usize,
    /// The config check that produced the record.
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub condition: String,
    pub verdict: Verdict,
    pub informational: bool,
    pub margin: f64,
    pub tolerance: f64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    pub witness: Witness,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl Record {
    /// Whether the record lets the run succeed.
    pub fn counts_as_pass(&self) -> bool {
        self.informational || self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn to_text(&self) -> String {
        let mut line = format!(
            "{:>3} {:<16} {:<32} {:<12} margin={:<11.4e} tol={:<8.1e} n={}",
            self.index,
            self.check,
            self.condition,
            if self.informational {
                format!("({})", self.verdict)
            } else {
                self.verdict.to_string()
            },
            self.margin,
            self.tolerance,
            self.samples
        );
        if let Some(r) = &self.result {
            let _ = write!(line, " result={r}");
        }
        if let Some(l) = &self.label {
            let _ = write!(line, " [{l}]");
        }
        if let Some(ms) = self.elapsed_ms {
            let _ = write!(line, " {ms:.1}ms");
        }
        if self.verdict != Verdict::Pass && !self.witness.is_empty() {
            let w: Vec<String> = self
                .witness
                .entries
                .iter()
                .map(|e| format!("{}={:?}", e.label, e.values))
                .collect();
            let _ = write!(line, "\n      witness: {}", w.join(" "));
        }
        for n in &self.notes {
            let _ = write!(line, "\n      note: {n}");
        }
        line
    }
}

/// All records of a run and the resulting exit status.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub records: Vec<Record>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.records.iter().all(Record::counts_as_pass)
    }

    pub fn exit_code(&self) -> u8 {
        if self.passed() {
            EXIT_PASS
        } else {
            EXIT_FAILURE
        }
    }

    /// Line-delimited JSON, one record per line.
    pub fn to_json_lines(&self) -> String {
        self.records.iter().map(|r| r.to_json() + "\n").collect()
    }

    pub fn to_text(&self) -> String {
        let mut out: String = self.records.iter().map(|r| r.to_text() + "\n").collect();
        let failing = self.records.iter().filter(|r| !r.counts_as_pass()).count();
        let _ = writeln!(
            out,
            "{} records, {} failing: {}",
            self.records.len(),
            failing,
            if failing == 0 { "PASS" } else { "FAIL" }
        );
        out
    }
}

/// Parameters resolved for one check.
pub(crate) struct Ctx {
    pub check: &'static str,
    pub label: Option<String>,
    pub informational: bool,
    pub seed: u64,
    pub samples: Option<usize>,
    pub depth: Option<u32>,
    pub tol: Tolerances,
}

impl Ctx {
    pub fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    pub fn depth_or(&self, configured: Option<u32>, default: u32) -> u32 {
        self.depth.or(configured).unwrap_or(default)
    }

    pub fn params(&self) -> SamplerParams {
        SamplerParams {
            count: self.samples_or(DEFAULT_SAMPLES),
            seed: self.seed,
            radius: DEFAULT_RADIUS,
            tolerances: self.tol,
        }
    }
}

/// Collects records in order.
pub(crate) struct Sink {
    pub records: Vec<Record>,
}

impl Sink {
    pub fn report(&mut self, ctx: &Ctx, report: &ValidationReport, result: Option<Value>) {
        self.report_as(ctx, report, result, ctx.informational);
    }

    pub fn report_as(
        &mut self,
        ctx: &Ctx,
        report: &ValidationReport,
        result: Option<Value>,
        informational: bool,
    ) {
        self.records.push(Record {
            index: self.records.len(),
            check: ctx.check.to_string(),
            label: ctx.label.clone(),
            condition: report.condition.clone(),
            verdict: report.verdict,
            informational,
            margin: report.worst_margin,
            tolerance: report.tolerance,
            samples: report.samples,
            result,
            witness: report.witness.clone(),
            notes: report.notes.clone(),
            elapsed_ms: None,
        });
    }
}

/// Runs every check of `cfg` in declared order.
///
/// Config errors surface before any check runs. A check that cannot be
/// evaluated yields an undetermined record; an exceeded search budget aborts.
pub fn run_config(cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let mut resolver = Resolver::new(cfg);
    resolver.resolve_all()?;
    for def in &cfg.checks {
        if let CheckKind::Demo { name } = &def.kind {
            demos::validate(name)?;
        }
    }
    let base = cfg
        .tolerances
        .merged(&opts.tolerances)
        .apply(Tolerances::default())?;
    let global_seed = opts.seed.unwrap_or(cfg.seed);
    let mut sink = Sink {
        records: Vec::new(),
    };
    for def in &cfg.checks {
        let tol = match &def.tolerances {
            Some(t) => cfg
                .tolerances
                .merged(t)
                .merged(&opts.tolerances)
                .apply(Tolerances::default())?,
            None => base,
        };
        let ctx = Ctx {
            check: def.kind.name(),
            label: def.label.clone(),
            informational: def.informational,
            seed: def.seed.unwrap_or(global_seed),
            samples: opts.samples.or(def.samples),
            depth: opts.depth,
            tol,
        };
        let first = sink.records.len();
        let started = Instant::now();
        match run_check(def, &ctx, &mut resolver, &mut sink) {
            Ok(()) => {}
            Err(CliError::Check(msg)) => {
                let r = ValidationReport::undetermined(def.kind.name(), msg);
                sink.report(&ctx, &r, None);
            }
            Err(e) => return Err(e),
        }
        if opts.timing {
            let ms = started.elapsed().as_secs_f64() * 1e3;
            for r in &mut sink.records[first..] {
                r.elapsed_ms = Some(ms);
            }
        }
    }
    Ok(Outcome {
        records: sink.records,
    })
}

/// Parses and runs a config given as JSON text.
pub fn run_json(text: &str, opts: &RunOptions) -> Result<Outcome, CliError> {
    run_config(&RunConfig::from_json(text)?, opts)
}

fn check_error(e: impl std::fmt::Display) -> CliError {
    CliError::Check(e.to_string())
}

impl From<CurveError> for CliError {
    fn from(e: CurveError) -> Self {
        match e {
            CurveError::InvalidDepth(_) => CliError::Budget(e.to_string()),
            other => check_error(other),
        }
    }
}

impl From<GeodesicError> for CliError {
    fn from(e: GeodesicError) -> Self {
        check_error(e)
    }
}

impl From<RankError> for CliError {
    fn from(e: RankError) -> Self {
        match e {
            RankError::BudgetExceeded(_) => CliError::Budget(e.to_string()),
            other => check_error(other),
        }
    }
}

impl From<SpaceError> for CliError {
    fn from(e: SpaceError) -> Self {
        check_error(e)
    }
}

impl From<PhiError> for CliError {
    fn from(e: PhiError) -> Self {
        check_error(e)
    }
}

/// Geodesic from `x` to `y`: the product geodesic for products, the factor geodesic otherwise.
pub(crate) fn geodesic_in(
    space: &MetricSpace,
    x: &Point,
    y: &Point,
    selectors: &[Selector],
) -> Result<Geodesic, GeodesicError> {
    match space {
        MetricSpace::Product(p) => geodesics::product_geodesic(p, x, y, selectors),
        other => {
            geodesics::factor_geodesic(other, x, y, selectors.first().copied().unwrap_or_default())
        }
    }
}

fn query_geodesic(space: &MetricSpace, q: &GeodesicQuery) -> Result<Geodesic, CliError> {
    let x = point_from_json(space, &q.from)?;
    let y = point_from_json(space, &q.to)?;
    Ok(geodesic_in(space, &x, &y, &q.selectors)?)
}

fn run_check(
    def: &CheckDef,
    ctx: &Ctx,
    res: &mut Resolver,
    sink: &mut Sink,
) -> Result<(), CliError> {
    match &def.kind {
        CheckKind::Classify { phi, expect } => {
            let phi = res.phi(phi)?;
            let c = phi::classify_phi(&phi, &ctx.params());
            for r in &c.reports {
                sink.report_as(ctx, r, None, true);
            }
            let mut summary = ValidationReport {
                condition: "phi-classification".into(),
                verdict: Verdict::Pass,
                samples: c.reports.iter().map(|r| r.samples).sum(),
                worst_margin: 0.0,
                tolerance: 0.0,
                witness: Witness::new(),
                notes: Vec::new(),
            };
            if let Some(e) = expect {
                if *e != c.class {
                    summary.verdict = Verdict::Fail;
                    summary
                        .notes
                        .push(format!("expected {e}, classified as {}", c.class));
                }
            }
            sink.report(ctx, &summary, Some(json!(c.class)));
        }
        CheckKind::ConditionA { phi } => sink.report(
            ctx,
            &phi::check_condition_a(&res.phi(phi)?, &ctx.params()),
            None,
        ),
        CheckKind::ConditionB { phi } => sink.report(
            ctx,
            &phi::check_condition_b(&res.phi(phi)?, &ctx.params()),
            None,
        ),
        CheckKind::Conditions1To4 { phi } => {
            for r in phi::check_conditions_1_to_4(&res.phi(phi)?, &ctx.params()) {
                sink.report(ctx, &r, None);
            }
        }
        CheckKind::Condition5 { phi } => sink.report(
            ctx,
            &phi::check_condition_5(&res.phi(phi)?, &ctx.params()),
            None,
        ),
        CheckKind::StrictConvexity { phi } => {
            let psi = res.phi(phi)?.psi();
            sink.report(ctx, &phi::check_strict_convexity(&psi, &ctx.params()), None);
        }
        CheckKind::MetricAxioms { space } => {
            let prod = res.product(space)?;
            let count = ctx.samples_or(DEFAULT_SAMPLES);
            for r in phiprod::product::verify_metric_axioms(&prod, count, ctx.seed, &ctx.tol) {
                sink.report(ctx, &r, None);
            }
        }
        CheckKind::CurveLength {
            space,
            curve,
            depth,
        } => {
            let s = res.space(space)?;
            let c = res.curve(curve)?;
            let est = curves::curve_length(&s, &c, ctx.depth_or(*depth, DEFAULT_DEPTH), &ctx.tol)?;
            sink.report(
                ctx,
                &length_report(&est, &ctx.tol),
                Some(json!({"length": est.length, "trace": est.trace})),
            );
        }
        CheckKind::ProductLength {
            space,
            curves: names,
            depth,
        } => {
            let prod = res.product(space)?;
            let components = names
                .iter()
                .map(|n| res.curve(n))
                .collect::<Result<Vec<_>, _>>()?;
            let r = curves::product_curve_length_check(
                &prod,
                &components,
                ctx.depth_or(*depth, DEFAULT_DEPTH),
                &ctx.tol,
            )?;
            let result = r
                .witness
                .get("product_length")
                .map(|l| json!({"length": l[0]}));
            sink.report(ctx, &r, result);
        }
        CheckKind::Arclength {
            space,
            curve,
            grid,
            depth,
        } => {
            let s = res.space(space)?;
            let c = res.curve(curve)?;
            let r = curves::arclength_check(
                &s,
                &c,
                grid.unwrap_or(DEFAULT_ARCLENGTH_GRID),
                ctx.depth_or(*depth, DEFAULT_DEPTH),
                &ctx.tol,
            )?;
            sink.report(ctx, &r, None);
        }
        CheckKind::NonLengthSpace { depth, paths } => {
            let r = curves::non_length_space_demo(
                ctx.depth_or(*depth, DEFAULT_NON_LENGTH_DEPTH),
                paths.unwrap_or(DEFAULT_NON_LENGTH_PATHS),
                ctx.seed,
                &ctx.tol,
            )?;
            sink.report(ctx, &r, None);
        }
        CheckKind::Geodesic {
            space,
            from,
            to,
            selectors,
            grid,
        } => {
            let s = res.space(space)?;
            let g = query_geodesic(
                &s,
                &GeodesicQuery {
                    from: from.clone(),
                    to: to.clone(),
                    selectors: selectors.clone(),
                },
            )?;
            let grid = grid.unwrap_or(DEFAULT_GEODESIC_GRID);
            let result = json!({"length": g.length(), "label": g.label()});
            sink.report(
                ctx,
                &geodesics::geodesy_test(&s, &g, grid, &ctx.tol)?,
                Some(result),
            );
            if let MetricSpace::Product(p) = &s {
                sink.report(
                    ctx,
                    &geodesics::component_speed_check(p, &g, grid, &ctx.tol)?,
                    None,
                );
            }
        }
        CheckKind::Uniqueness {
            space,
            from,
            to,
            selector_sets,
            grid,
            perturbations,
        } => {
            let prod = res.product(space)?;
            let s = MetricSpace::Product(prod.clone());
            let x = point_from_json(&s, from)?;
            let y = point_from_json(&s, to)?;
            let defaults = UniquenessParams::default();
            let params = UniquenessParams {
                grid: grid.unwrap_or(defaults.grid),
                perturbations: ctx
                    .samples
                    .or(*perturbations)
                    .unwrap_or(defaults.perturbations),
                seed: ctx.seed,
            };
            let probe =
                geodesics::uniqueness_probe(&prod, &x, &y, selector_sets, &params, &ctx.tol)?;
            let labels: Vec<&str> = probe.geodesics.iter().map(Geodesic::label).collect();
            let result = json!({"unique": probe.is_unique(), "sup_distance": probe.sup_distance, "geodesics": labels});
            sink.report(ctx, &probe.report, Some(result));
        }
        CheckKind::Busemann {
            space,
            first,
            second,
            grid,
        } => {
            let s = res.space(space)?;
            let g1 = query_geodesic(&s, first)?;
            let g2 = query_geodesic(&s, second)?;
            let r = geodesics::busemann_convexity_check(
                &s,
                &g1,
                &g2,
                grid.unwrap_or(DEFAULT_BUSEMANN_GRID),
                &ctx.tol,
            )?;
            sink.report(ctx, &r, None);
        }
        CheckKind::Cat0 {
            space,
            triangles,
            count,
            radius,
        } => {
            let s = res.space(space)?;
            let sampler = match triangles {
                Some(ts) => TriangleSampler::Fixed(
                    ts.iter()
                        .map(|[p, q, r]| {
                            Ok([
                                point_from_json(&s, p)?,
                                point_from_json(&s, q)?,
                                point_from_json(&s, r)?,
                            ])
                        })
                        .collect::<Result<Vec<_>, CliError>>()?,
                ),
                None => TriangleSampler::Random {
                    radius: radius.unwrap_or(DEFAULT_RADIUS),
                },
            };
            let n = ctx.samples.or(*count).unwrap_or(DEFAULT_TRIANGLES);
            sink.report(
                ctx,
                &geodesics::cat0_four_point_check(&s, &sampler, n, ctx.seed, &ctx.tol)?,
                None,
            );
        }
        CheckKind::Rank {
            space,
            assume_quasi_euclidean,
        } => {
            let record = match res.space(space)? {
                MetricSpace::Product(p) => rank::product_rank_with(&p, *assume_quasi_euclidean),
                other => rank::declared_rank(&other),
            };
            sink.report(ctx, &rank_report(&record), Some(json!(record)));
        }
        CheckKind::Counterexample { t, grid } => {
            let r = rank::counterexample_sum_halflines(
                t.unwrap_or(DEFAULT_COUNTEREXAMPLE_T),
                grid.unwrap_or(DEFAULT_COUNTEREXAMPLE_GRID),
            )?;
            sink.report(ctx, &r, None);
        }
        CheckKind::Embedding {
            space,
            pattern,
            sample,
            expect_found,
        } => {
            let s = res.space(space)?;
            let pattern = FiniteMetric::new(pattern.clone())
                .map_err(|e| CliError::Config(format!("pattern: {e}")))?;
            let sample = sample
                .iter()
                .map(|v| point_from_json(&s, v))
                .collect::<Result<Vec<_>, _>>()?;
            let probe = rank::finite_embedding_oracle(&pattern, &sample, &s, &ctx.tol)?;
            sink.report(
                ctx,
                &embedding_report(&probe, expect_found.unwrap_or(true), &ctx.tol),
                Some(json!({
                    "found": probe.found(),
                    "assignment": probe.assignment,
                    "nodes": probe.nodes,
                })),
            );
        }
        CheckKind::Alpha {
            space,
            source,
            maps,
            base_a,
            base_b,
            vectors,
        } => {
            let prod = res.product(space)?;
            let source = LpSpace::new(
                source.dimension,
                source.exponent,
                source
                    .weights
                    .clone()
                    .unwrap_or_else(|| vec![1.0; source.dimension]),
            )
            .map_err(|e| CliError::Config(format!("alpha source: {e}")))?;
            let embedding = linear_embedding(prod.factors(), maps, source.dimension)?;
            let norm = |v: &[f64]| source.norm(v);
            let (decomp, reports) =
                rank::alpha_decompose(&embedding, &norm, &prod, base_a, base_b, vectors, &ctx.tol)?;
            for (k, r) in reports.iter().enumerate() {
                let result = (k == 0).then(|| json!({"alpha_a": decomp.alpha_a}));
                sink.report(ctx, r, result);
            }
        }
        CheckKind::Demo { name } => demos::run_demo(name, ctx, sink)?,
    }
    Ok(())
}

/// Pass when the subdivision sums are monotone and stay bounded.
fn length_report(est: &phiprod::LengthEstimate, tol: &Tolerances) -> ValidationReport {
    let (worst, at) = est
        .trace
        .windows(2)
        .enumerate()
        .map(|(k, w)| (w[0] - w[1], k))
        .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a });
    let tolerance = tol.metric_at(est.length);
    let verdict = if !est.monotone {
        Verdict::Fail
    } else if est.divergent {
        Verdict::Undetermined
    } else {
        Verdict::Pass
    };
    let mut r = ValidationReport {
        condition: "refinement-monotone".into(),
        verdict,
        samples: est.trace.len(),
        worst_margin: if worst.is_finite() { worst } else { 0.0 },
        tolerance,
        witness: Witness::new(),
        notes: Vec::new(),
    };
    if worst.is_finite() && verdict == Verdict::Fail {
        r.witness.push("levels", vec![at as f64, (at + 1) as f64]);
        r.witness
            .push("sums", vec![est.trace[at], est.trace[at + 1]]);
    }
    if est.divergent {
        r.notes
            .push("subdivision sums diverge: no finite length at this depth".into());
    }
    r
}

fn rank_report(record: &phiprod::RankRecord) -> ValidationReport {
    let mut r = ValidationReport {
        condition: "minkowski-rank".into(),
        verdict: if record.rank == phiprod::RankValue::Unknown {
            Verdict::Undetermined
        } else {
            Verdict::Pass
        },
        samples: 0,
        worst_margin: 0.0,
        tolerance: 0.0,
        witness: Witness::new(),
        notes: record.warnings.clone(),
    };
    if !record.additivity_guaranteed {
        r.notes.push("additivity not guaranteed".into());
    }
    r
}

fn embedding_report(
    probe: &rank::EmbeddingProbe,
    expect_found: bool,
    tol: &Tolerances,
) -> ValidationReport {
    let found = probe.found();
    let mut r = ValidationReport {
        condition: "finite-embedding".into(),
        verdict: if found == expect_found {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        samples: probe.nodes,
        worst_margin: 0.0,
        tolerance: tol.embed,
        witness: Witness::new(),
        notes: Vec::new(),
    };
    if let Some(a) = &probe.assignment {
        r.witness.push(
            "assignment",
            a.iter().map(|&i| i as f64).collect::<Vec<_>>(),
        );
    }
    if !found {
        r.notes.push(format!(
            "no isometric copy among {} sample points",
            probe.sample_size
        ));
    }
    r
}

type Embedding = Box<dyn Fn(&[f64]) -> Point>;

/// `v ↦ (M_1 v, ..., M_k v)`, reading each factor point as coordinates.
fn linear_embedding(
    factors: &[MetricSpace],
    maps: &[Vec<Vec<f64>>],
    dim: usize,
) -> Result<Embedding, CliError> {
    if maps.len() != factors.len() {
        return Err(CliError::Config(format!(
            "{} maps for {} factors",
            maps.len(),
            factors.len()
        )));
    }
    for (f, m) in factors.iter().zip(maps) {
        let rows = match f {
            MetricSpace::RealLine | MetricSpace::HalfLine => 1,
            MetricSpace::Lp(lp) => lp.dimension,
            other => {
                return Err(CliError::Config(format!(
                    "linear maps cannot target {other}"
                )))
            }
        };
        if m.len() != rows || m.iter().any(|row| row.len() != dim) {
            return Err(CliError::Config(format!(
                "map into {f} must be {rows}x{dim}"
            )));
        }
    }
    let maps = maps.to_vec();
    Ok(Box::new(move |v: &[f64]| {
        Point::Tuple(
            maps.iter()
                .map(|m| {
                    Point::Coords(
                        m.iter()
                            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
                            .collect(),
                    )
                })
                .collect(),
        )
    }))
}
