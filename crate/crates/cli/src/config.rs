//! The JSON run configuration and the resolution of its named definitions.

use crate::CliError;
use phiprod::curves::Curve;
use phiprod::geodesics::Selector;
use phiprod::phi::PhiClass;
use phiprod::spaces::LpSpace;
use phiprod::{Exponent, MetricSpace, PhiFunction, Point, ProductSpace, Tolerances};
use serde::Deserialize;
use serde_json::Value;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

/// The only schema version understood.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputMode {
    #[default]
    Text,
    Json,
}

/// Partial overrides of [`Tolerances`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub metric: Option<f64>,
    pub strict: Option<f64>,
    pub embed: Option<f64>,
    pub length_floor: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: Tolerances) -> Result<Tolerances, CliError> {
        let pick = |name: &str, v: Option<f64>, default: f64| -> Result<f64, CliError> {
            match v {
                None => Ok(default),
                Some(x) if x.is_finite() && x >= f64::EPSILON => Ok(x),
                Some(x) => Err(CliError::Config(format!(
                    "tolerance {name} = {x} is below machine epsilon or not finite"
                ))),
            }
        };
        Ok(Tolerances {
            metric: pick("metric", self.metric, base.metric)?,
            strict: pick("strict", self.strict, base.strict)?,
            embed: pick("embed", self.embed, base.embed)?,
            length_floor: pick("length_floor", self.length_floor, base.length_floor)?,
        })
    }

    /// Parses `KEY=VAL` as given on the command line.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, val) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected KEY=VAL, got {assignment:?}")))?;
        let v: f64 = val
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("tolerance value {val:?} is not a number")))?;
        let slot = match key.trim() {
            "metric" => &mut self.metric,
            "strict" => &mut self.strict,
            "embed" => &mut self.embed,
            "length_floor" | "length" => &mut self.length_floor,
            other => return Err(CliError::Config(format!("unknown tolerance {other:?}"))),
        };
        *slot = Some(v);
        Ok(())
    }

    /// `other` wins wherever it is set.
    pub fn merged(&self, other: &ToleranceOverrides) -> ToleranceOverrides {
        ToleranceOverrides {
            metric: other.metric.or(self.metric),
            strict: other.strict.or(self.strict),
            embed: other.embed.or(self.embed),
            length_floor: other.length_floor.or(self.length_floor),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceDef {
    RealLine,
    HalfLine,
    Lp {
        dimension: usize,
        exponent: Exponent,
        weights: Option<Vec<f64>>,
    },
    Discrete {
        points: usize,
    },
    Finite {
        matrix: Vec<Vec<f64>>,
    },
    Product {
        factors: Vec<String>,
        phi: String,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhiDef {
    WeightedLp {
        exponent: Exponent,
        weights: Vec<f64>,
    },
    WeightedEuclidean {
        weights: Vec<f64>,
    },
    Euclidean {
        dimension: usize,
    },
    Lp {
        dimension: usize,
        exponent: Exponent,
    },
    Sum {
        dimension: usize,
    },
    Max {
        dimension: usize,
    },
    TwoValued {
        dimension: usize,
    },
    /// `Φ(q) = q_index^exponent`; a deliberately broken gluing for negative tests.
    CoordinatePower {
        dimension: usize,
        index: usize,
        exponent: f64,
    },
}

impl PhiDef {
    pub fn build(&self) -> Result<PhiFunction, CliError> {
        let phi = match self {
            PhiDef::WeightedLp { exponent, weights } => {
                PhiFunction::weighted_lp(*exponent, weights.clone())
            }
            PhiDef::WeightedEuclidean { weights } => {
                PhiFunction::weighted_euclidean(weights.clone())
            }
            PhiDef::Euclidean { dimension } => PhiFunction::euclidean(*dimension),
            PhiDef::Lp {
                dimension,
                exponent,
            } => PhiFunction::weighted_lp(*exponent, vec![1.0; *dimension]),
            PhiDef::Sum { dimension } => PhiFunction::sum(*dimension),
            PhiDef::Max { dimension } => PhiFunction::max(*dimension),
            PhiDef::TwoValued { dimension } => PhiFunction::two_valued(*dimension),
            PhiDef::CoordinatePower {
                dimension,
                index,
                exponent,
            } => PhiFunction::coordinate_power(*dimension, *index, *exponent),
        };
        phi.map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveDef {
    Polyline {
        space: String,
        vertices: Vec<Value>,
        breakpoints: Option<Vec<f64>>,
        #[serde(default)]
        constant_speed: bool,
    },
    Segment {
        space: String,
        start: Value,
        end: Value,
        #[serde(default = "one")]
        power: f64,
    },
    CircleArc {
        center: [f64; 2],
        radius: f64,
        from: f64,
        to: f64,
    },
    Product {
        components: Vec<String>,
    },
}

fn one() -> f64 {
    1.0
}

/// One geodesic request inside a Busemann check.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicQuery {
    pub from: Value,
    pub to: Value,
    #[serde(default)]
    pub selectors: Vec<Selector>,
}

/// Source normed space of an α-decomposition.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceDef {
    pub dimension: usize,
    pub exponent: Exponent,
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum CheckKind {
    Classify {
        phi: String,
        expect: Option<PhiClass>,
    },
    #[serde(rename = "condition-a")]
    ConditionA {
        phi: String,
    },
    #[serde(rename = "condition-b")]
    ConditionB {
        phi: String,
    },
    #[serde(rename = "conditions-1-4")]
    Conditions1To4 {
        phi: String,
    },
    #[serde(rename = "condition-5")]
    Condition5 {
        phi: String,
    },
    StrictConvexity {
        phi: String,
    },
    MetricAxioms {
        space: String,
    },
    CurveLength {
        space: String,
        curve: String,
        depth: Option<u32>,
    },
    ProductLength {
        space: String,
        curves: Vec<String>,
        depth: Option<u32>,
    },
    Arclength {
        space: String,
        curve: String,
        grid: Option<usize>,
        depth: Option<u32>,
    },
    NonLengthSpace {
        depth: Option<u32>,
        paths: Option<usize>,
    },
    Geodesic {
        space: String,
        from: Value,
        to: Value,
        #[serde(default)]
        selectors: Vec<Selector>,
        grid: Option<usize>,
    },
    Uniqueness {
        space: String,
        from: Value,
        to: Value,
        #[serde(default)]
        selector_sets: Vec<Vec<Selector>>,
        grid: Option<usize>,
        perturbations: Option<usize>,
    },
    Busemann {
        space: String,
        first: GeodesicQuery,
        second: GeodesicQuery,
        grid: Option<usize>,
    },
    Cat0 {
        space: String,
        triangles: Option<Vec<[Value; 3]>>,
        count: Option<usize>,
        radius: Option<f64>,
    },
    Rank {
        space: String,
        #[serde(default)]
        assume_quasi_euclidean: bool,
    },
    Counterexample {
        t: Option<f64>,
        grid: Option<usize>,
    },
    Embedding {
        space: String,
        pattern: Vec<Vec<f64>>,
        sample: Vec<Value>,
        expect_found: Option<bool>,
    },
    Alpha {
        space: String,
        source: SourceDef,
        /// Per factor, a matrix mapping source vectors to factor coordinates.
        maps: Vec<Vec<Vec<f64>>>,
        base_a: Vec<f64>,
        base_b: Vec<f64>,
        vectors: Vec<Vec<f64>>,
    },
    /// A built-in demo; see [`crate::demos::DEMOS`].
    Demo {
        name: String,
    },
}

impl CheckKind {
    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Classify { .. } => "classify",
            CheckKind::ConditionA { .. } => "condition-a",
            CheckKind::ConditionB { .. } => "condition-b",
            CheckKind::Conditions1To4 { .. } => "conditions-1-4",
            CheckKind::Condition5 { .. } => "condition-5",
            CheckKind::StrictConvexity { .. } => "strict-convexity",
            CheckKind::MetricAxioms { .. } => "metric-axioms",
            CheckKind::CurveLength { .. } => "curve-length",
            CheckKind::ProductLength { .. } => "product-length",
            CheckKind::Arclength { .. } => "arclength",
            CheckKind::NonLengthSpace { .. } => "non-length-space",
            CheckKind::Geodesic { .. } => "geodesic",
            CheckKind::Uniqueness { .. } => "uniqueness",
            CheckKind::Busemann { .. } => "busemann",
            CheckKind::Cat0 { .. } => "cat0",
            CheckKind::Rank { .. } => "rank",
            CheckKind::Counterexample { .. } => "counterexample",
            CheckKind::Embedding { .. } => "embedding",
            CheckKind::Alpha { .. } => "alpha",
            CheckKind::Demo { .. } => "demo",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct CheckDef {
    #[serde(flatten)]
    pub kind: CheckKind,
    /// Records of informational checks never affect the exit status.
    #[serde(default)]
    pub informational: bool,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tolerances: Option<ToleranceOverrides>,
    /// Free text copied into every record of the check.
    pub label: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    #[serde(default)]
    pub spaces: BTreeMap<String, SpaceDef>,
    #[serde(default)]
    pub phis: BTreeMap<String, PhiDef>,
    #[serde(default)]
    pub curves: BTreeMap<String, CurveDef>,
    pub checks: Vec<CheckDef>,
    #[serde(default)]
    pub output: OutputMode,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
        if cfg.version != CONFIG_VERSION {
            return Err(CliError::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }
}

/// Resolves names against a config, building each definition once.
pub struct Resolver<'a> {
    cfg: &'a RunConfig,
    spaces: HashMap<String, MetricSpace>,
    phis: HashMap<String, PhiFunction>,
}

impl<'a> Resolver<'a> {
    pub fn new(cfg: &'a RunConfig) -> Self {
        Resolver {
            cfg,
            spaces: HashMap::new(),
            phis: HashMap::new(),
        }
    }

    /// Resolves every definition so dangling references surface before any check runs.
    pub fn resolve_all(&mut self) -> Result<(), CliError> {
        let cfg = self.cfg;
        for name in cfg.phis.keys() {
            self.phi(name)?;
        }
        for name in cfg.spaces.keys() {
            self.space(name)?;
        }
        for name in cfg.curves.keys() {
            self.curve(name)?;
        }
        Ok(())
    }

    pub fn phi(&mut self, name: &str) -> Result<PhiFunction, CliError> {
        if let Some(p) = self.phis.get(name) {
            return Ok(p.clone());
        }
        let def = self
            .cfg
            .phis
            .get(name)
            .ok_or_else(|| CliError::Config(format!("unknown phi {name:?}")))?;
        let phi = def.build()?;
        self.phis.insert(name.to_string(), phi.clone());
        Ok(phi)
    }

    pub fn space(&mut self, name: &str) -> Result<MetricSpace, CliError> {
        self.space_inner(name, &mut Vec::new())
    }

    fn space_inner(
        &mut self,
        name: &str,
        stack: &mut Vec<String>,
    ) -> Result<MetricSpace, CliError> {
        if let Some(s) = self.spaces.get(name) {
            return Ok(s.clone());
        }
        if stack.iter().any(|s| s == name) {
            return Err(CliError::Config(format!(
                "space {name:?} is defined in terms of itself"
            )));
        }
        let def = self
            .cfg
            .spaces
            .get(name)
            .ok_or_else(|| CliError::Config(format!("unknown space {name:?}")))?
            .clone();
        stack.push(name.to_string());
        let config = |e: &dyn std::fmt::Display| CliError::Config(format!("space {name:?}: {e}"));
        let space = match def {
            SpaceDef::RealLine => MetricSpace::RealLine,
            SpaceDef::HalfLine => MetricSpace::HalfLine,
            SpaceDef::Lp {
                dimension,
                exponent,
                weights,
            } => {
                let w = weights.unwrap_or_else(|| vec![1.0; dimension]);
                MetricSpace::Lp(LpSpace::new(dimension, exponent, w).map_err(|e| config(&e))?)
            }
            SpaceDef::Discrete { points } => {
                MetricSpace::discrete(points).map_err(|e| config(&e))?
            }
            SpaceDef::Finite { matrix } => MetricSpace::finite(matrix).map_err(|e| config(&e))?,
            SpaceDef::Product { factors, phi } => {
                let factors = factors
                    .iter()
                    .map(|f| self.space_inner(f, stack))
                    .collect::<Result<Vec<_>, _>>()?;
                let phi = self.phi(&phi)?;
                MetricSpace::product(ProductSpace::new(factors, phi).map_err(|e| config(&e))?)
            }
        };
        stack.pop();
        self.spaces.insert(name.to_string(), space.clone());
        Ok(space)
    }

    pub fn product(&mut self, name: &str) -> Result<Arc<ProductSpace>, CliError> {
        match self.space(name)? {
            MetricSpace::Product(p) => Ok(p),
            other => Err(CliError::Config(format!(
                "space {name:?} is {other}, not a product"
            ))),
        }
    }

    pub fn curve(&mut self, name: &str) -> Result<Curve, CliError> {
        let def = self
            .cfg
            .curves
            .get(name)
            .ok_or_else(|| CliError::Config(format!("unknown curve {name:?}")))?
            .clone();
        let config = |e: &dyn std::fmt::Display| CliError::Config(format!("curve {name:?}: {e}"));
        match def {
            CurveDef::Polyline {
                space,
                vertices,
                breakpoints,
                constant_speed,
            } => {
                let s = self.space(&space)?;
                let pts = vertices
                    .iter()
                    .map(|v| point_from_json(&s, v))
                    .collect::<Result<Vec<_>, _>>()?;
                let c = match (breakpoints, constant_speed) {
                    (Some(_), true) => {
                        return Err(config(&"breakpoints and constant_speed are exclusive"))
                    }
                    (Some(b), false) => Curve::polyline(pts, b),
                    (None, true) => Curve::constant_speed_polyline(&s, pts),
                    (None, false) => Curve::polyline_uniform(pts),
                };
                c.map_err(|e| config(&e))
            }
            CurveDef::Segment {
                space,
                start,
                end,
                power,
            } => {
                let s = self.space(&space)?;
                Curve::segment_with_power(
                    point_from_json(&s, &start)?,
                    point_from_json(&s, &end)?,
                    power,
                )
                .map_err(|e| config(&e))
            }
            CurveDef::CircleArc {
                center,
                radius,
                from,
                to,
            } => Curve::circle_arc(center, radius, from, to).map_err(|e| config(&e)),
            CurveDef::Product { components } => {
                let parts = components
                    .iter()
                    .map(|c| self.curve(c))
                    .collect::<Result<Vec<_>, _>>()?;
                Curve::product(parts).map_err(|e| config(&e))
            }
        }
    }
}

/// Reads a point of `space` from JSON: a number (or one-element array) on
/// lines, an array on `ℓ^p` spaces, an index on finite spaces and an array
/// of factor points on products.
pub fn point_from_json(space: &MetricSpace, v: &Value) -> Result<Point, CliError> {
    let bad = || CliError::Config(format!("{v} is not a point of {space}"));
    let number = |x: &Value| x.as_f64().ok_or_else(bad);
    let point = match space {
        MetricSpace::RealLine | MetricSpace::HalfLine => match v {
            Value::Array(a) if a.len() == 1 => Point::scalar(number(&a[0])?),
            other => Point::scalar(number(other)?),
        },
        MetricSpace::Lp(_) => Point::Coords(
            v.as_array()
                .ok_or_else(bad)?
                .iter()
                .map(number)
                .collect::<Result<_, _>>()?,
        ),
        MetricSpace::Discrete { .. } | MetricSpace::Finite(_) => {
            Point::Index(v.as_u64().ok_or_else(bad)? as usize)
        }
        MetricSpace::Product(p) => {
            let parts = v.as_array().ok_or_else(bad)?;
            if parts.len() != p.arity() {
                return Err(bad());
            }
            Point::Tuple(
                p.factors()
                    .iter()
                    .zip(parts)
                    .map(|(f, part)| point_from_json(f, part))
                    .collect::<Result<_, _>>()?,
            )
        }
    };
    space
        .validate_point(&point)
        .map_err(|e| CliError::Config(format!("point {v}: {e}")))?;
    Ok(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn cfg(text: Value) -> RunConfig {
        RunConfig::from_json(&text.to_string()).unwrap()
    }

    #[test]
    fn resolves_nested_products() {
        let c = cfg(json!({
            "version": 1,
            "phis": {"e": {"kind": "euclidean", "dimension": 2}, "s": {"kind": "sum", "dimension": 2}},
            "spaces": {
                "line": {"kind": "real-line"},
                "plane": {"kind": "product", "factors": ["line", "line"], "phi": "e"},
                "big": {"kind": "product", "factors": ["plane", "line"], "phi": "s"}
            },
            "checks": []
        }));
        let mut r = Resolver::new(&c);
        r.resolve_all().unwrap();
        let big = r.space("big").unwrap();
        let x = point_from_json(&big, &json!([[0, 0], 0])).unwrap();
        let y = point_from_json(&big, &json!([[3, 4], [1]])).unwrap();
        assert_eq!(big.distance(&x, &y), Ok(6.0));
    }

    #[test]
    fn reports_dangling_and_cyclic_references() {
        let c = cfg(json!({
            "version": 1,
            "spaces": {"a": {"kind": "product", "factors": ["a"], "phi": "x"}},
            "checks": []
        }));
        assert!(Resolver::new(&c).resolve_all().is_err());
        let c = cfg(json!({
            "version": 1,
            "phis": {"x": {"kind": "sum", "dimension": 1}},
            "spaces": {"a": {"kind": "product", "factors": ["a"], "phi": "x"}},
            "checks": []
        }));
        let err = Resolver::new(&c).space("a").unwrap_err();
        assert!(err.to_string().contains("itself"));
    }

    #[test]
    fn rejects_bad_versions_and_fields() {
        assert!(RunConfig::from_json(r#"{"version": 2, "checks": []}"#).is_err());
        assert!(RunConfig::from_json(r#"{"version": 1, "checks": [], "extra": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"version": 1, "checks": [{"check": "nope"}]}"#).is_err());
    }

    #[test]
    fn tolerance_overrides() {
        let mut o = ToleranceOverrides::default();
        o.set("metric=1e-8").unwrap();
        assert_eq!(o.apply(Tolerances::default()).unwrap().metric, 1e-8);
        o.set("strict=1e-20").unwrap();
        assert!(o.apply(Tolerances::default()).is_err());
        assert!(o.set("bogus=1").is_err());
        assert!(o.set("metric").is_err());
    }

    #[test]
    fn infinite_exponents_in_json() {
        let c = cfg(json!({
            "version": 1,
            "phis": {"m": {"kind": "weighted-lp", "exponent": "inf", "weights": [1, 2]}},
            "spaces": {"linf": {"kind": "lp", "dimension": 2, "exponent": "infinity"}},
            "checks": []
        }));
        let mut r = Resolver::new(&c);
        assert_eq!(r.phi("m").unwrap().axis_value(1), 2.0);
        let s = r.space("linf").unwrap();
        let d = s
            .distance(
                &point_from_json(&s, &json!([0, 0])).unwrap(),
                &point_from_json(&s, &json!([1, -3])).unwrap(),
            )
            .unwrap();
        assert_eq!(d, 3.0);
    }
}
