//! Command-line interface: every subcommand becomes a [`RunConfig`] and goes
//! through the same runner as `run`.

use crate::config::{
    CheckDef, CheckKind, CurveDef, OutputMode, RunConfig, SpaceDef, ToleranceOverrides,
    CONFIG_VERSION,
};
use crate::runner::{run_config, Outcome, RunOptions};
use crate::shorthand::{parse_phi, parse_point, parse_points, parse_space, point_json};
use crate::{demos, CliError, EXIT_PASS};
use clap::{Args, Parser, Subcommand};
use phiprod::{PhiClass, Selector};
use std::collections::BTreeMap;

#[derive(Debug, Parser)]
#[command(
    name = "phiprod",
    version,
    about = "Checks metric, length and geodesic properties of glued product spaces"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every sampler (default: the config seed, or 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sample count for every sampling check.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Dyadic subdivision depth for every length check.
    #[arg(long, global = true)]
    pub depth: Option<u32>,
    /// Output format (default: the config's output mode, or text).
    #[arg(long, value_enum, global = true)]
    pub format: Option<OutputMode>,
    /// Tolerance override KEY=VAL with KEY one of metric, strict, embed, length_floor.
    #[arg(long = "tolerance", value_name = "KEY=VAL", global = true)]
    pub tolerances: Vec<String>,
    /// Adds elapsed time to every record; output is then not reproducible.
    #[arg(long, global = true)]
    pub timing: bool,
    /// Prints the built-in demo names and exits.
    #[arg(long)]
    pub list_demos: bool,
}

/// A space given by one or more `--space` factors and an optional `--phi`.
#[derive(Debug, Args)]
pub struct SpaceArgs {
    /// Factor space: line, half-line, lp:M:P, discrete:N or inline JSON. Repeat for products.
    #[arg(long = "space", required = true)]
    pub spaces: Vec<String>,
    /// Gluing function of the product, e.g. euclidean:2, sum:2, lp:2:3.
    #[arg(long)]
    pub phi: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classifies a gluing function on the ladder of product-preservation classes.
    ValidatePhi {
        /// Gluing function, e.g. weighted-euclidean:1,4 or lp:2:1.5.
        phi: String,
        /// Fails unless the classification matches, e.g. strictly-convex-norm.
        #[arg(long, value_parser = parse_class)]
        expect: Option<PhiClass>,
    },
    /// Samples the metric axioms of a product space.
    CheckProduct {
        #[command(flatten)]
        space: SpaceArgs,
    },
    /// Measures a polyline; on products also compares with the glued factor lengths.
    Length {
        #[command(flatten)]
        space: SpaceArgs,
        /// Vertices as flat coordinates, e.g. "0,0;3,4".
        #[arg(long)]
        vertices: String,
        /// Parametrizes the polyline by arclength.
        #[arg(long)]
        constant_speed: bool,
    },
    /// Builds a geodesic and tests it; optionally probes for a second one.
    Geodesic {
        #[command(flatten)]
        space: SpaceArgs,
        /// Start point as comma-separated coordinates across all factors.
        #[arg(long)]
        from: String,
        /// End point, same layout as --from.
        #[arg(long)]
        to: String,
        /// Per-factor selector: affine or corner:K. Repeat per factor.
        #[arg(long = "selector")]
        selectors: Vec<String>,
        /// Number of parameter samples along the geodesic.
        #[arg(long)]
        grid: Option<usize>,
        /// Also searches for a distinct geodesic between the endpoints.
        #[arg(long)]
        unique: bool,
    },
    /// Reports the Minkowski rank of a space.
    Rank {
        #[command(flatten)]
        space: SpaceArgs,
        /// Asserts the hypotheses under which the quasi-Euclidean rank equals the rank.
        #[arg(long)]
        assume_quasi_euclidean: bool,
    },
    /// Runs a built-in demo, or all of them.
    Demo {
        /// One of the names printed by --list-demos.
        name: Option<String>,
    },
    /// Runs a JSON config file.
    Run { config: std::path::PathBuf },
}

/// What the process prints and returns.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

impl Invocation {
    fn error(e: &CliError) -> Self {
        Invocation {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: e.exit_code(),
        }
    }
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli) -> Invocation {
    if cli.global.list_demos {
        return Invocation {
            stdout: demos::listing(),
            stderr: String::new(),
            code: EXIT_PASS,
        };
    }
    let Some(command) = &cli.command else {
        return Invocation::error(&CliError::Config("no subcommand given; see --help".into()));
    };
    match build(command).and_then(|cfg| run(&cfg, &cli.global)) {
        Ok(inv) => inv,
        Err(e) => Invocation::error(&e),
    }
}

fn options(g: &GlobalArgs) -> Result<RunOptions, CliError> {
    let mut tolerances = ToleranceOverrides::default();
    for t in &g.tolerances {
        tolerances.set(t)?;
    }
    Ok(RunOptions {
        seed: g.seed,
        samples: g.samples,
        depth: g.depth,
        tolerances,
        timing: g.timing,
    })
}

fn run(cfg: &RunConfig, g: &GlobalArgs) -> Result<Invocation, CliError> {
    let outcome: Outcome = run_config(cfg, &options(g)?)?;
    let stdout = match g.format.unwrap_or(cfg.output) {
        OutputMode::Json => outcome.to_json_lines(),
        OutputMode::Text => outcome.to_text(),
    };
    Ok(Invocation {
        stdout,
        stderr: String::new(),
        code: outcome.exit_code(),
    })
}

fn check(kind: CheckKind) -> CheckDef {
    CheckDef {
        kind,
        informational: false,
        seed: None,
        samples: None,
        tolerances: None,
        label: None,
    }
}

fn informational(kind: CheckKind) -> CheckDef {
    CheckDef {
        informational: true,
        ..check(kind)
    }
}

fn config(checks: Vec<CheckDef>) -> RunConfig {
    RunConfig {
        version: CONFIG_VERSION,
        seed: 0,
        tolerances: ToleranceOverrides::default(),
        spaces: BTreeMap::new(),
        phis: BTreeMap::new(),
        curves: BTreeMap::new(),
        checks,
        output: OutputMode::Text,
    }
}

/// The target space is named `space`, its factors `f0, f1, ..` and the gluing `phi`.
struct Target {
    factors: Vec<SpaceDef>,
    product: bool,
}

impl Target {
    fn install(args: &SpaceArgs, cfg: &mut RunConfig) -> Result<Target, CliError> {
        let factors = args
            .spaces
            .iter()
            .map(|s| parse_space(s))
            .collect::<Result<Vec<_>, _>>()?;
        match &args.phi {
            None if factors.len() > 1 => {
                return Err(CliError::Config(
                    "several --space factors need a --phi".into(),
                ));
            }
            None => {
                cfg.spaces.insert("space".into(), factors[0].clone());
            }
            Some(phi) => {
                cfg.phis.insert("phi".into(), parse_phi(phi)?);
                let names: Vec<String> = (0..factors.len()).map(|i| format!("f{i}")).collect();
                for (n, f) in names.iter().zip(&factors) {
                    cfg.spaces.insert(n.clone(), f.clone());
                }
                cfg.spaces.insert(
                    "space".into(),
                    SpaceDef::Product {
                        factors: names,
                        phi: "phi".into(),
                    },
                );
            }
        }
        Ok(Target {
            product: args.phi.is_some(),
            factors,
        })
    }

    fn point(&self, flat: &[f64]) -> Result<serde_json::Value, CliError> {
        point_json(&self.factors, self.product, flat)
    }
}

fn parse_class(text: &str) -> Result<PhiClass, String> {
    serde_json::from_value(serde_json::Value::String(text.into())).map_err(|e| e.to_string())
}

fn parse_selector(text: &str) -> Result<Selector, CliError> {
    match text.trim().split_once(':') {
        None if text.trim() == "affine" => Ok(Selector::Affine),
        Some(("corner", k)) => k
            .trim()
            .parse()
            .map(Selector::Corner)
            .map_err(|_| CliError::Config(format!("bad corner index in {text:?}"))),
        _ => Err(CliError::Config(format!(
            "selector must be affine or corner:K, got {text:?}"
        ))),
    }
}

/// Translates a subcommand into a config.
pub fn build(command: &Command) -> Result<RunConfig, CliError> {
    let mut cfg = config(Vec::new());
    match command {
        Command::ValidatePhi { phi, expect } => {
            cfg.phis.insert("phi".into(), parse_phi(phi)?);
            cfg.checks.push(check(CheckKind::Classify {
                phi: "phi".into(),
                expect: *expect,
            }));
        }
        Command::CheckProduct { space } => {
            if space.phi.is_none() {
                return Err(CliError::Config("check-product needs a --phi".into()));
            }
            Target::install(space, &mut cfg)?;
            cfg.checks.push(informational(CheckKind::Classify {
                phi: "phi".into(),
                expect: None,
            }));
            cfg.checks.push(check(CheckKind::MetricAxioms {
                space: "space".into(),
            }));
        }
        Command::Length {
            space,
            vertices,
            constant_speed,
        } => {
            let target = Target::install(space, &mut cfg)?;
            let flat = parse_points(vertices)?;
            let points = flat
                .iter()
                .map(|v| target.point(v))
                .collect::<Result<Vec<_>, _>>()?;
            cfg.curves.insert(
                "curve".into(),
                CurveDef::Polyline {
                    space: "space".into(),
                    vertices: points.clone(),
                    breakpoints: None,
                    constant_speed: *constant_speed,
                },
            );
            cfg.checks.push(check(CheckKind::CurveLength {
                space: "space".into(),
                curve: "curve".into(),
                depth: None,
            }));
            if target.product {
                // Factor projections of the vertices, each traversed at constant speed.
                let mut names = Vec::new();
                for i in 0..target.factors.len() {
                    let name = format!("c{i}");
                    let projected = points.iter().map(|p| p[i].clone()).collect();
                    cfg.curves.insert(
                        name.clone(),
                        CurveDef::Polyline {
                            space: format!("f{i}"),
                            vertices: projected,
                            breakpoints: None,
                            constant_speed: true,
                        },
                    );
                    names.push(name);
                }
                cfg.checks.push(check(CheckKind::ProductLength {
                    space: "space".into(),
                    curves: names,
                    depth: None,
                }));
            }
        }
        Command::Geodesic {
            space,
            from,
            to,
            selectors,
            grid,
            unique,
        } => {
            let target = Target::install(space, &mut cfg)?;
            let from = target.point(&parse_point(from)?)?;
            let to = target.point(&parse_point(to)?)?;
            let selectors = selectors
                .iter()
                .map(|s| parse_selector(s))
                .collect::<Result<Vec<_>, _>>()?;
            cfg.checks.push(check(CheckKind::Geodesic {
                space: "space".into(),
                from: from.clone(),
                to: to.clone(),
                selectors: selectors.clone(),
                grid: *grid,
            }));
            if *unique {
                if !target.product {
                    return Err(CliError::Config("--unique needs a product space".into()));
                }
                cfg.checks.push(check(CheckKind::Uniqueness {
                    space: "space".into(),
                    from,
                    to,
                    selector_sets: if selectors.is_empty() {
                        vec![]
                    } else {
                        vec![selectors]
                    },
                    grid: None,
                    perturbations: None,
                }));
            }
        }
        Command::Rank {
            space,
            assume_quasi_euclidean,
        } => {
            Target::install(space, &mut cfg)?;
            cfg.checks.push(check(CheckKind::Rank {
                space: "space".into(),
                assume_quasi_euclidean: *assume_quasi_euclidean,
            }));
        }
        Command::Demo { name } => {
            let names: Vec<String> = match name {
                Some(n) => vec![n.clone()],
                None => demos::DEMOS.iter().map(|d| d.0.to_string()).collect(),
            };
            for name in names {
                cfg.checks.push(check(CheckKind::Demo { name }));
            }
        }
        Command::Run { config: path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            cfg = RunConfig::from_json(&text)?;
        }
    }
    Ok(cfg)
}

/// Parses `args` (including the program name) and executes them.
pub fn invoke<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() {
                crate::EXIT_CONFIG
            } else {
                EXIT_PASS
            };
            let text = e.render().to_string();
            if e.use_stderr() {
                Invocation {
                    stdout: String::new(),
                    stderr: text,
                    code,
                }
            } else {
                Invocation {
                    stdout: text,
                    stderr: String::new(),
                    code,
                }
            }
        }
    }
}
