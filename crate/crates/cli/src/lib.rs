//! Pipeline driver behind the `liftkit` binary.
//!
//! [`run`] executes one stage and returns its exit code with the buffered
//! report text; [`report_bundle`] chains stages under `== <stage>` headers.
//! Exit codes: 0 pass, 1 fail, 2 inconclusive or budget exhausted, 3 usage
//! or input error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use liftkit::config::{Budgets, DEFAULT_WORD_BUDGET};
use liftkit::inducing::{
    build_canonical_scheme, certify_nice, check_conditions, check_h3_surrogate,
    check_nested_or_disjoint, embed_in_tower, InducingScheme, SchemeCheck,
};
use liftkit::io::{parse_map_spec, parse_measure, parse_scheme};
use liftkit::measure::{
    kac_roundtrip_check, lift_measure, markov_invariant_density, PiecewiseMeasure,
};
use liftkit::scalar::parse_rational;
use liftkit::thermo::{
    check_h2, enumerate_cylinders, recc_summability, variation_range, FitVerdict, Potential,
};
use liftkit::{
    build_tower, check_markov, ConditionReport, Error, Interval, Mode, PiecewiseMap, Scalar,
    Verdict,
};

pub const EXIT_USAGE: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Tower,
    Nice,
    Scheme,
    Check,
    Lift,
    Kac,
    Thermo,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Tower => "tower",
            Command::Nice => "nice",
            Command::Scheme => "scheme",
            Command::Check => "check",
            Command::Lift => "lift",
            Command::Kac => "kac",
            Command::Thermo => "thermo",
            Command::Report => "report",
        }
    }
}

#[derive(Clone, Debug, Parser)]
#[command(
    name = "liftkit",
    version,
    about = "Markov extensions, inducing schemes and lifted measures for interval maps"
)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Map definition file.
    #[arg(long = "map")]
    pub map_file: PathBuf,
    /// Tower depth.
    #[arg(long, default_value_t = 5)]
    pub depth: usize,
    /// Largest inducing time kept in the scheme
    #[arg(long, default_value_t = 12)]
    pub tau_max: usize,
    /// Boundary-orbit horizon for nice certification.
    #[arg(long, default_value_t = 20)]
    pub horizon: usize,
    /// Candidate nice interval `lo..hi`.
    #[arg(long)]
    pub nice: Option<String>,
    /// Extended base `lo..hi` for the (M+)/(C+) checks.
    #[arg(long)]
    pub extended: Option<String>,
    /// Scheme dump to load instead of building from `--nice`.
    #[arg(long)]
    pub scheme: Option<PathBuf>,
    /// Measure file, or `lebesgue` / `markov`.
    #[arg(long)]
    pub measure: Option<String>,
    #[arg(long, default_value_t = 6)]
    pub test_depth: usize,
    /// Cap on every enumeration.
    #[arg(long, env = "LIFTKIT_BUDGET", default_value_t = DEFAULT_WORD_BUDGET,
          value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    pub budget: usize,
    /// `const:c`, `affine:a,b` (or `affine:a0,b0;a1,b1;...`), `neglog:t`.
    #[arg(long, default_value = "neglog:1")]
    pub potential: String,
    /// Largest cylinder length for the coding diagnostics.
    #[arg(long, default_value_t = 3)]
    pub n_max: usize,
    /// Write the report to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults for `command` on `map_file`, as if only `--map` were given.
    pub fn new(command: Command, map_file: impl Into<PathBuf>) -> Self {
        let map_file = map_file.into();
        let mut c = Self::parse_from(["liftkit", command.name(), "--map", "-"]);
        c.map_file = map_file;
        c
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub text: String,
}

impl Outcome {
    fn usage(msg: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            text: format!("error kind=usage msg=\"{msg}\"\n"),
        }
    }
}

/// Buffered output of one stage.
struct Stage {
    text: String,
    code: i32,
}

impl Stage {
    fn new() -> Self {
        Self {
            text: String::new(),
            code: 0,
        }
    }

    fn line(&mut self, s: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{s}");
    }

    fn report(&mut self, r: &ConditionReport) {
        self.line(r);
        self.code = self.code.max(r.exit_code());
    }

    fn verdict(&mut self, v: Verdict) {
        self.code = self.code.max(v.exit_code());
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        _ if e.is_budget() => 2,
        Error::PreconditionUnverified { .. } | Error::Unsaturated { .. } => 2,
        _ => EXIT_USAGE,
    }
}

fn error_outcome(e: &Error) -> Outcome {
    let kind = match e {
        Error::Parse { .. } => "parse",
        _ if e.is_budget() => "budget",
        Error::PreconditionUnverified { .. } => "unverified",
        _ => "input",
    };
    let mut text = format!("error kind={kind} msg=\"{e}\"");
    if let Error::PreconditionUnverified { witness, .. } = e {
        for (k, v) in witness {
            let _ = write!(text, " {k}={v}");
        }
    }
    text.push('\n');
    Outcome {
        code: error_code(e),
        text,
    }
}

fn read(path: &Path) -> Result<String, Outcome> {
    fs::read_to_string(path)
        .map_err(|e| Outcome::usage(format!("cannot read {}: {e}", path.display())))
}

/// Runs one stage; the report goes to `--out` when given (and is returned
/// either way).
pub fn run(config: &RunConfig) -> Outcome {
    let outcome = if config.command == Command::Report {
        report_bundle(&bundle_for(config))
    } else {
        run_stage(config)
    };
    if let Some(path) = &config.out {
        if let Err(e) = fs::write(path, &outcome.text) {
            return Outcome::usage(format!("cannot write {}: {e}", path.display()));
        }
    }
    outcome
}

/// The stages a `report` run expands to.
fn bundle_for(config: &RunConfig) -> Vec<RunConfig> {
    let mut commands = vec![Command::Tower];
    if config.nice.is_some() {
        commands.push(Command::Nice);
    }
    if config.nice.is_some() || config.scheme.is_some() {
        commands.extend([Command::Check, Command::Kac, Command::Thermo]);
    }
    commands
        .into_iter()
        .map(|command| RunConfig {
            command,
            out: None,
            ..config.clone()
        })
        .collect()
}

/// Runs every stage in order; the exit code is the largest stage code.
pub fn report_bundle(configs: &[RunConfig]) -> Outcome {
    let mut text = String::new();
    let mut code = 0;
    for c in configs {
        let o = if c.command == Command::Report {
            Outcome::usage("report cannot be nested")
        } else {
            run_stage(c)
        };
        let _ = writeln!(text, "== {}", c.command.name());
        text.push_str(&o.text);
        code = code.max(o.code);
    }
    Outcome { code, text }
}

fn run_stage(config: &RunConfig) -> Outcome {
    let text = match read(&config.map_file) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let spec = match parse_map_spec(&text) {
        Ok(s) => s,
        Err(e) => return error_outcome(&e),
    };
    let result = match spec.mode {
        Mode::Exact => spec
            .build()
            .and_then(|m| execute::<liftkit::Rational>(config, &m)),
        Mode::Numeric => spec.build().and_then(|m| execute::<f64>(config, &m)),
    };
    match result {
        Ok(Ok(stage)) => Outcome {
            code: stage.code,
            text: stage.text,
        },
        Ok(Err(o)) => o,
        Err(e) => error_outcome(&e),
    }
}

fn parse_interval<S: Scalar>(s: &str) -> Result<Interval<S>, Outcome> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| Outcome::usage(format!("expected lo..hi, found `{s}`")))?;
    let a = parse_rational(a).map_err(Outcome::usage)?;
    let b = parse_rational(b).map_err(Outcome::usage)?;
    Interval::open(S::from_rational(&a), S::from_rational(&b))
        .ok_or_else(|| Outcome::usage(format!("empty interval `{s}`")))
}

pub fn parse_potential<S: Scalar>(s: &str, map: &PiecewiseMap<S>) -> Result<Potential<S>, String> {
    let num = |t: &str| parse_rational(t).map(|r| S::from_rational(&r));
    match s.split_once(':') {
        Some(("const", c)) => Ok(Potential::Constant(num(c)?)),
        Some(("neglog", t)) => Ok(Potential::NegLogDerivative(num(t)?)),
        Some(("affine", body)) => {
            let coeffs = body
                .split(';')
                .map(|pair| {
                    let (a, b) = pair
                        .split_once(',')
                        .ok_or_else(|| format!("expected a,b in `{pair}`"))?;
                    Ok((num(a)?, num(b)?))
                })
                .collect::<Result<Vec<_>, String>>()?;
            Ok(match coeffs.as_slice() {
                [(a, b)] => Potential::affine(map, a.clone(), b.clone()),
                _ => Potential::AffinePerBranch(coeffs),
            })
        }
        _ => Err(format!("unknown potential `{s}`")),
    }
}

type StageResult = liftkit::Result<Result<Stage, Outcome>>;

fn execute<S: Scalar>(c: &RunConfig, map: &PiecewiseMap<S>) -> StageResult {
    let budgets = Budgets::uniform(c.budget);
    let mut st = Stage::new();
    match c.command {
        Command::Tower => {
            let tower = build_tower(map, c.depth, c.budget)?;
            st.text.push_str(&tower.dump());
            st.report(&check_markov(&tower, map, c.depth.max(1)));
        }
        Command::Nice => {
            let Some(v) = &c.nice else {
                return Ok(Err(Outcome::usage("nice needs --nice lo..hi")));
            };
            let v = match parse_interval::<S>(v) {
                Ok(v) => v,
                Err(o) => return Ok(Err(o)),
            };
            let cert = certify_nice(map, &v, c.horizon)?;
            st.report(&cert.to_report());
        }
        Command::Scheme => {
            let scheme = match load_scheme(c, map)? {
                Ok(s) => s,
                Err(o) => return Ok(Err(o)),
            };
            st.text.push_str(&scheme.dump());
        }
        Command::Check => {
            let scheme = match load_scheme(c, map)? {
                Ok(s) => s,
                Err(o) => return Ok(Err(o)),
            };
            let which: &[SchemeCheck] = if scheme.extended_base.is_some() {
                &SchemeCheck::ALL
            } else {
                &SchemeCheck::BASIC
            };
            let reports = check_conditions(
                map,
                &scheme,
                c.tau_max.max(scheme.max_tau()),
                which,
                c.budget,
            );
            for r in &reports {
                st.report(r);
            }
            if let Some(v) = &c.nice {
                if let Ok(v) = parse_interval::<S>(v) {
                    st.report(&check_nested_or_disjoint(map, &v, scheme.tau_max, c.budget));
                }
            }
            st.report(&check_h3_surrogate(&scheme));
            let tower = build_tower(map, c.depth, c.budget)?;
            match embed_in_tower(&scheme, &tower, map, &reports, budgets.samples) {
                Ok(r) => st.report(&r),
                Err(Error::PreconditionUnverified { reason, .. }) => {
                    st.line(format!("FirstReturn skipped reason=\"{reason}\""));
                }
                Err(e) => return Err(e),
            }
        }
        Command::Lift => {
            let scheme = match load_scheme(c, map)? {
                Ok(s) => s,
                Err(o) => return Ok(Err(o)),
            };
            let nu = match load_measure(c, map, Some(&scheme.base))? {
                Ok(m) => m,
                Err(o) => return Ok(Err(o)),
            };
            let lift = lift_measure(map, &scheme, &nu)?;
            st.line(format!(
                "lift Q={} unlifted={} truncated={}",
                lift.q.render(),
                lift.unlifted_mass.render(),
                u8::from(lift.truncated())
            ));
            st.text.push_str(&lift.measure.dump());
        }
        Command::Kac => {
            let scheme = match load_scheme(c, map)? {
                Ok(s) => s,
                Err(o) => return Ok(Err(o)),
            };
            let mu = match load_measure(c, map, None)? {
                Ok(m) => m,
                Err(o) => return Ok(Err(o)),
            };
            let reports = check_conditions(
                map,
                &scheme,
                c.tau_max.max(scheme.max_tau()),
                &SchemeCheck::BASIC,
                c.budget,
            );
            let tower = build_tower(map, c.depth, c.budget)?;
            let out =
                kac_roundtrip_check(&scheme, &tower, map, &mu, &reports, c.test_depth, &budgets)?;
            for r in out.reports() {
                st.report(r);
            }
        }
        Command::Thermo => {
            let scheme = match load_scheme(c, map)? {
                Ok(s) => s,
                Err(o) => return Ok(Err(o)),
            };
            let phi = match parse_potential(&c.potential, map) {
                Ok(p) => p,
                Err(m) => return Ok(Err(Outcome::usage(m))),
            };
            st.line(format!("potential {}", phi.describe()));
            st.report(&check_h2(&scheme, map, c.n_max, c.budget)?);
            for cyl in enumerate_cylinders(&scheme, map, 1, c.budget).0 {
                st.line(cyl);
            }
            let (vars, fit) = variation_range(&scheme, map, &phi, 1..=c.n_max.max(1), c.budget)?;
            for v in &vars {
                st.line(v);
            }
            st.line(&fit);
            st.verdict(match fit.verdict {
                FitVerdict::Consistent => Verdict::PassAtDepth,
                FitVerdict::Violated => Verdict::Fail,
                FitVerdict::Inconclusive => Verdict::Inconclusive,
            });
            let recc = recc_summability(&scheme, map, &phi, &S::zero(), 0.0, scheme.tau_max)?;
            for line in recc.records() {
                st.line(line);
            }
            st.verdict(recc.sum1.verdict);
        }
        Command::Report => unreachable!("expanded by run"),
    }
    Ok(Ok(st))
}

fn load_scheme<S: Scalar>(
    c: &RunConfig,
    map: &PiecewiseMap<S>,
) -> liftkit::Result<Result<InducingScheme<S>, Outcome>> {
    if let Some(path) = &c.scheme {
        return Ok(match read(path) {
            Ok(text) => Ok(parse_scheme(&text, map)?),
            Err(o) => Err(o),
        });
    }
    let Some(v) = &c.nice else {
        return Ok(Err(Outcome::usage(format!(
            "{} needs --scheme or --nice",
            c.command.name()
        ))));
    };
    let v = match parse_interval::<S>(v) {
        Ok(v) => v,
        Err(o) => return Ok(Err(o)),
    };
    let ext = match c.extended.as_deref().map(parse_interval::<S>).transpose() {
        Ok(e) => e,
        Err(o) => return Ok(Err(o)),
    };
    let cert = certify_nice(map, &v, c.horizon)?;
    Ok(Ok(build_canonical_scheme(
        map,
        &cert,
        c.tau_max,
        ext.as_ref(),
        c.budget,
    )?))
}

/// `lebesgue` is normalized Lebesgue on `on` (the ambient interval when
/// `None`); `markov` is the invariant density of a Markov map.
fn load_measure<S: Scalar>(
    c: &RunConfig,
    map: &PiecewiseMap<S>,
    on: Option<&Interval<S>>,
) -> liftkit::Result<Result<PiecewiseMeasure<S>, Outcome>> {
    let support = on.cloned().unwrap_or_else(|| map.ambient().interior());
    Ok(match c.measure.as_deref() {
        None | Some("lebesgue") => Ok(PiecewiseMeasure::uniform(&support)),
        Some("markov") => Ok(markov_invariant_density(map)?),
        Some(path) => match read(Path::new(path)) {
            Ok(text) => Ok(parse_measure(&text)?),
            Err(o) => Err(o),
        },
    })
}
