//! Readers and writers for the line-oriented text formats: map definitions,
//! scheme dumps, measure files and tower dumps.
//!
//! Blank lines and `#` comments are ignored everywhere. Errors carry
//! 1-based line numbers.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::inducing::InducingScheme;
use crate::interval::Interval;
use crate::map::{Branch, BranchKind, Mode, PiecewiseMap};
use crate::measure::PiecewiseMeasure;
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};
use crate::tower::{Tower, TowerElement, Transition};

#[derive(Clone, Debug, PartialEq)]
pub enum BranchSpec {
    Affine {
        lo: Rational,
        hi: Rational,
        slope: Rational,
        offset: Rational,
    },
    /// `a x² + b x + c`, accepted only with `mode = numeric`.
    Quadratic {
        lo: Rational,
        hi: Rational,
        a: Rational,
        b: Rational,
        c: Rational,
    },
}

/// A parsed map definition, before choosing a scalar type.
#[derive(Clone, Debug, PartialEq)]
pub struct MapSpec {
    pub mode: Mode,
    pub ambient: (Rational, Rational),
    pub branches: Vec<BranchSpec>,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn rational_at(line: usize, s: &str) -> Result<Rational> {
    parse_rational(s).map_err(|m| Error::parse(line, m))
}

fn range_at(line: usize, s: &str) -> Result<(Rational, Rational)> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| Error::parse(line, format!("expected lo..hi, found `{s}`")))?;
    Ok((rational_at(line, a)?, rational_at(line, b)?))
}

fn natural_at(line: usize, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("expected a natural number, found `{s}`")))
}

fn interval_at<S: Scalar>(line: usize, s: &str) -> Result<Interval<S>> {
    let (lo, hi) = range_at(line, s)?;
    Interval::open(S::from_rational(&lo), S::from_rational(&hi))
        .ok_or_else(|| Error::parse(line, format!("empty interval `{s}`")))
}

/// Splits `key=value` tokens; bare tokens come back with an empty key.
fn fields(rest: &str) -> Vec<(&str, &str)> {
    rest.split_whitespace()
        .map(|t| t.split_once('=').unwrap_or(("", t)))
        .collect()
}

fn field<'a>(line: usize, fs: &[(&str, &'a str)], key: &str) -> Result<&'a str> {
    fs.iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::parse(line, format!("missing `{key}=`")))
}

fn optional_field<'a>(fs: &[(&str, &'a str)], key: &str) -> Option<&'a str> {
    fs.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

pub fn parse_map_spec(text: &str) -> Result<MapSpec> {
    let mut mode = Mode::Exact;
    let mut ambient = None;
    let mut branches = Vec::new();
    for (n, line) in content_lines(text) {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(n, format!("expected `key = value`, found `{line}`")))?;
        let words: Vec<&str> = value.split_whitespace().collect();
        match key.trim() {
            "mode" => {
                mode = match value.trim() {
                    "exact" => Mode::Exact,
                    "numeric" => Mode::Numeric,
                    other => return Err(Error::parse(n, format!("unknown mode `{other}`"))),
                }
            }
            "ambient" => ambient = Some(range_at(n, value.trim())?),
            "branch" => {
                let [lo, hi, slope, offset] = words[..] else {
                    return Err(Error::parse(
                        n,
                        "branch needs: domain_lo domain_hi slope offset",
                    ));
                };
                branches.push(BranchSpec::Affine {
                    lo: rational_at(n, lo)?,
                    hi: rational_at(n, hi)?,
                    slope: rational_at(n, slope)?,
                    offset: rational_at(n, offset)?,
                });
            }
            "quadratic" => {
                let [lo, hi, a, b, c] = words[..] else {
                    return Err(Error::parse(
                        n,
                        "quadratic needs: domain_lo domain_hi a b c",
                    ));
                };
                if mode != Mode::Numeric {
                    return Err(Error::parse(
                        n,
                        "quadratic branches need `mode = numeric` declared first",
                    ));
                }
                branches.push(BranchSpec::Quadratic {
                    lo: rational_at(n, lo)?,
                    hi: rational_at(n, hi)?,
                    a: rational_at(n, a)?,
                    b: rational_at(n, b)?,
                    c: rational_at(n, c)?,
                });
            }
            other => return Err(Error::parse(n, format!("unknown key `{other}`"))),
        }
    }
    let ambient = ambient.ok_or_else(|| Error::parse(0, "missing `ambient`"))?;
    Ok(MapSpec {
        mode,
        ambient,
        branches,
    })
}

impl MapSpec {
    pub fn build<S: Scalar>(&self) -> Result<PiecewiseMap<S>> {
        let r = S::from_rational;
        let iv = |lo: &Rational, hi: &Rational| {
            Interval::open(r(lo), r(hi))
                .ok_or_else(|| Error::InvalidMap(format!("empty domain {lo}..{hi}")))
        };
        let branches = self
            .branches
            .iter()
            .map(|b| match b {
                BranchSpec::Affine {
                    lo,
                    hi,
                    slope,
                    offset,
                } => Branch::affine(iv(lo, hi)?, r(slope), r(offset)),
                BranchSpec::Quadratic { lo, hi, a, b, c } => {
                    Branch::quadratic(iv(lo, hi)?, r(a), r(b), r(c))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        PiecewiseMap::new(iv(&self.ambient.0, &self.ambient.1)?, branches)
    }
}

pub fn render_map(map: &PiecewiseMap<Rational>) -> String {
    let amb = map.ambient();
    let mut out = format!(
        "mode = exact\nambient = {}..{}\n",
        format_rational(amb.lo()),
        format_rational(amb.hi())
    );
    for b in map.branches() {
        let d = b.domain();
        if let BranchKind::Affine { slope, offset } = b.kind() {
            let _ = writeln!(
                out,
                "branch = {} {} {} {}",
                format_rational(d.lo()),
                format_rational(d.hi()),
                format_rational(slope),
                format_rational(offset)
            );
        }
    }
    out
}

/// Reads a scheme dump. `covered=` and `deficit=` are optional; when given
/// they must agree with the elements.
pub fn parse_scheme<S: Scalar>(text: &str, map: &PiecewiseMap<S>) -> Result<InducingScheme<S>> {
    let mut lines = content_lines(text);
    let (hn, header) = lines
        .next()
        .ok_or_else(|| Error::parse(0, "empty scheme file"))?;
    let hf = fields(header);
    let base = interval_at(hn, field(hn, &hf, "base")?)?;
    let tau_max = natural_at(hn, field(hn, &hf, "tau_max")?)?;
    let ext = optional_field(&hf, "ext")
        .map(|s| interval_at(hn, s))
        .transpose()?;
    let mut parts = Vec::new();
    for (n, line) in lines {
        let Some(rest) = line.strip_prefix("J ") else {
            return Err(Error::parse(
                n,
                format!("expected a `J` record, found `{line}`"),
            ));
        };
        let fs = fields(rest);
        let interval = interval_at(n, fs.first().map(|f| f.1).unwrap_or(""))?;
        let word = field(n, &fs, "word")?
            .split(',')
            .map(|w| natural_at(n, w))
            .collect::<Result<Vec<usize>>>()?;
        if let Some(t) = optional_field(&fs, "tau") {
            if natural_at(n, t)? != word.len() {
                return Err(Error::parse(
                    n,
                    format!("tau={t} but the word has length {}", word.len()),
                ));
            }
        }
        parts.push((interval, word));
    }
    let scheme = InducingScheme::from_parts(map, base, ext, parts, tau_max)
        .map_err(|e| Error::parse(hn, e.to_string()))?;
    for (key, value) in [
        ("covered", &scheme.covered_length),
        ("deficit", &scheme.mass_deficit),
    ] {
        if let Some(s) = optional_field(&hf, key) {
            let given = S::from_rational(&rational_at(hn, s)?);
            if !given.same(value) {
                return Err(Error::parse(
                    hn,
                    format!("{key}={s} but the elements give {}", value.render()),
                ));
            }
        }
    }
    Ok(scheme)
}

/// Reads `piece`/`atom` records; a `total=` header, when present, must match.
pub fn parse_measure<S: Scalar>(text: &str) -> Result<PiecewiseMeasure<S>> {
    let mut pieces = Vec::new();
    let mut atoms = Vec::new();
    let mut total = None;
    for (n, line) in content_lines(text) {
        let fs = fields(line);
        match fs.first() {
            Some(("total", v)) => total = Some((n, S::from_rational(&rational_at(n, v)?))),
            Some(("", "piece")) => {
                let iv = interval_at(n, fs.get(1).map(|f| f.1).unwrap_or(""))?;
                pieces.push((
                    iv,
                    S::from_rational(&rational_at(n, field(n, &fs, "height")?)?),
                ));
            }
            Some(("", "atom")) => {
                let x = S::from_rational(&rational_at(n, fs.get(1).map(|f| f.1).unwrap_or(""))?);
                atoms.push((
                    x,
                    S::from_rational(&rational_at(n, field(n, &fs, "mass")?)?),
                ));
            }
            _ => {
                return Err(Error::parse(
                    n,
                    format!("expected `total=`, `piece` or `atom`, found `{line}`"),
                ))
            }
        }
    }
    let mu = PiecewiseMeasure::new(pieces, atoms).map_err(|e| Error::parse(0, e.to_string()))?;
    if let Some((n, t)) = total {
        if !t.same(&mu.total_mass) {
            return Err(Error::parse(
                n,
                format!(
                    "total={} but the records sum to {}",
                    t.render(),
                    mu.total_mass.render()
                ),
            ));
        }
    }
    Ok(mu)
}

/// Reads a tower dump. Elements get `first_seen_depth = level`.
pub fn parse_tower<S: Scalar>(text: &str) -> Result<Tower<S>> {
    let mut lines = content_lines(text);
    let (hn, header) = lines
        .next()
        .ok_or_else(|| Error::parse(0, "empty tower file"))?;
    let hf = fields(header);
    let depth = natural_at(hn, field(hn, &hf, "depth")?)?;
    let saturated = match field(hn, &hf, "saturated")? {
        "0" => false,
        "1" => true,
        other => {
            return Err(Error::parse(
                hn,
                format!("saturated must be 0 or 1, found `{other}`"),
            ))
        }
    };
    let mut elements = Vec::new();
    let mut transitions = Vec::new();
    for (n, line) in lines {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["elem", id, rest @ ..] => {
                let fs = fields(&rest.join(" "))
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect::<Vec<_>>();
                let get = |key: &str| {
                    fs.iter()
                        .find(|(k, _)| k == key)
                        .map(|(_, v)| v.clone())
                        .ok_or_else(|| Error::parse(n, format!("missing `{key}=`")))
                };
                let level = natural_at(n, &get("level")?)?;
                elements.push(TowerElement {
                    id: natural_at(n, id)?,
                    interval: interval_at(n, &get("interval")?)?,
                    level,
                    first_seen_depth: level,
                });
            }
            ["edge", from, branch, to] => transitions.push(Transition {
                from: natural_at(n, from)?,
                branch: natural_at(n, branch)?,
                to: natural_at(n, to)?,
            }),
            _ => {
                return Err(Error::parse(
                    n,
                    format!("expected `elem` or `edge`, found `{line}`"),
                ))
            }
        }
    }
    Tower::from_parts(elements, transitions, depth, saturated)
        .map_err(|e| Error::parse(hn, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{counterexample_scheme, doubling_map, markov_map};
    use crate::scalar::q;
    use crate::tower::build_tower;

    const DOUBLING: &str = "# doubling map\nmode = exact\nambient = 0/1..1/1\nbranch = 0/1 1/2 2/1 0/1\nbranch = 1/2 1/1 2/1 -1/1\n";

    #[test]
    fn map_round_trip() {
        let spec = parse_map_spec(DOUBLING).unwrap();
        let d: PiecewiseMap<Rational> = spec.build().unwrap();
        assert_eq!(d, doubling_map());
        assert_eq!(parse_map_spec(&render_map(&d)).unwrap(), spec);
        let f: PiecewiseMap<f64> = spec.build().unwrap();
        assert_eq!(f.mode(), Mode::Numeric);
    }

    #[test]
    fn map_errors_carry_lines() {
        let bad = "ambient = 0..1\nbranch = 0 1/2 2\n";
        assert_eq!(
            parse_map_spec(bad),
            Err(Error::parse(
                2,
                "branch needs: domain_lo domain_hi slope offset"
            ))
        );
        assert!(matches!(
            parse_map_spec("ambient = 0..1\nbranch = 0 1/0 2 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_map_spec("quadratic = 0 1/2 -4 4 0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_map_spec("speed = 3\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn numeric_quadratic_map() {
        let text =
            "mode = numeric\nambient = 0..1\nquadratic = 0 1/2 -4 4 0\nquadratic = 1/2 1 -4 4 0\n";
        let m: PiecewiseMap<f64> = parse_map_spec(text).unwrap().build().unwrap();
        assert!(!m.is_affine());
        assert!(parse_map_spec(text).unwrap().build::<Rational>().is_err());
    }

    #[test]
    fn scheme_round_trip() {
        let d = doubling_map();
        let s = counterexample_scheme(4);
        let back = parse_scheme(&s.dump(), &d).unwrap();
        assert_eq!(back, s);
        let tampered = s.dump().replacen("covered=", "covered=1/2 was=", 1);
        assert!(matches!(
            parse_scheme(&tampered, &d),
            Err(Error::Parse { line: 1, .. })
        ));
        let bad_tau = "base=0..1 tau_max=2\nJ 1/4..1/2 tau=3 word=0,1\n";
        assert!(matches!(
            parse_scheme(bad_tau, &d),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn measure_round_trip() {
        let mu = PiecewiseMeasure::new(
            vec![(Interval::open(q(0, 1), q(1, 2)).unwrap(), q(4, 3))],
            vec![(q(3, 4), q(1, 3))],
        )
        .unwrap();
        assert_eq!(parse_measure::<Rational>(&mu.dump()).unwrap(), mu);
        assert!(matches!(
            parse_measure::<Rational>("total=1/1\natom 1/2 mass=1/2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_measure::<Rational>("blob 1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn tower_round_trip() {
        let t = build_tower(&markov_map(), 5, 100).unwrap();
        let back: Tower<Rational> = parse_tower(&t.dump()).unwrap();
        assert_eq!(back.dump(), t.dump());
        assert!(matches!(
            parse_tower::<Rational>("depth=1 saturated=2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
