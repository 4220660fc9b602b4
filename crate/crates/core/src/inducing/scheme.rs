//! Canonical inducing schemes built from homeomorphic pullbacks of a nice set.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::map::PiecewiseMap;
use crate::scalar::Scalar;

use super::nice::NiceCertificate;

#[derive(Clone, Debug, PartialEq)]
pub struct BasicElement<S> {
    pub interval: Interval<S>,
    pub tau: usize,
    /// Monotonicity neighbourhood `U_J`: the cell of `f^τ` containing `J`.
    pub host: Interval<S>,
    /// `J⁺`, mapped homeomorphically onto the extended base.
    pub extended_host: Option<Interval<S>>,
    pub branch_word: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InducingScheme<S> {
    pub base: Interval<S>,
    pub extended_base: Option<Interval<S>>,
    /// Sorted by `(tau, lo)`.
    pub elements: Vec<BasicElement<S>>,
    pub tau_max: usize,
    pub covered_length: S,
    pub mass_deficit: S,
}

/// A homeomorphic pullback: `f^{word.len()}` maps `interval` onto the target.
#[derive(Clone, Debug, PartialEq)]
pub struct Pullback<S> {
    pub interval: Interval<S>,
    pub word: Vec<usize>,
}

impl<S> Pullback<S> {
    pub fn tau(&self) -> usize {
        self.word.len()
    }
}

/// All homeomorphic pullbacks of `target` with times `1..=n_max`, level by
/// level (time ascending, then left endpoint).
pub fn full_pullbacks<S: Scalar>(
    map: &PiecewiseMap<S>,
    target: &Interval<S>,
    n_max: usize,
    budget: usize,
) -> Result<Vec<Pullback<S>>> {
    let mut out = Vec::new();
    let mut frontier = vec![Pullback {
        interval: target.interior(),
        word: Vec::new(),
    }];
    for _ in 0..n_max {
        let mut next = Vec::new();
        for p in &frontier {
            for (i, b) in map.branches().iter().enumerate() {
                if let Some(pre) = b.inverse_full(&p.interval) {
                    let mut word = Vec::with_capacity(p.word.len() + 1);
                    word.push(i);
                    word.extend_from_slice(&p.word);
                    next.push(Pullback {
                        interval: pre,
                        word,
                    });
                }
            }
            if out.len() + next.len() > budget {
                return Err(Error::ElementBudgetExceeded(budget));
            }
        }
        next.sort_by(|a, b| {
            a.interval
                .lo()
                .partial_cmp(b.interval.lo())
                .expect("comparable")
        });
        out.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(out)
}

/// The collection `Q`: pullbacks of `v` that are proper subsets of `v`.
pub fn collection_q<S: Scalar>(
    map: &PiecewiseMap<S>,
    v: &Interval<S>,
    tau_max: usize,
    budget: usize,
) -> Result<Vec<Pullback<S>>> {
    Ok(full_pullbacks(map, v, tau_max, budget)?
        .into_iter()
        .filter(|p| p.interval.strictly_within(v))
        .collect())
}

impl<S: Scalar> InducingScheme<S> {
    /// Assembles a scheme from `(interval, word)` pairs, computing hosts,
    /// extended hosts, coverage and deficit.
    pub fn from_parts(
        map: &PiecewiseMap<S>,
        base: Interval<S>,
        extended_base: Option<Interval<S>>,
        parts: Vec<(Interval<S>, Vec<usize>)>,
        tau_max: usize,
    ) -> Result<Self> {
        let mut elements = Vec::with_capacity(parts.len());
        for (interval, word) in parts {
            if word.is_empty() {
                return Err(Error::InvalidScheme(format!(
                    "element {interval} has inducing time 0"
                )));
            }
            if word.iter().any(|&i| i >= map.branch_count()) {
                return Err(Error::InvalidScheme(format!(
                    "element {interval} names a missing branch"
                )));
            }
            let host = map
                .word_cell(&word)
                .filter(|h| interval.within(h))
                .ok_or_else(|| {
                    Error::InvalidScheme(format!(
                        "element {interval} does not follow its branch word"
                    ))
                })?;
            let extended_host = extended_base
                .as_ref()
                .and_then(|vp| map.pull_back_word_full(&word, vp));
            elements.push(BasicElement {
                tau: word.len(),
                interval: interval.interior(),
                host,
                extended_host,
                branch_word: word,
            });
        }
        elements.sort_by(|a, b| {
            (a.tau, a.interval.lo())
                .partial_cmp(&(b.tau, b.interval.lo()))
                .expect("comparable")
        });
        let covered_length = elements
            .iter()
            .fold(S::zero(), |acc, e| acc + e.interval.length());
        let mass_deficit = base.length() - covered_length.clone();
        Ok(Self {
            base: base.interior(),
            extended_base,
            elements,
            tau_max,
            covered_length,
            mass_deficit,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn max_tau(&self) -> usize {
        self.elements.iter().map(|e| e.tau).max().unwrap_or(0)
    }

    /// Index of the element whose interior contains `x`.
    pub fn element_of(&self, x: &S) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| e.interval.interior_contains(x))
    }

    /// Deficit after keeping only elements with `τ ≤ n`, for `n = 1..=tau_max`.
    pub fn deficit_sequence(&self) -> Vec<S> {
        (1..=self.tau_max)
            .map(|n| {
                self.elements
                    .iter()
                    .filter(|e| e.tau <= n)
                    .fold(self.base.length(), |acc, e| acc - e.interval.length())
            })
            .collect()
    }

    /// Text dump: header line, then one `J` record per element.
    pub fn dump(&self) -> String {
        let mut out = format!(
            "base={} tau_max={} covered={} deficit={}",
            self.base.dots(),
            self.tau_max,
            self.covered_length.render(),
            self.mass_deficit.render()
        );
        if let Some(vp) = &self.extended_base {
            let _ = write!(out, " ext={}", vp.dots());
        }
        out.push('\n');
        for e in &self.elements {
            let word: Vec<String> = e.branch_word.iter().map(ToString::to_string).collect();
            let _ = write!(
                out,
                "J {} tau={} word={} host={}",
                e.interval.dots(),
                e.tau,
                word.join(","),
                e.host.dots()
            );
            if let Some(jp) = &e.extended_host {
                let _ = write!(out, " ext={}", jp.dots());
            }
            out.push('\n');
        }
        out
    }
}

/// Builds `S'` (or `S'⁺` when `extended` is given) from a nice certificate.
pub fn build_canonical_scheme<S: Scalar>(
    map: &PiecewiseMap<S>,
    cert: &NiceCertificate<S>,
    tau_max: usize,
    extended: Option<&Interval<S>>,
    budget: usize,
) -> Result<InducingScheme<S>> {
    if !cert.is_nice() {
        return Err(Error::Precondition(format!(
            "{} is not certified nice ({})",
            cert.candidate,
            cert.verdict.as_str()
        )));
    }
    let v = cert.candidate.interior();
    if let Some(vp) = extended {
        if !(vp.lo() < v.lo() && v.hi() < vp.hi()) {
            return Err(Error::Precondition(format!(
                "extended base {vp} must be a neighbourhood of the closure of {v}"
            )));
        }
    }
    let mut q = collection_q(map, &v, tau_max, budget)?;
    if let Some(vp) = extended {
        q.retain(|p| map.pull_back_word_full(&p.word, vp).is_some());
    }
    let maximal = maximal_elements(q)?;
    let parts = maximal.into_iter().map(|p| (p.interval, p.word)).collect();
    InducingScheme::from_parts(map, v, extended.cloned(), parts, tau_max)
}

/// Inclusion-maximal members of a nested-or-disjoint family. Two
/// overlapping members with equal time abort the construction.
fn maximal_elements<S: Scalar>(mut q: Vec<Pullback<S>>) -> Result<Vec<Pullback<S>>> {
    q.sort_by(|a, b| {
        a.interval
            .lo()
            .partial_cmp(b.interval.lo())
            .expect("comparable")
            .then(
                b.interval
                    .hi()
                    .partial_cmp(a.interval.hi())
                    .expect("comparable"),
            )
            .then(a.tau().cmp(&b.tau()))
    });
    let mut out: Vec<Pullback<S>> = Vec::new();
    for p in q {
        if let Some(cur) = out.last() {
            if p.interval.overlaps(&cur.interval) {
                if p.tau() == cur.tau() && !p.interval.same_closure(&cur.interval) {
                    return Err(Error::InvalidScheme(format!(
                        "pullbacks {} and {} overlap with equal time {}; the base is not nice",
                        cur.interval,
                        p.interval,
                        p.tau()
                    )));
                }
                if p.interval.within(&cur.interval) {
                    continue;
                }
                return Err(Error::InvalidScheme(format!(
                    "pullbacks {} and {} overlap without nesting",
                    cur.interval, p.interval
                )));
            }
        }
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::doubling_map;
    use crate::inducing::nice::certify_nice;
    use crate::scalar::{pow2, q, Rational};

    fn iv(a: i64, b: i64, d: i64) -> Interval<Rational> {
        Interval::open(q(a, d), q(b, d)).unwrap()
    }

    fn middle_scheme(tau_max: usize) -> InducingScheme<Rational> {
        let d = doubling_map();
        let cert = certify_nice(&d, &iv(1, 2, 3), 10).unwrap();
        build_canonical_scheme(&d, &cert, tau_max, None, 1 << 20).unwrap()
    }

    #[test]
    fn doubling_scheme_at_three() {
        let s = middle_scheme(3);
        let got: Vec<_> = s
            .elements
            .iter()
            .map(|e| (e.interval.clone(), e.tau))
            .collect();
        assert_eq!(
            got,
            vec![
                (iv(4, 5, 12), 2),
                (iv(7, 8, 12), 2),
                (iv(10, 11, 24), 3),
                (iv(13, 14, 24), 3)
            ]
        );
        assert_eq!(s.covered_length, q(1, 4));
        assert_eq!(s.mass_deficit, q(1, 12));
    }

    #[test]
    fn tau_one_is_empty() {
        let s = middle_scheme(1);
        assert!(s.is_empty());
        assert_eq!(s.covered_length, q(0, 1));
    }

    #[test]
    fn deficit_tail_formula() {
        for n in 2..=9 {
            let s = middle_scheme(n);
            assert_eq!(
                s.mass_deficit,
                q(1, 3) * pow2(-(n as i64 - 1)),
                "tau_max={n}"
            );
        }
        let s = middle_scheme(6);
        assert_eq!(s.deficit_sequence()[2], q(1, 12));
    }

    #[test]
    fn hosts_and_dump() {
        let s = middle_scheme(3);
        let first = &s.elements[0];
        assert_eq!(first.branch_word, vec![0, 1]);
        assert!(first.host.same_closure(&iv(1, 2, 4)));
        let text = s.dump();
        assert!(text.starts_with("base=1/3..2/3 tau_max=3 covered=1/4 deficit=1/12\n"));
        assert!(text.contains("J 1/3..5/12 tau=2 word=0,1 host=1/4..1/2\n"));
    }

    #[test]
    fn extended_scheme_restricts_to_q_plus() {
        let d = doubling_map();
        let cert = certify_nice(&d, &iv(1, 2, 3), 10).unwrap();
        let vp = iv(1, 3, 4);
        let s = build_canonical_scheme(&d, &cert, 5, Some(&vp), 1 << 20).unwrap();
        assert!(!s.is_empty());
        for e in &s.elements {
            let jp = e.extended_host.as_ref().unwrap();
            assert!(e.interval.within(jp));
            assert!(d.push_word(&e.branch_word, jp).unwrap().same_closure(&vp));
        }
    }

    #[test]
    fn requires_nice_certificate() {
        let d = doubling_map();
        let cert = certify_nice(&d, &iv(1, 3, 4), 10).unwrap();
        assert!(matches!(
            build_canonical_scheme(&d, &cert, 3, None, 1000),
            Err(Error::Precondition(_))
        ));
    }
}
