use std::fmt;

use crate::error::{Error, Result};
use crate::inducing::InducingScheme;
use crate::interval::Interval;
use crate::map::PiecewiseMap;
use crate::report::{witness, Condition, ConditionReport};
use crate::scalar::Scalar;

use super::render_word;

/// `[b₁..b_n]`; `interval` is `None` for an empty cylinder.
#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder<S> {
    pub word: Vec<usize>,
    pub interval: Option<Interval<S>>,
    pub diameter: S,
}

impl<S: Scalar> Cylinder<S> {
    fn new(word: Vec<usize>, interval: Option<Interval<S>>) -> Self {
        let diameter = interval.as_ref().map_or_else(S::zero, Interval::length);
        Self {
            word,
            interval,
            diameter,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.interval.is_none()
    }
}

impl<S: Scalar> fmt::Display for Cylinder<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.interval {
            Some(iv) => write!(
                f,
                "cyl {} {} diam={}",
                render_word(&self.word),
                iv.dots(),
                self.diameter.render()
            ),
            None => write!(f, "cyl {} empty", render_word(&self.word)),
        }
    }
}

/// `F_J` as `x -> a x + b` for every element, when all branches are affine.
pub(crate) fn induced_affine<S: Scalar>(
    scheme: &InducingScheme<S>,
    map: &PiecewiseMap<S>,
) -> Option<Vec<(S, S)>> {
    scheme
        .elements
        .iter()
        .map(|j| {
            j.branch_word
                .iter()
                .try_fold((S::one(), S::zero()), |(a, b), &i| {
                    let br = map.branch(i);
                    let (s, o) = (br.slope()?.clone(), br.offset()?.clone());
                    Some((s.clone() * a, s * b + o))
                })
        })
        .collect()
}

/// `J_b ∩ F_b⁻¹(target)`.
fn pull_into<S: Scalar>(
    scheme: &InducingScheme<S>,
    map: &PiecewiseMap<S>,
    affine: Option<&[(S, S)]>,
    b: usize,
    target: &Interval<S>,
) -> Option<Interval<S>> {
    let j = &scheme.elements[b];
    let pre = match affine {
        Some(coeffs) => {
            let (a, c) = &coeffs[b];
            let u = (target.lo().clone() - c.clone()) / a.clone();
            let v = (target.hi().clone() - c.clone()) / a.clone();
            if u < v {
                Interval::open(u, v)
            } else {
                Interval::open(v, u)
            }?
        }
        None => map.pull_back_word(&j.branch_word, target)?,
    };
    pre.intersect(&j.interval)
}

pub fn cylinder<S: Scalar>(
    scheme: &InducingScheme<S>,
    map: &PiecewiseMap<S>,
    word: &[usize],
) -> Result<Cylinder<S>> {
    if word.is_empty() {
        return Err(Error::Precondition("cylinder words are nonempty".into()));
    }
    if let Some(&b) = word.iter().find(|&&b| b >= scheme.len()) {
        return Err(Error::Precondition(format!("no element {b}")));
    }
    let affine = induced_affine(scheme, map);
    let (&last, rest) = word.split_last().expect("nonempty");
    let mut cur = Some(scheme.elements[last].interval.clone());
    for &b in rest.iter().rev() {
        cur = cur.and_then(|t| pull_into(scheme, map, affine.as_deref(), b, &t));
    }
    Ok(Cylinder::new(word.to_vec(), cur))
}

/// Nonempty cylinders of length `n` in lexicographic word order, and
/// whether the word budget cut the enumeration short.
pub fn enumerate_cylinders<S: Scalar>(
    scheme: &InducingScheme<S>,
    map: &PiecewiseMap<S>,
    n: usize,
    word_budget: usize,
) -> (Vec<Cylinder<S>>, bool) {
    cylinder_levels(scheme, map, n.max(1), word_budget)
        .pop()
        .expect("at least one level")
}

/// [`enumerate_cylinders`] for every length `1..=n`.
pub fn cylinder_levels<S: Scalar>(
    scheme: &InducingScheme<S>,
    map: &PiecewiseMap<S>,
    n: usize,
    word_budget: usize,
) -> Vec<(Vec<Cylinder<S>>, bool)> {
    let affine = induced_affine(scheme, map);
    let mut level: Vec<Cylinder<S>> = scheme
        .elements
        .iter()
        .enumerate()
        .take(word_budget)
        .map(|(i, e)| Cylinder::new(vec![i], Some(e.interval.clone())))
        .collect();
    let mut capped = scheme.len() > word_budget;
    let mut out = vec![(level.clone(), capped)];
    for _ in 1..n {
        let mut next = Vec::new();
        // Prepending in this order keeps the words sorted.
        'build: for b in 0..scheme.len() {
            for c in &level {
                if next.len() >= word_budget {
                    capped = true;
                    break 'build;
                }
                let iv = c
                    .interval
                    .as_ref()
                    .and_then(|t| pull_into(scheme, map, affine.as_deref(), b, t));
                if iv.is_some() {
                    let mut word = Vec::with_capacity(c.word.len() + 1);
                    word.push(b);
                    word.extend_from_slice(&c.word);
                    next.push(Cylinder::new(word, iv));
                }
            }
        }
        level = next;
        out.push((level.clone(), capped));
    }
    out
}

/// Bernoulli-generating surrogate: every cylinder of a full-branch scheme is
/// nonempty and the largest diameter shrinks below `|W|·2^-n_max`.
pub fn check_h2<S: Scalar>(
    scheme: &InducingScheme<S>,
    map: &PiecewiseMap<S>,
    n_max: usize,
    word_budget: usize,
) -> Result<ConditionReport> {
    if scheme.is_empty() {
        return Err(Error::Precondition("scheme has no elements".into()));
    }
    let n_max = n_max.max(1);
    let full = scheme.elements.iter().all(|j| {
        map.push_word(&j.branch_word, &j.interval)
            .is_some_and(|im| im.same_closure(&scheme.base))
    });
    let mut diameters: Vec<S> = Vec::with_capacity(n_max);
    let mut counts = Vec::with_capacity(n_max);
    let mut sampled = false;
    for (cyls, capped) in cylinder_levels(scheme, map, n_max, word_budget) {
        let n = counts.len() + 1;
        sampled |= capped;
        let expected = scheme.len().checked_pow(n as u32);
        if full && !capped && expected.is_some_and(|e| cyls.len() != e) {
            let missing = first_missing_word(&cyls, scheme.len(), n);
            return Ok(ConditionReport::fail(
                Condition::H2,
                n,
                witness([
                    ("n", n.to_string()),
                    ("word", render_word(&missing)),
                    ("reason", "empty cylinder".into()),
                ]),
            ));
        }
        let widest = cyls
            .iter()
            .map(|c| c.diameter.clone())
            .fold(S::zero(), |m, d| if d > m { d } else { m });
        if let Some(prev) = diameters.last() {
            if !widest.le_tol(prev) {
                return Ok(ConditionReport::fail(
                    Condition::H2,
                    n,
                    witness([
                        ("n", n.to_string()),
                        ("diam", widest.render_compact()),
                        ("previous", prev.render_compact()),
                    ]),
                ));
            }
        }
        counts.push(cyls.len());
        diameters.push(widest);
    }
    let mut threshold = scheme.base.length();
    for _ in 0..n_max {
        threshold = threshold / S::two();
    }
    let last = diameters.last().expect("n_max >= 1").clone();
    let r = if !sampled && last.le_tol(&threshold) {
        ConditionReport::pass_at_depth(Condition::H2, n_max)
    } else {
        ConditionReport::inconclusive(Condition::H2, n_max)
    };
    let r = r
        .note(
            "max_diam",
            diameters
                .iter()
                .map(Scalar::render_compact)
                .collect::<Vec<_>>()
                .join(","),
        )
        .note(
            "counts",
            counts
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(","),
        )
        .note("threshold", threshold.render_compact())
        .data(diameters.iter().map(Scalar::to_f64).collect());
    let r = if sampled { r.note("sampled", 1) } else { r };
    Ok(if S::EXACT {
        r
    } else {
        r.downgrade_numeric(S::tolerance())
    })
}

fn first_missing_word<S>(cyls: &[Cylinder<S>], alphabet: usize, n: usize) -> Vec<usize> {
    let mut word = vec![0; n];
    for c in cyls {
        if c.word != word {
            break;
        }
        for k in (0..n).rev() {
            word[k] += 1;
            if word[k] < alphabet {
                break;
            }
            word[k] = 0;
        }
    }
    word
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{doubling_map, identity_map};
    use crate::inducing::{build_canonical_scheme, certify_nice};
    use crate::report::Verdict;
    use crate::scalar::{q, Rational};

    fn iv(a: i64, b: i64, d: i64) -> Interval<Rational> {
        Interval::open(q(a, d), q(b, d)).unwrap()
    }

    fn scheme(tau_max: usize) -> InducingScheme<Rational> {
        let d = doubling_map();
        let cert = certify_nice(&d, &iv(1, 2, 3), 10).unwrap();
        build_canonical_scheme(&d, &cert, tau_max, None, 1 << 20).unwrap()
    }

    #[test]
    fn worked_cylinders() {
        let d = doubling_map();
        let s = scheme(3);
        let j = s.element_of(&q(3, 8)).unwrap();
        let one = cylinder(&s, &d, &[j]).unwrap();
        assert!(one.interval.unwrap().same_closure(&iv(4, 5, 12)));
        assert_eq!(one.diameter, q(1, 12));
        let two = cylinder(&s, &d, &[j, j]).unwrap();
        assert!(two.interval.as_ref().unwrap().same_closure(&iv(16, 17, 48)));
        assert_eq!(two.diameter, q(1, 48));
        assert_eq!(two.to_string(), "cyl 0,0 1/3..17/48 diam=1/48");
    }

    #[test]
    fn empty_marker_for_inaccessible_words() {
        let d = doubling_map();
        let parts = vec![(iv(0, 1, 4), vec![0]), (iv(3, 4, 4), vec![1])];
        let s = InducingScheme::from_parts(&d, iv(0, 1, 1), None, parts, 1).unwrap();
        let c = cylinder(&s, &d, &[0, 1]).unwrap();
        assert!(c.is_empty());
        assert_eq!(c.to_string(), "cyl 0,1 empty");
        assert!(!cylinder(&s, &d, &[0, 0]).unwrap().is_empty());
    }

    #[test]
    fn enumeration_is_complete_and_ordered() {
        let d = doubling_map();
        let s = scheme(3);
        let (cyls, capped) = enumerate_cylinders(&s, &d, 3, 10_000);
        assert!(!capped);
        assert_eq!(cyls.len(), 64);
        assert!(cyls.windows(2).all(|w| w[0].word < w[1].word));
        let (few, capped) = enumerate_cylinders(&s, &d, 3, 10);
        assert!(capped && few.len() == 10);
    }

    #[test]
    fn h2_on_doubling_scheme() {
        let d = doubling_map();
        let s = scheme(3);
        let r = check_h2(&s, &d, 4, 100_000).unwrap();
        assert_eq!(r.verdict, Verdict::PassAtDepth);
        assert_eq!(r.note_value("max_diam"), Some("1/12,1/48,1/192,1/768"));
        let id = identity_map();
        let single =
            InducingScheme::from_parts(&id, iv(0, 1, 1), None, vec![(iv(0, 1, 1), vec![0])], 1)
                .unwrap();
        let r = check_h2(&single, &id, 3, 1000).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.note_value("max_diam"), Some("1,1,1"));
    }

    #[test]
    fn missing_words_are_reported() {
        let cyls: Vec<Cylinder<Rational>> = [vec![0, 0], vec![0, 1], vec![1, 1]]
            .into_iter()
            .map(|w| Cylinder::new(w, None))
            .collect();
        assert_eq!(first_missing_word(&cyls, 2, 2), vec![1, 0]);
    }
}
