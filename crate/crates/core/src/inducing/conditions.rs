//! Finite-depth checks of (H1), (H2), (M), (M⁺), (C), (C⁺), the nesting
//! dichotomy for pullbacks of a nice set, and the Lebesgue surrogate of (H3).

use crate::interval::Interval;
use crate::map::PiecewiseMap;
use crate::report::{witness, Condition, ConditionReport};
use crate::scalar::Scalar;

use super::scheme::{collection_q, full_pullbacks, InducingScheme};

fn finish<S: Scalar>(r: ConditionReport) -> ConditionReport {
    if S::EXACT {
        r
    } else {
        r.downgrade_numeric(S::tolerance())
    }
}

/// (H1): each branch word carries its element onto the base and its host
/// homeomorphically over the base.
pub fn check_h1<S: Scalar>(map: &PiecewiseMap<S>, scheme: &InducingScheme<S>) -> ConditionReport {
    for e in &scheme.elements {
        let image = map.push_word(&e.branch_word, &e.interval);
        let host_image = map.push_word(&e.branch_word, &e.host);
        let ok = image
            .as_ref()
            .is_some_and(|im| im.same_closure(&scheme.base))
            && host_image.as_ref().is_some_and(|hi| scheme.base.within(hi));
        if !ok {
            let shown = image.map_or_else(|| "not-homeomorphic".to_string(), |im| im.to_string());
            return finish::<S>(ConditionReport::fail(
                Condition::H1,
                scheme.tau_max,
                witness([
                    ("J", e.interval.to_string()),
                    ("tau", e.tau.to_string()),
                    ("image", shown),
                ]),
            ));
        }
    }
    finish::<S>(ConditionReport::pass(Condition::H1, scheme.tau_max).note("elements", scheme.len()))
}

/// The disjointness half of (H2); the generating half lives with the
/// cylinder diagnostics.
pub fn check_h2_disjoint<S: Scalar>(scheme: &InducingScheme<S>) -> ConditionReport {
    let mut sorted: Vec<&Interval<S>> = scheme.elements.iter().map(|e| &e.interval).collect();
    sorted.sort_by(|a, b| a.lo().partial_cmp(b.lo()).expect("comparable"));
    for w in sorted.windows(2) {
        if w[0].overlaps(w[1]) {
            return finish::<S>(ConditionReport::fail(
                Condition::H2,
                scheme.tau_max,
                witness([("J", w[0].to_string()), ("J'", w[1].to_string())]),
            ));
        }
    }
    finish::<S>(ConditionReport::pass(Condition::H2, scheme.tau_max).note("scope", "disjoint"))
}

fn check_compat<S: Scalar>(
    map: &PiecewiseMap<S>,
    scheme: &InducingScheme<S>,
    condition: Condition,
    pick: impl Fn(&super::scheme::BasicElement<S>) -> Option<&Interval<S>>,
) -> ConditionReport {
    for e in &scheme.elements {
        let Some(host) = pick(e) else {
            return finish::<S>(
                ConditionReport::inconclusive(condition, scheme.tau_max)
                    .note("reason", format!("no extended host for {}", e.interval)),
            );
        };
        let mut cur = host.interior();
        for (i, &b) in e.branch_word.iter().enumerate() {
            let hit = map.interval_meets_boundary(&cur) || !cur.within(map.branch(b).domain());
            if hit {
                return finish::<S>(ConditionReport::fail(
                    condition,
                    scheme.tau_max,
                    witness([
                        ("J", e.interval.to_string()),
                        ("i", i.to_string()),
                        ("image", cur.to_string()),
                    ]),
                ));
            }
            cur = map
                .branch(b)
                .image_of(&cur)
                .expect("nondegenerate image")
                .interior();
        }
    }
    finish::<S>(ConditionReport::pass(condition, scheme.tau_max))
}

/// (C): `f^i(U_J)` avoids ∂P for `0 ≤ i < τ(J)`.
pub fn check_c<S: Scalar>(map: &PiecewiseMap<S>, scheme: &InducingScheme<S>) -> ConditionReport {
    check_compat(map, scheme, Condition::C, |e| Some(&e.host))
}

/// (C⁺): the same with `J⁺` in place of `U_J`.
pub fn check_c_plus<S: Scalar>(
    map: &PiecewiseMap<S>,
    scheme: &InducingScheme<S>,
) -> ConditionReport {
    if scheme.extended_base.is_none() {
        return ConditionReport::inconclusive(Condition::CPlus, scheme.tau_max)
            .note("reason", "no extended base");
    }
    check_compat(map, scheme, Condition::CPlus, |e| e.extended_host.as_ref())
}

fn check_minimality<S: Scalar>(
    map: &PiecewiseMap<S>,
    scheme: &InducingScheme<S>,
    m_max: usize,
    extended: Option<&Interval<S>>,
    condition: Condition,
    budget: usize,
) -> ConditionReport {
    let pullbacks = match full_pullbacks(map, &scheme.base, m_max, budget) {
        Ok(p) => p,
        Err(e) => {
            return finish::<S>(ConditionReport::inconclusive(condition, m_max).note("budget", e))
        }
    };
    for l in &pullbacks {
        let m = l.tau();
        if let Some(vp) = extended {
            if map.pull_back_word_full(&l.word, vp).is_none() {
                continue;
            }
        }
        if let Some(j) = scheme
            .elements
            .iter()
            .find(|j| m < j.tau && l.interval.overlaps(&j.interval))
        {
            return finish::<S>(ConditionReport::fail(
                condition,
                m_max,
                witness([
                    ("L", l.interval.to_string()),
                    ("m", m.to_string()),
                    ("J", j.interval.to_string()),
                    ("tau", j.tau.to_string()),
                ]),
            ));
        }
    }
    // A violation needs m < τ(J) ≤ max τ, so m_max ≥ max τ − 1 is exhaustive
    // for the stored elements.
    let needed = scheme.max_tau().saturating_sub(1);
    let r = if m_max < needed {
        ConditionReport::inconclusive(condition, m_max).note("needed_m", needed)
    } else {
        ConditionReport::pass_at_depth(condition, m_max)
    };
    finish::<S>(r.note("pullbacks", pullbacks.len()))
}

/// (M): no homeomorphic pullback `L` of the base with time `m ≤ m_max`
/// meets an element `J` with `m < τ(J)`.
pub fn check_m<S: Scalar>(
    map: &PiecewiseMap<S>,
    scheme: &InducingScheme<S>,
    m_max: usize,
    budget: usize,
) -> ConditionReport {
    check_minimality(map, scheme, m_max, None, Condition::M, budget)
}

/// (M⁺): as (M), over pullbacks that also extend homeomorphically onto the
/// extended base.
pub fn check_m_plus<S: Scalar>(
    map: &PiecewiseMap<S>,
    scheme: &InducingScheme<S>,
    m_max: usize,
    budget: usize,
) -> ConditionReport {
    let Some(vp) = scheme.extended_base.clone() else {
        return ConditionReport::inconclusive(Condition::MPlus, m_max)
            .note("reason", "no extended base");
    };
    if let Some(e) = scheme.elements.iter().find(|e| e.extended_host.is_none()) {
        return finish::<S>(ConditionReport::fail(
            Condition::MPlus,
            m_max,
            witness([
                ("J", e.interval.to_string()),
                ("reason", "no-extension".to_string()),
            ]),
        ));
    }
    check_minimality(map, scheme, m_max, Some(&vp), Condition::MPlus, budget)
}

/// Which conditions [`check_conditions`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeCheck {
    H1,
    H2,
    M,
    C,
    MPlus,
    CPlus,
}

impl SchemeCheck {
    pub const BASIC: [SchemeCheck; 4] = [
        SchemeCheck::H1,
        SchemeCheck::H2,
        SchemeCheck::M,
        SchemeCheck::C,
    ];
    pub const ALL: [SchemeCheck; 6] = [
        SchemeCheck::H1,
        SchemeCheck::H2,
        SchemeCheck::M,
        SchemeCheck::C,
        SchemeCheck::MPlus,
        SchemeCheck::CPlus,
    ];
}

pub fn check_conditions<S: Scalar>(
    map: &PiecewiseMap<S>,
    scheme: &InducingScheme<S>,
    m_max: usize,
    which: &[SchemeCheck],
    budget: usize,
) -> Vec<ConditionReport> {
    which
        .iter()
        .map(|w| match w {
            SchemeCheck::H1 => check_h1(map, scheme),
            SchemeCheck::H2 => check_h2_disjoint(scheme),
            SchemeCheck::M => check_m(map, scheme, m_max, budget),
            SchemeCheck::C => check_c(map, scheme),
            SchemeCheck::MPlus => check_m_plus(map, scheme, m_max, budget),
            SchemeCheck::CPlus => check_c_plus(map, scheme),
        })
        .collect()
}

/// Pullbacks of `v` in `Q` are pairwise interior-disjoint or strictly
/// nested with the outer one having the smaller time.
pub fn check_nested_or_disjoint<S: Scalar>(
    map: &PiecewiseMap<S>,
    v: &Interval<S>,
    tau_max: usize,
    budget: usize,
) -> ConditionReport {
    let mut q = match collection_q(map, v, tau_max, budget) {
        Ok(q) => q,
        Err(e) => {
            return finish::<S>(
                ConditionReport::inconclusive(Condition::NestedOrDisjoint, tau_max)
                    .note("budget", e),
            )
        }
    };
    q.sort_by(|a, b| {
        a.interval
            .lo()
            .partial_cmp(b.interval.lo())
            .expect("comparable")
    });
    for (i, a) in q.iter().enumerate() {
        for b in &q[i + 1..] {
            if b.interval.lo() >= a.interval.hi() || b.interval.lo().same(a.interval.hi()) {
                break;
            }
            let (outer, inner) = if a.tau() <= b.tau() { (a, b) } else { (b, a) };
            let ok = inner.interval.within(&outer.interval)
                && !inner.interval.same_closure(&outer.interval)
                && outer.tau() < inner.tau();
            if !ok {
                return finish::<S>(ConditionReport::fail(
                    Condition::NestedOrDisjoint,
                    tau_max,
                    witness([
                        ("J", outer.interval.to_string()),
                        ("n", outer.tau().to_string()),
                        ("J'", inner.interval.to_string()),
                        ("m", inner.tau().to_string()),
                    ]),
                ));
            }
        }
    }
    finish::<S>(
        ConditionReport::pass_at_depth(Condition::NestedOrDisjoint, tau_max)
            .note("pullbacks", q.len()),
    )
}

/// Lebesgue surrogate for (H3): the uncovered length of the base shrinks as
/// the truncation grows.
pub fn check_h3_surrogate<S: Scalar>(scheme: &InducingScheme<S>) -> ConditionReport {
    let seq = scheme.deficit_sequence();
    let data: Vec<f64> = seq.iter().map(Scalar::to_f64).collect();
    let nonincreasing = seq.windows(2).all(|w| w[1].le_tol(&w[0]));
    let shrinking = seq.len() >= 2 && seq[seq.len() - 1].lt_tol(&seq[seq.len() - 2]);
    let r = if nonincreasing && (shrinking || scheme.mass_deficit.is_zero()) {
        ConditionReport::pass_at_depth(Condition::H3Surrogate, scheme.tau_max)
    } else {
        ConditionReport::inconclusive(Condition::H3Surrogate, scheme.tau_max)
    };
    finish::<S>(
        r.note("deficit", scheme.mass_deficit.render_compact())
            .data(data),
    )
}
