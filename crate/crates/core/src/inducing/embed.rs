//! Embedding of an inducing scheme into the tower and the sampled check
//! that `F̌` is the first return map to `W̌`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::interval::{merge_closures, Interval};
use crate::map::PiecewiseMap;
use crate::report::{witness, Condition, ConditionReport};
use crate::scalar::Scalar;
use crate::tower::{tower_step, Tower};

use super::scheme::{BasicElement, InducingScheme};

/// `W̌` as merged open pieces per tower element.
pub type TowerSet<S> = BTreeMap<usize, Vec<Interval<S>>>;

/// Carries `(element, X)` with `X ⊆ J` along the branch word of `J`.
pub fn lift_along<S: Scalar>(
    tower: &Tower<S>,
    map: &PiecewiseMap<S>,
    element: usize,
    piece: &Interval<S>,
    j: &BasicElement<S>,
) -> Result<(usize, Interval<S>)> {
    let (mut e, mut x) = (element, piece.clone());
    for &b in &j.branch_word {
        if !x.within(map.branch(b).domain()) {
            return Err(Error::InvalidScheme(format!(
                "{} leaves branch {b} along the word of {}",
                x, j.interval
            )));
        }
        e = tower.transition(e, b).ok_or(Error::Unsaturated {
            element: e,
            branch: b,
        })?;
        x = map
            .branch(b)
            .image_of(&x)
            .expect("nondegenerate image")
            .interior();
    }
    Ok((e, x))
}

/// `W̌ = ⋃_k F̌^k(inc(W))`, iterated to a fixpoint.
pub fn tower_base<S: Scalar>(
    scheme: &InducingScheme<S>,
    tower: &Tower<S>,
    map: &PiecewiseMap<S>,
) -> Result<Option<TowerSet<S>>> {
    let mut set: TowerSet<S> = BTreeMap::new();
    set.insert(0, vec![scheme.base.interior()]);
    let rounds = 4 * tower.len() + 4;
    for _ in 0..rounds {
        let mut next = set.clone();
        for (&e, pieces) in &set {
            for x in pieces {
                for j in &scheme.elements {
                    let Some(piece) = x.intersect(&j.interval) else {
                        continue;
                    };
                    let (to, image) = lift_along(tower, map, e, &piece, j)?;
                    next.entry(to).or_default().push(image);
                }
            }
        }
        for pieces in next.values_mut() {
            *pieces = merge_closures(std::mem::take(pieces));
        }
        if same_sets(&set, &next) {
            return Ok(Some(set));
        }
        set = next;
    }
    Ok(None)
}

fn same_sets<S: Scalar>(a: &TowerSet<S>, b: &TowerSet<S>) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|((ka, va), (kb, vb))| {
            ka == kb && va.len() == vb.len() && va.iter().zip(vb).all(|(x, y)| x.same_closure(y))
        })
}

fn in_set<S: Scalar>(set: &TowerSet<S>, element: usize, x: &S) -> bool {
    set.get(&element)
        .is_some_and(|ps| ps.iter().any(|p| p.interior_contains(x)))
}

fn precondition_met(reports: &[ConditionReport], condition: Condition) -> bool {
    reports
        .iter()
        .any(|r| r.condition == condition && r.verdict.is_pass())
}

/// Sampled verification that the tower return time of points of `W̌ ∩ π⁻¹(J)`
/// is exactly `τ(J)`, plus `π(Ď) ⊇ W` for every element meeting `W̌`.
pub fn embed_in_tower<S: Scalar>(
    scheme: &InducingScheme<S>,
    tower: &Tower<S>,
    map: &PiecewiseMap<S>,
    reports: &[ConditionReport],
    sample_budget: usize,
) -> Result<ConditionReport> {
    let missing: Vec<&str> = [Condition::M, Condition::C]
        .into_iter()
        .filter(|c| !precondition_met(reports, *c))
        .map(Condition::name)
        .collect();
    if !missing.is_empty() {
        let witness = reports
            .iter()
            .filter(|r| matches!(r.condition, Condition::M | Condition::C))
            .map(|r| {
                (
                    r.condition.name().to_string(),
                    r.verdict.as_str().to_string(),
                )
            })
            .collect();
        return Err(Error::PreconditionUnverified {
            reason: format!("{} not passed", missing.join(",")),
            witness,
        });
    }
    if !tower.saturated() {
        return Err(Error::PreconditionUnverified {
            reason: "tower is not saturated".into(),
            witness: Vec::new(),
        });
    }
    let depth = tower.depth();
    let Some(w_check) = tower_base(scheme, tower, map)? else {
        return Ok(ConditionReport::inconclusive(Condition::FirstReturn, depth)
            .note("reason", "W-check did not close"));
    };

    for &e in w_check.keys() {
        if !scheme.base.within(&tower.element(e).interval) {
            return Ok(ConditionReport::fail(
                Condition::FirstReturn,
                depth,
                witness([
                    ("element", e.to_string()),
                    ("interval", tower.element(e).interval.to_string()),
                ]),
            )
            .note("reason", "projection misses base"));
        }
    }

    let fractions = [
        S::one() / S::two(),
        S::one() / S::from_i64(4),
        S::from_i64(3) / S::from_i64(4),
    ];
    let mut seen: BTreeSet<(usize, S::Key)> = BTreeSet::new();
    let mut samples: Vec<(usize, S, usize)> = Vec::new();
    'outer: for (&e, pieces) in &w_check {
        for x in pieces {
            for (ji, j) in scheme.elements.iter().enumerate() {
                let Some(piece) = x.intersect(&j.interval) else {
                    continue;
                };
                for t in &fractions {
                    if samples.len() >= sample_budget {
                        break 'outer;
                    }
                    let p = piece.point_at(t);
                    if seen.insert((e, p.key())) {
                        samples.push((e, p, ji));
                    }
                }
            }
        }
    }

    for (e, x, ji) in &samples {
        let j = &scheme.elements[*ji];
        let (mut y, mut cur) = (x.clone(), *e);
        for i in 1..=j.tau {
            (y, cur) = match tower_step(tower, map, (&y, cur)) {
                Ok(s) => s,
                Err(err) => {
                    return Ok(ConditionReport::fail(
                        Condition::FirstReturn,
                        depth,
                        witness([
                            ("x", x.render_compact()),
                            ("element", e.to_string()),
                            ("i", i.to_string()),
                        ]),
                    )
                    .note("error", err));
                }
            };
            let inside = in_set(&w_check, cur, &y);
            if inside != (i == j.tau) {
                return Ok(ConditionReport::fail(
                    Condition::FirstReturn,
                    depth,
                    witness([
                        ("x", x.render_compact()),
                        ("element", e.to_string()),
                        ("J", j.interval.to_string()),
                        ("tau", j.tau.to_string()),
                        ("i", i.to_string()),
                    ]),
                ));
            }
        }
    }
    let r = ConditionReport::pass_at_depth(Condition::FirstReturn, depth)
        .note("samples", samples.len())
        .note("w_elements", w_check.len());
    Ok(if S::EXACT {
        r
    } else {
        r.downgrade_numeric(S::tolerance())
    })
}
