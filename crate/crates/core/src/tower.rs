//! The connected Markov extension built from the recursive collections 𝒟ₙ.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::interval::{covers, merge_closures, Interval};
use crate::map::PiecewiseMap;
use crate::report::{witness, Condition, ConditionReport};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct TowerElement<S> {
    pub id: usize,
    pub interval: Interval<S>,
    /// Minimal `n` with the element in 𝒟ₙ.
    pub level: usize,
    pub first_seen_depth: usize,
}

/// `f(D_from ∩ A_branch) = D_to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: usize,
    pub branch: usize,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tower<S: Scalar> {
    elements: Vec<TowerElement<S>>,
    transitions: Vec<Transition>,
    depth: usize,
    saturated: bool,
    by_key: BTreeMap<(S::Key, S::Key), usize>,
    by_edge: BTreeMap<(usize, usize), usize>,
    /// BFS parent `(from, branch)` of each element above level 0.
    parent: Vec<Option<(usize, usize)>>,
}

impl<S: Scalar> Tower<S> {
    /// Assembles a tower from raw parts (used by the dump reader and by
    /// tests that need a corrupted tower).
    pub fn from_parts(
        elements: Vec<TowerElement<S>>,
        transitions: Vec<Transition>,
        depth: usize,
        saturated: bool,
    ) -> Result<Self> {
        if elements.is_empty() || elements[0].level != 0 {
            return Err(Error::Precondition(
                "element 0 must be the level-0 ambient interval".into(),
            ));
        }
        let mut by_key = BTreeMap::new();
        for (i, e) in elements.iter().enumerate() {
            if e.id != i {
                return Err(Error::Precondition(format!(
                    "element ids must be 0..n, found {} at {i}",
                    e.id
                )));
            }
            if by_key.insert(e.interval.closure_key(), i).is_some() {
                return Err(Error::Precondition(format!(
                    "duplicate element {}",
                    e.interval
                )));
            }
        }
        let mut by_edge = BTreeMap::new();
        let mut parent = vec![None; elements.len()];
        for t in &transitions {
            if t.from >= elements.len() || t.to >= elements.len() {
                return Err(Error::Precondition(format!(
                    "transition {} {} {} names a missing element",
                    t.from, t.branch, t.to
                )));
            }
            if by_edge.insert((t.from, t.branch), t.to).is_some() {
                return Err(Error::Precondition(format!(
                    "transition from {} on {} is not deterministic",
                    t.from, t.branch
                )));
            }
            let (from_level, to_level) = (elements[t.from].level, elements[t.to].level);
            if to_level == from_level + 1 && parent[t.to].is_none() {
                parent[t.to] = Some((t.from, t.branch));
            }
        }
        Ok(Self {
            elements,
            transitions,
            depth,
            saturated,
            by_key,
            by_edge,
            parent,
        })
    }

    pub fn elements(&self) -> &[TowerElement<S>] {
        &self.elements
    }

    pub fn element(&self, id: usize) -> &TowerElement<S> {
        &self.elements[id]
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn saturated(&self) -> bool {
        self.saturated
    }

    /// Element whose closure equals the closure of `iv`.
    pub fn find(&self, iv: &Interval<S>) -> Option<usize> {
        self.by_key.get(&iv.closure_key()).copied()
    }

    pub fn transition(&self, from: usize, branch: usize) -> Option<usize> {
        self.by_edge.get(&(from, branch)).copied()
    }

    /// Text dump: header, `elem` records, then `edge` records.
    pub fn dump(&self) -> String {
        let mut out = format!(
            "depth={} saturated={}\n",
            self.depth,
            u8::from(self.saturated)
        );
        for e in &self.elements {
            let _ = writeln!(
                out,
                "elem {} level={} interval={}",
                e.id,
                e.level,
                e.interval.dots()
            );
        }
        for t in &self.transitions {
            let _ = writeln!(out, "edge {} {} {}", t.from, t.branch, t.to);
        }
        out
    }
}

/// Images `f(D ∩ A_i)` of one element, with the branch index.
fn successors<S: Scalar>(map: &PiecewiseMap<S>, d: &Interval<S>) -> Vec<(usize, Interval<S>)> {
    map.branches()
        .iter()
        .enumerate()
        .filter_map(|(i, b)| {
            let piece = d.intersect(b.domain())?;
            Some((i, b.image_of(&piece)?.interior()))
        })
        .collect()
}

/// Builds 𝒟₀..𝒟_depth breadth first, deduplicating by closure.
pub fn build_tower<S: Scalar>(
    map: &PiecewiseMap<S>,
    depth: usize,
    budget: usize,
) -> Result<Tower<S>> {
    let mut elements = vec![TowerElement {
        id: 0,
        interval: map.ambient().clone(),
        level: 0,
        first_seen_depth: 0,
    }];
    let mut by_key: BTreeMap<_, usize> = BTreeMap::new();
    by_key.insert(map.ambient().closure_key(), 0);
    let mut transitions = Vec::new();
    let mut frontier = vec![0usize];
    let mut level = 0;
    let mut saturated = false;

    loop {
        let recording = level < depth;
        let mut pending: Vec<(usize, usize, Interval<S>)> = Vec::new();
        for &id in &frontier {
            for (branch, image) in successors(map, &elements[id].interval) {
                pending.push((id, branch, image));
            }
        }
        let mut fresh: Vec<Interval<S>> = pending
            .iter()
            .filter(|(_, _, iv)| !by_key.contains_key(&iv.closure_key()))
            .map(|(_, _, iv)| iv.clone())
            .collect();
        if fresh.is_empty() {
            saturated = true;
        }
        if !recording {
            if saturated && depth >= 1 {
                for (from, branch, iv) in &pending {
                    transitions.push(Transition {
                        from: *from,
                        branch: *branch,
                        to: by_key[&iv.closure_key()],
                    });
                }
            }
            break;
        }
        fresh.sort_by(|a, b| {
            (a.lo(), a.hi())
                .partial_cmp(&(b.lo(), b.hi()))
                .expect("comparable")
        });
        let mut next = Vec::new();
        for iv in fresh {
            if by_key.contains_key(&iv.closure_key()) {
                continue;
            }
            let id = elements.len();
            if id >= budget {
                return Err(Error::ElementBudgetExceeded(budget));
            }
            by_key.insert(iv.closure_key(), id);
            elements.push(TowerElement {
                id,
                interval: iv,
                level: level + 1,
                first_seen_depth: level + 1,
            });
            next.push(id);
        }
        for (from, branch, iv) in &pending {
            transitions.push(Transition {
                from: *from,
                branch: *branch,
                to: by_key[&iv.closure_key()],
            });
        }
        level += 1;
        frontier = next;
        if saturated {
            break;
        }
    }
    transitions.sort();
    Tower::from_parts(elements, transitions, depth, saturated)
}

/// One step of the extension: `(x, D) -> (f(x), f(E))`.
pub fn tower_step<S: Scalar>(
    tower: &Tower<S>,
    map: &PiecewiseMap<S>,
    state: (&S, usize),
) -> Result<(S, usize)> {
    let (x, id) = state;
    let elem = tower
        .elements
        .get(id)
        .ok_or_else(|| Error::Precondition(format!("no tower element {id}")))?;
    if !elem.interval.closure_contains(x) {
        return Err(Error::Precondition(format!(
            "{} is not in element {id} = {}",
            x.render(),
            elem.interval
        )));
    }
    let branch = map.branch_index_of(x).ok_or(Error::BoundaryHit(0))?;
    let to = tower.transition(id, branch).ok_or(Error::Unsaturated {
        element: id,
        branch,
    })?;
    Ok((map.branch(branch).eval(x), to))
}

/// Checks that every `k`-step image of an element meeting `D_b` covers it.
pub fn check_markov<S: Scalar>(
    tower: &Tower<S>,
    map: &PiecewiseMap<S>,
    k_max: usize,
) -> ConditionReport {
    let mut truncated = false;
    for a in 0..tower.len() {
        let mut pieces: BTreeMap<usize, Vec<Interval<S>>> = BTreeMap::new();
        pieces.insert(a, vec![tower.element(a).interval.interior()]);
        for k in 1..=k_max {
            let mut next: BTreeMap<usize, Vec<Interval<S>>> = BTreeMap::new();
            for (&e, ivs) in &pieces {
                for iv in ivs {
                    for (i, b) in map.branches().iter().enumerate() {
                        let Some(piece) = iv.intersect(b.domain()) else {
                            continue;
                        };
                        let Some(image) = b.image_of(&piece) else {
                            continue;
                        };
                        let Some(to) = tower.transition(e, i) else {
                            truncated = true;
                            continue;
                        };
                        if !image.within(&tower.element(to).interval) {
                            return ConditionReport::fail(
                                Condition::Markov,
                                k,
                                witness([
                                    ("a", a.to_string()),
                                    ("b", to.to_string()),
                                    ("k", k.to_string()),
                                ]),
                            )
                            .note("image", image);
                        }
                        next.entry(to).or_default().push(image);
                    }
                }
            }
            for (b, ivs) in next.iter_mut() {
                *ivs = merge_closures(std::mem::take(ivs));
                if !covers(ivs, &tower.element(*b).interval) {
                    return ConditionReport::fail(
                        Condition::Markov,
                        k,
                        witness([
                            ("a", a.to_string()),
                            ("b", b.to_string()),
                            ("k", k.to_string()),
                        ]),
                    )
                    .note(
                        "image",
                        ivs.iter()
                            .map(ToString::to_string)
                            .collect::<Vec<_>>()
                            .join("+"),
                    );
                }
            }
            pieces = next;
        }
    }
    let report = if truncated {
        ConditionReport::inconclusive(Condition::Markov, k_max)
            .note("reason", "transitions missing beyond depth")
    } else if tower.saturated() {
        ConditionReport::pass(Condition::Markov, k_max)
    } else {
        ConditionReport::pass_at_depth(Condition::Markov, k_max)
    };
    let report = report.note("elements", tower.len());
    if S::EXACT {
        report
    } else {
        report.downgrade_numeric(S::tolerance())
    }
}

/// A set `E` inside one branch domain of `I` and the branch word carrying
/// `(E, element 0)` homeomorphically onto the given element.
pub fn homeomorphic_lift_path<S: Scalar>(
    tower: &Tower<S>,
    map: &PiecewiseMap<S>,
    element: usize,
) -> Result<(Interval<S>, Vec<usize>)> {
    let elem = tower
        .elements
        .get(element)
        .ok_or_else(|| Error::Precondition(format!("no tower element {element}")))?;
    if elem.level == 0 {
        return Err(Error::Precondition(
            "element has level 0; there is no lift path".into(),
        ));
    }
    let mut chain = Vec::new();
    let mut cur = element;
    while let Some((from, branch)) = tower.parent[cur] {
        chain.push((from, branch));
        cur = from;
    }
    if cur != 0 || chain.len() != elem.level {
        return Err(Error::Unsaturated {
            element,
            branch: chain.last().map_or(0, |c| c.1),
        });
    }
    let mut target = elem.interval.interior();
    for &(from, branch) in &chain {
        let pre = map
            .branch(branch)
            .inverse(&target)
            .and_then(|p| p.intersect(&tower.element(from).interval))
            .ok_or(Error::Unsaturated {
                element: from,
                branch,
            })?;
        target = pre;
    }
    let word = chain.iter().rev().map(|&(_, b)| b).collect();
    Ok((target, word))
}
