//! Refinements `P ∨ f^{-1}P ∨ … ∨ f^{-n+1}P`, lap counts and the (P1)/(P2)
//! diagnostics.

use std::collections::BTreeSet;

use crate::config::DiagnosticConfig;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::map::{PiecewiseMap, Side};
use crate::report::{Condition, ConditionReport};
use crate::scalar::Scalar;

/// The monotonicity partition of `f^depth`.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinedPartition<S> {
    pub depth: usize,
    /// Open cells sorted by left endpoint.
    pub cells: Vec<Interval<S>>,
    /// Itinerary (branch indices) of each cell, aligned with `cells`.
    pub words: Vec<Vec<usize>>,
    pub max_diameter: S,
}

impl<S: Scalar> RefinedPartition<S> {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Index of the cell containing `x`, if `x` avoids the cell boundaries.
    pub fn cell_of(&self, x: &S) -> Option<usize> {
        let idx = self.cells.partition_point(|c| c.hi() <= x);
        (idx < self.cells.len() && self.cells[idx].interior_contains(x)).then_some(idx)
    }
}

struct Cell<S> {
    cell: Interval<S>,
    image: Interval<S>,
    word: Vec<usize>,
}

/// Level-by-level refinement, so lap sequences cost one pass.
pub struct Refiner<'a, S> {
    map: &'a PiecewiseMap<S>,
    depth: usize,
    cells: Vec<Cell<S>>,
    budget: usize,
}

impl<'a, S: Scalar> Refiner<'a, S> {
    /// Starts at depth 1 (the branch domains).
    pub fn new(map: &'a PiecewiseMap<S>, budget: usize) -> Result<Self> {
        if map.branch_count() > budget {
            return Err(Error::CellBudgetExceeded(budget));
        }
        let cells = map
            .branches()
            .iter()
            .enumerate()
            .map(|(i, b)| Cell {
                cell: b.domain().clone(),
                image: b.image(),
                word: vec![i],
            })
            .collect();
        Ok(Self {
            map,
            depth: 1,
            cells,
            budget,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn advance(&mut self) -> Result<()> {
        let mut next = Vec::with_capacity(self.cells.len() * 2);
        for c in &self.cells {
            for (j, b) in self.map.branches().iter().enumerate() {
                let Some(piece) = c.image.intersect(b.domain()) else {
                    continue;
                };
                let Some(image) = b.image_of(&piece) else {
                    continue;
                };
                let Some(cell) = self.map.pull_back_word(&c.word, &piece) else {
                    continue;
                };
                let mut word = c.word.clone();
                word.push(j);
                next.push(Cell { cell, image, word });
                if next.len() > self.budget {
                    return Err(Error::CellBudgetExceeded(self.budget));
                }
            }
        }
        next.sort_by(|a, b| a.cell.lo().partial_cmp(b.cell.lo()).expect("comparable"));
        self.cells = next;
        self.depth += 1;
        Ok(())
    }

    pub fn max_diameter(&self) -> S {
        self.cells
            .iter()
            .map(|c| c.cell.length())
            .fold(S::zero(), |m, l| S::max_of(&m, &l))
    }

    pub fn snapshot(&self) -> RefinedPartition<S> {
        RefinedPartition {
            depth: self.depth,
            cells: self.cells.iter().map(|c| c.cell.clone()).collect(),
            words: self.cells.iter().map(|c| c.word.clone()).collect(),
            max_diameter: self.max_diameter(),
        }
    }
}

/// Enumerates the connected components of the `n`-fold monotonicity partition.
pub fn refine_partition<S: Scalar>(
    map: &PiecewiseMap<S>,
    n: usize,
    budget: usize,
) -> Result<RefinedPartition<S>> {
    if n == 0 {
        return Err(Error::Precondition(
            "refinement depth must be at least 1".into(),
        ));
    }
    let mut r = Refiner::new(map, budget)?;
    while r.depth() < n {
        r.advance()?;
    }
    Ok(r.snapshot())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LapEntry {
    pub n: usize,
    pub laps: usize,
    /// `ln(laps) / n`
    pub quotient: f64,
}

pub fn lap_entropy<S: Scalar>(
    map: &PiecewiseMap<S>,
    n_max: usize,
    budget: usize,
) -> Result<Vec<LapEntry>> {
    if n_max == 0 {
        return Err(Error::Precondition("n_max must be at least 1".into()));
    }
    let mut r = Refiner::new(map, budget)?;
    let mut out = Vec::with_capacity(n_max);
    loop {
        let n = r.depth();
        let laps = r.cell_count();
        out.push(LapEntry {
            n,
            laps,
            quotient: (laps as f64).ln() / n as f64,
        });
        if n == n_max {
            return Ok(out);
        }
        r.advance()?;
    }
}

/// Forward orbit of ΔP under one-sided continuation. Returns the orbit
/// points and whether the state set closed within `n_max` steps.
pub fn boundary_orbit<S: Scalar>(map: &PiecewiseMap<S>, n_max: usize) -> (Vec<S>, bool) {
    let mut seen: BTreeSet<(S::Key, Side)> = BTreeSet::new();
    let mut points: Vec<S> = Vec::new();
    let mut frontier: Vec<(S, Side)> = Vec::new();
    let mut push = |x: S, side: Side, frontier: &mut Vec<(S, Side)>| {
        if seen.insert((x.key(), side)) {
            if !points.iter().any(|p| p.same(&x)) {
                points.push(x.clone());
            }
            frontier.push((x, side));
        }
    };
    for b in map.branches() {
        let (lo_side, hi_side) = if b.increasing() {
            (Side::Right, Side::Left)
        } else {
            (Side::Left, Side::Right)
        };
        push(b.eval(b.domain().lo()), lo_side, &mut frontier);
        push(b.eval(b.domain().hi()), hi_side, &mut frontier);
    }
    for _ in 0..n_max {
        if frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for (x, side) in std::mem::take(&mut frontier) {
            if let Some((y, s, _)) = map.one_sided_step(&x, side) {
                push(y, s, &mut next);
            }
        }
        frontier = next;
    }
    points.sort_by(|a, b| a.partial_cmp(b).expect("comparable"));
    (points, frontier.is_empty())
}

/// (P1) and (P2) surrogate verdicts at depth `n_max`, in that order.
pub fn check_p1_p2<S: Scalar>(
    map: &PiecewiseMap<S>,
    n_max: usize,
    cfg: &DiagnosticConfig,
) -> Vec<ConditionReport> {
    let n_max = n_max.max(1);
    let (orbit, closed) = boundary_orbit(map, n_max);
    let orbit_text = orbit
        .iter()
        .map(Scalar::render_compact)
        .collect::<Vec<_>>()
        .join(",");

    let mut diameters: Vec<S> = Vec::new();
    let mut laps: Vec<LapEntry> = Vec::new();
    let mut budget_hit = None;
    match Refiner::new(map, cfg.cell_budget) {
        Ok(mut r) => loop {
            let n = r.depth();
            laps.push(LapEntry {
                n,
                laps: r.cell_count(),
                quotient: (r.cell_count() as f64).ln() / n as f64,
            });
            diameters.push(r.max_diameter());
            if n == n_max {
                break;
            }
            if let Err(e) = r.advance() {
                budget_hit = Some(e);
                break;
            }
        },
        Err(e) => budget_hit = Some(e),
    }

    let entropy = laps.last().map(|l| l.quotient).unwrap_or(0.0);
    let p1 = if closed && entropy > cfg.entropy_floor && budget_hit.is_none() {
        ConditionReport::pass_at_depth(Condition::P1, n_max)
    } else {
        ConditionReport::inconclusive(Condition::P1, n_max)
    }
    .note("orbit", format!("{{{orbit_text}}}"))
    .note("orbit_closed", closed)
    .note("h_lap", format!("{entropy:.6}"))
    .note("floor", cfg.entropy_floor)
    .data(laps.iter().map(|l| l.quotient).collect());

    let ambient_len = map.ambient().length();
    let threshold = S::from_rational(&cfg.diameter_threshold) * ambient_len;
    let nonincreasing = diameters.windows(2).all(|w| w[1].le_tol(&w[0]));
    let finest = diameters
        .last()
        .cloned()
        .unwrap_or_else(|| map.ambient().length());
    let p2 = if budget_hit.is_none() && nonincreasing && finest.le_tol(&threshold) {
        ConditionReport::pass_at_depth(Condition::P2, n_max)
    } else {
        ConditionReport::inconclusive(Condition::P2, n_max)
    }
    .note("max_diam", finest.render_compact())
    .note("threshold", threshold.render_compact())
    .data(diameters.iter().map(Scalar::to_f64).collect());

    let mut out = vec![p1, p2];
    if let Some(e) = budget_hit {
        for r in &mut out {
            r.notes.push(("budget".into(), e.to_string()));
        }
    }
    if !S::EXACT {
        out = out
            .into_iter()
            .map(|r| r.downgrade_numeric(S::tolerance()))
            .collect();
    }
    out
}
