#![allow(dead_code)]

use std::collections::BTreeMap;

use liftkit::inducing::{build_canonical_scheme, certify_nice, InducingScheme};
use liftkit::measure::{lift_measure, PiecewiseMeasure};
use liftkit::scalar::q;
use liftkit::thermo::cylinder_levels;
use liftkit::{lap_entropy, refine_partition, Branch, ExactMap, Interval, PiecewiseMap, Rational};
use proptest::prelude::*;

/// Full-branch affine map of [0,1] cut at `cuts / d`, with branch `i`
/// decreasing when `flips[i]`.
#[derive(Clone, Debug)]
pub struct MapCase {
    pub d: i64,
    pub cuts: Vec<i64>,
    pub flips: Vec<bool>,
}

impl MapCase {
    pub fn build(&self) -> ExactMap {
        let mut points = vec![q(0, 1)];
        points.extend(self.cuts.iter().map(|&c| q(c, self.d)));
        points.push(q(1, 1));
        let branches = points
            .windows(2)
            .zip(&self.flips)
            .map(|(w, &flip)| {
                let (a, b) = (w[0].clone(), w[1].clone());
                let len = b.clone() - a.clone();
                let dom = Interval::open(a.clone(), b.clone()).unwrap();
                if flip {
                    Branch::affine(dom, -(q(1, 1) / len.clone()), b / len).unwrap()
                } else {
                    Branch::affine(dom, q(1, 1) / len.clone(), -(a / len)).unwrap()
                }
            })
            .collect();
        PiecewiseMap::new(Interval::closed(q(0, 1), q(1, 1)).unwrap(), branches).unwrap()
    }
}

pub fn expanding_map() -> impl Strategy<Value = MapCase> {
    (2usize..=4, 6i64..=12).prop_flat_map(|(k, d)| {
        (
            proptest::sample::subsequence((1..d).collect::<Vec<_>>(), k - 1),
            proptest::collection::vec(any::<bool>(), k),
        )
            .prop_map(move |(cuts, flips)| MapCase { d, cuts, flips })
    })
}

const BUDGET: usize = 1 << 16;

pub fn refinement_nesting(map: &ExactMap) -> Result<(), String> {
    let mut prev = refine_partition(map, 1, BUDGET).map_err(|e| e.to_string())?;
    for n in 2..=4 {
        let next = refine_partition(map, n, BUDGET).map_err(|e| e.to_string())?;
        let total = next.cells.iter().fold(q(0, 1), |acc, c| acc + c.length());
        if total != q(1, 1) {
            return Err(format!("cells of P_{n} have total length {total}"));
        }
        for c in &next.cells {
            if !prev.cells.iter().any(|p| c.within(p)) {
                return Err(format!(
                    "cell {c} of P_{n} is not inside a cell of P_{}",
                    n - 1
                ));
            }
        }
        if next.max_diameter > prev.max_diameter {
            return Err(format!("max diameter grew at n={n}"));
        }
        prev = next;
    }
    Ok(())
}

pub fn lap_submultiplicativity(map: &ExactMap) -> Result<(), String> {
    let laps: Vec<usize> = lap_entropy(map, 5, BUDGET)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|e| e.laps)
        .collect();
    for m in 1..=5 {
        for n in 1..=5 - m {
            if laps[m + n - 1] > laps[m - 1] * laps[n - 1] {
                return Err(format!(
                    "laps({}) = {} > {} * {}",
                    m + n,
                    laps[m + n - 1],
                    laps[m - 1],
                    laps[n - 1]
                ));
            }
        }
    }
    Ok(())
}

/// First cell of `P_1` or `P_2` (left to right) certified nice, if any.
pub fn nice_base(map: &ExactMap) -> Option<Interval<Rational>> {
    for n in 1..=2 {
        for cell in refine_partition(map, n, BUDGET).ok()?.cells {
            if let Ok(cert) = certify_nice(map, &cell, 12) {
                if cert.is_nice() {
                    return Some(cell.interior());
                }
            }
        }
    }
    None
}

pub fn scheme_at(
    map: &ExactMap,
    v: &Interval<Rational>,
    tau_max: usize,
) -> Result<InducingScheme<Rational>, String> {
    let cert = certify_nice(map, v, 12).map_err(|e| e.to_string())?;
    build_canonical_scheme(map, &cert, tau_max, None, BUDGET).map_err(|e| e.to_string())
}

pub fn scheme_monotonicity(map: &ExactMap, v: &Interval<Rational>) -> Result<(), String> {
    let mut prev = scheme_at(map, v, 1)?;
    for t in 2..=5 {
        let next = scheme_at(map, v, t)?;
        if next.covered_length < prev.covered_length || next.mass_deficit > prev.mass_deficit {
            return Err(format!("coverage shrank from tau_max={} to {t}", t - 1));
        }
        for e in &prev.elements {
            if !next
                .elements
                .iter()
                .any(|f| f.tau == e.tau && f.interval.same_closure(&e.interval))
            {
                return Err(format!(
                    "element {} (tau={}) vanished at tau_max={t}",
                    e.interval, e.tau
                ));
            }
        }
        prev = next;
    }
    Ok(())
}

pub fn cylinder_nesting(map: &ExactMap, scheme: &InducingScheme<Rational>) -> Result<(), String> {
    let levels = cylinder_levels(scheme, map, 2, 4096);
    let mut by_word: BTreeMap<Vec<usize>, Interval<Rational>> = BTreeMap::new();
    for (cyls, _) in &levels {
        for c in cyls {
            let iv = c
                .interval
                .clone()
                .ok_or("enumeration returned an empty cylinder")?;
            if !iv.within(&scheme.elements[c.word[0]].interval) {
                return Err(format!("cylinder {c} leaves its first element"));
            }
            if c.word.len() > 1 {
                let parent = by_word
                    .get(&c.word[..c.word.len() - 1])
                    .ok_or_else(|| format!("cylinder {c} has no parent"))?;
                if !iv.within(parent) || c.diameter > parent.length() {
                    return Err(format!("cylinder {c} is not nested in {parent}"));
                }
                let first = &scheme.elements[c.word[0]];
                let pushed = map
                    .push_word(&first.branch_word, &iv)
                    .ok_or("cylinder does not follow its word")?;
                if !pushed.within(&scheme.elements[c.word[1]].interval) {
                    return Err(format!(
                        "F maps cylinder {c} to {pushed}, outside element {}",
                        c.word[1]
                    ));
                }
            }
            by_word.insert(c.word.clone(), iv);
        }
    }
    Ok(())
}

pub fn lift_normalization(map: &ExactMap, scheme: &InducingScheme<Rational>) -> Result<(), String> {
    if scheme.is_empty() {
        return Ok(());
    }
    let nu = PiecewiseMeasure::uniform(&scheme.base);
    let lift = lift_measure(map, scheme, &nu).map_err(|e| e.to_string())?;
    if lift.measure.total_mass != q(1, 1) {
        return Err(format!("lifted mass {}", lift.measure.total_mass));
    }
    if lift.q < q(1, 1) - lift.unlifted_mass.clone() {
        return Err(format!("Q={} below the stored mass", lift.q));
    }
    Ok(())
}

/// All invariants for one map. Returns whether a nice base was found.
pub fn all_invariants(case: &MapCase) -> Result<bool, String> {
    let map = case.build();
    refinement_nesting(&map)?;
    lap_submultiplicativity(&map)?;
    let Some(v) = nice_base(&map) else {
        return Ok(false);
    };
    scheme_monotonicity(&map, &v)?;
    let scheme = scheme_at(&map, &v, 4)?;
    cylinder_nesting(&map, &scheme)?;
    lift_normalization(&map, &scheme)?;
    Ok(true)
}
