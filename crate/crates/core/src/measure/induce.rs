//! Inducing an `f`-invariant measure through the tower:
//! `ν = π_*(μ̌|W̌) / μ̌(W̌)`.

use std::collections::BTreeMap;

use crate::config::Budgets;
use crate::error::{Error, Result};
use crate::inducing::{tower_base, InducingScheme, TowerSet};
use crate::interval::Interval;
use crate::linalg::nullspace;
use crate::map::PiecewiseMap;
use crate::partition::refine_partition;
use crate::report::{Condition, ConditionReport};
use crate::scalar::Scalar;
use crate::tower::{tower_step, Tower};

use super::PiecewiseMeasure;

/// Compares `f_* μ` with `μ` on the cells (and cell endpoints) of the
/// `depth`-fold refinement.
pub fn check_invariance<S: Scalar>(
    map: &PiecewiseMap<S>,
    mu: &PiecewiseMeasure<S>,
    depth: usize,
    cell_budget: usize,
) -> Result<()> {
    let pushed = mu
        .pushforward(map)
        .map_err(|e| Error::PreconditionUnverified {
            reason: "measure is not invariant".into(),
            witness: vec![("pushforward".into(), e.to_string())],
        })?;
    let cells = refine_partition(map, depth.max(1), cell_budget)?.cells;
    let (dist, worst) = pushed.distance_on(mu, &cells);
    if dist.is_zero() || (!S::EXACT && dist.to_f64() <= S::tolerance()) {
        return Ok(());
    }
    let worst = worst.expect("nonzero distance has a witness");
    Err(Error::PreconditionUnverified {
        reason: "measure is not invariant".into(),
        witness: vec![
            ("set".into(), worst.set),
            ("pushforward".into(), worst.left.render_compact()),
            ("measure".into(), worst.right.render_compact()),
            ("depth".into(), depth.to_string()),
        ],
    })
}

/// An `f̌`-invariant measure on the tower: densities on `D_e ∩ A_i` pieces
/// and atoms on tower states.
#[derive(Clone, Debug, PartialEq)]
pub struct TowerMeasure<S> {
    pub pieces: Vec<(usize, Interval<S>, S)>,
    pub atoms: Vec<(usize, S, S)>,
}

impl<S: Scalar> TowerMeasure<S> {
    pub fn project(&self) -> PiecewiseMeasure<S> {
        PiecewiseMeasure::new(
            self.pieces
                .iter()
                .map(|(_, iv, h)| (iv.clone(), h.clone()))
                .collect(),
            self.atoms
                .iter()
                .map(|(_, x, m)| (x.clone(), m.clone()))
                .collect(),
        )
        .expect("nonnegative")
    }

    /// Restriction to a set of `(element, interval)` pieces.
    pub fn restrict(&self, set: &TowerSet<S>) -> TowerMeasure<S> {
        let none = Vec::new();
        let pieces = self
            .pieces
            .iter()
            .flat_map(|(e, iv, h)| {
                set.get(e)
                    .unwrap_or(&none)
                    .iter()
                    .filter_map(move |w| w.intersect(iv).map(|p| (*e, p, h.clone())))
            })
            .collect();
        let atoms = self
            .atoms
            .iter()
            .filter(|(e, x, _)| {
                set.get(e)
                    .is_some_and(|ws| ws.iter().any(|w| w.interior_contains(x)))
            })
            .cloned()
            .collect();
        TowerMeasure { pieces, atoms }
    }
}

/// Stationary densities on the pieces `D_e ∩ A_i` of a finite Markov tower,
/// scaled so that the projection carries `mass`.
fn lift_density<S: Scalar>(
    tower: &Tower<S>,
    map: &PiecewiseMap<S>,
    density: &PiecewiseMeasure<S>,
) -> Result<Vec<(usize, Interval<S>, S)>> {
    let mut states: Vec<(usize, usize, Interval<S>)> = Vec::new();
    for el in tower.elements() {
        for (i, b) in map.branches().iter().enumerate() {
            if let Some(p) = el.interval.intersect(b.domain()) {
                states.push((el.id, i, p.interior()));
            }
        }
    }
    let n = states.len();
    let mut t = vec![vec![S::zero(); n]; n];
    for (s, (e, i, piece)) in states.iter().enumerate() {
        let to = tower.transition(*e, *i).ok_or(Error::Unsaturated {
            element: *e,
            branch: *i,
        })?;
        let b = map.branch(*i);
        let slope = b.slope().ok_or(Error::NonAffine)?.abs();
        let image = b.image_of(piece).expect("nondegenerate image");
        if !image.same_closure(&tower.element(to).interval) {
            return Err(Error::NotMarkov(format!(
                "{} maps onto {}, not onto a tower element",
                piece, image
            )));
        }
        for (r, (e2, _, p2)) in states.iter().enumerate() {
            if *e2 == to {
                debug_assert!(p2.within(&image));
                t[r][s] = t[r][s].clone() + S::one() / slope.clone();
            }
        }
    }
    for (r, row) in t.iter_mut().enumerate() {
        row[r] = row[r].clone() - S::one();
    }
    let kernel = nullspace(t, n);
    if kernel.len() != 1 {
        return Err(Error::NoStationaryDensity(format!(
            "tower transfer kernel has dimension {}",
            kernel.len()
        )));
    }
    let mut c = kernel.into_iter().next().expect("one vector");
    if c.iter().all(|x| !x.is_positive()) {
        c = c.into_iter().map(|x| -x).collect();
    }
    if c.iter().any(|x| x.is_negative()) {
        return Err(Error::NoStationaryDensity(
            "tower stationary vector changes sign".into(),
        ));
    }
    let pieces: Vec<(usize, Interval<S>, S)> = states
        .into_iter()
        .zip(c)
        .map(|((e, _, p), h)| (e, p, h))
        .filter(|(_, _, h)| !h.is_zero())
        .collect();
    let projected = PiecewiseMeasure::new(
        pieces
            .iter()
            .map(|(_, p, h)| (p.clone(), h.clone()))
            .collect(),
        Vec::new(),
    )?;
    let alpha = density.total_mass.clone() / projected.total_mass.clone();
    let scaled = projected.scale(&alpha);
    let matches = if S::EXACT {
        scaled == *density
    } else {
        let cells: Vec<Interval<S>> = scaled
            .density_pieces
            .iter()
            .map(|(iv, _)| iv.clone())
            .collect();
        scaled.distance_on(density, &cells).0.to_f64() <= S::tolerance()
    };
    if !matches {
        return Err(Error::PreconditionUnverified {
            reason: "density is not the projection of the stationary tower density".into(),
            witness: Vec::new(),
        });
    }
    Ok(pieces
        .into_iter()
        .map(|(e, p, h)| (e, p, h * alpha.clone()))
        .collect())
}

/// Lifts the atoms of an invariant measure onto periodic tower orbits.
fn lift_atoms<S: Scalar>(
    tower: &Tower<S>,
    map: &PiecewiseMap<S>,
    atoms: &[(S, S)],
    step_budget: usize,
) -> Result<Vec<(usize, S, S)>> {
    let mass: BTreeMap<S::Key, S> = atoms.iter().map(|(x, m)| (x.key(), m.clone())).collect();
    let mut done: BTreeMap<S::Key, ()> = BTreeMap::new();
    let mut out = Vec::new();
    for (x, _) in atoms {
        if done.contains_key(&x.key()) {
            continue;
        }
        let mut seen: BTreeMap<(usize, S::Key), usize> = BTreeMap::new();
        let mut path: Vec<(S, usize)> = Vec::new();
        let mut state = (x.clone(), 0usize);
        let start = loop {
            if let Some(&k) = seen.get(&(state.1, state.0.key())) {
                break k;
            }
            if path.len() >= step_budget {
                return Err(Error::PreconditionUnverified {
                    reason: format!(
                        "atom {} did not close up within {step_budget} tower steps",
                        x.render()
                    ),
                    witness: Vec::new(),
                });
            }
            seen.insert((state.1, state.0.key()), path.len());
            path.push(state.clone());
            state = tower_step(tower, map, (&state.0, state.1))?;
        };
        let cycle = &path[start..];
        let mut count: BTreeMap<S::Key, usize> = BTreeMap::new();
        for (y, _) in cycle {
            *count.entry(y.key()).or_default() += 1;
        }
        for (y, e) in cycle {
            let m = mass
                .get(&y.key())
                .cloned()
                .ok_or_else(|| Error::PreconditionUnverified {
                    reason: format!(
                        "orbit point {} of atom {} carries no mass",
                        y.render(),
                        x.render()
                    ),
                    witness: Vec::new(),
                })?;
            out.push((*e, y.clone(), m / S::from_i64(count[&y.key()] as i64)));
            done.insert(y.key(), ());
        }
    }
    Ok(out)
}

/// Lifts `mu` to the (finite, saturated) tower.
pub fn lift_to_tower<S: Scalar>(
    tower: &Tower<S>,
    map: &PiecewiseMap<S>,
    mu: &PiecewiseMeasure<S>,
    step_budget: usize,
) -> Result<TowerMeasure<S>> {
    let density = PiecewiseMeasure::new(mu.density_pieces.clone(), Vec::new())?;
    let pieces = if density.is_zero() {
        Vec::new()
    } else {
        lift_density(tower, map, &density)?
    };
    let atoms = lift_atoms(tower, map, &mu.atoms, step_budget)?;
    Ok(TowerMeasure { pieces, atoms })
}

pub(crate) fn require_scheme_conditions(reports: &[ConditionReport]) -> Result<()> {
    let failing: Vec<(String, String)> = [Condition::M, Condition::C]
        .into_iter()
        .filter(|c| {
            !reports
                .iter()
                .any(|r| r.condition == *c && r.verdict.is_pass())
        })
        .map(|c| {
            let v = reports
                .iter()
                .find(|r| r.condition == c)
                .map_or("absent", |r| r.verdict.as_str());
            (c.name().to_string(), v.to_string())
        })
        .collect();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Error::PreconditionUnverified {
            reason: "scheme conditions M and C not passed".into(),
            witness: failing,
        })
    }
}

/// `ν = π_*(μ̌|W̌)` normalized, for a scheme passing (M) and (C).
pub fn induce_measure<S: Scalar>(
    scheme: &InducingScheme<S>,
    tower: &Tower<S>,
    map: &PiecewiseMap<S>,
    mu: &PiecewiseMeasure<S>,
    reports: &[ConditionReport],
    test_depth: usize,
    budgets: &Budgets,
) -> Result<PiecewiseMeasure<S>> {
    require_scheme_conditions(reports)?;
    if !tower.saturated() {
        return Err(Error::PreconditionUnverified {
            reason: "tower is not saturated".into(),
            witness: Vec::new(),
        });
    }
    check_invariance(map, mu, test_depth, budgets.cells)?;
    if mu.measure_of(&scheme.base).is_zero() {
        return Err(Error::ZeroBaseMass);
    }
    let Some(w_check) = tower_base(scheme, tower, map)? else {
        return Err(Error::PreconditionUnverified {
            reason: "W-check did not close".into(),
            witness: Vec::new(),
        });
    };
    let lifted = lift_to_tower(tower, map, mu, budgets.words)?;
    let restricted = lifted.restrict(&w_check).project();
    if restricted.is_zero() {
        return Err(Error::ZeroBaseMass);
    }
    restricted.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{doubling_map, markov_map};
    use crate::inducing::{build_canonical_scheme, certify_nice, check_conditions, SchemeCheck};
    use crate::measure::markov_invariant_density;
    use crate::scalar::{q, Rational};
    use crate::tower::build_tower;

    fn setup(
        tau_max: usize,
    ) -> (
        PiecewiseMap<Rational>,
        InducingScheme<Rational>,
        Tower<Rational>,
        Vec<ConditionReport>,
    ) {
        let d = doubling_map();
        let cert = certify_nice(&d, &Interval::open(q(1, 3), q(2, 3)).unwrap(), 10).unwrap();
        let s = build_canonical_scheme(&d, &cert, tau_max, None, 1 << 20).unwrap();
        let t = build_tower(&d, 5, 1000).unwrap();
        let r = check_conditions(&d, &s, tau_max, &SchemeCheck::BASIC, 1 << 20);
        (d, s, t, r)
    }

    #[test]
    fn lebesgue_induces_restricted_lebesgue() {
        let (d, s, t, r) = setup(4);
        let leb = PiecewiseMeasure::lebesgue(&Interval::open(q(0, 1), q(1, 1)).unwrap());
        let nu = induce_measure(&s, &t, &d, &leb, &r, 6, &Budgets::default()).unwrap();
        assert_eq!(nu, PiecewiseMeasure::uniform(&s.base));
        assert_eq!(nu.density_pieces[0].1, q(3, 1));
    }

    #[test]
    fn periodic_orbit_induces_dirac() {
        let (d, s, t, r) = setup(4);
        let mu = PiecewiseMeasure::uniform_atoms(&[q(1, 7), q(2, 7), q(4, 7)]);
        let nu = induce_measure(&s, &t, &d, &mu, &r, 6, &Budgets::default()).unwrap();
        assert_eq!(nu, PiecewiseMeasure::dirac(q(4, 7)));
    }

    #[test]
    fn zero_base_mass_and_non_invariant() {
        let (d, s, t, r) = setup(4);
        let mu = PiecewiseMeasure::uniform_atoms(&[q(1, 3), q(2, 3)]);
        assert_eq!(
            induce_measure(&s, &t, &d, &mu, &r, 6, &Budgets::default()),
            Err(Error::ZeroBaseMass)
        );
        let bad = PiecewiseMeasure::dirac(q(1, 6));
        match induce_measure(&s, &t, &d, &bad, &r, 6, &Budgets::default()) {
            Err(Error::PreconditionUnverified { witness, .. }) => {
                assert_eq!(witness[0], ("set".to_string(), "{1/3}".to_string()));
                assert_eq!(witness[1], ("pushforward".to_string(), "1".to_string()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn markov_density_lifts_to_two_level_tower() {
        let m = markov_map();
        let t = build_tower(&m, 5, 1000).unwrap();
        let mu = markov_invariant_density(&m).unwrap();
        let lifted = lift_to_tower(&t, &m, &mu, 1000).unwrap();
        assert_eq!(lifted.project(), mu);
    }
}
