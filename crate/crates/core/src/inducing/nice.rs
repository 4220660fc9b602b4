//! Certification of nice sets: `f^n(∂V) ∩ V = ∅` for all `n ≥ 0`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::map::{PiecewiseMap, Side};
use crate::report::{witness, Condition, ConditionReport};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NiceVerdict {
    Nice,
    NotNice,
    Inconclusive,
}

impl NiceVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            NiceVerdict::Nice => "nice",
            NiceVerdict::NotNice => "not_nice",
            NiceVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitClass {
    /// Both boundary orbits closed up into cycles.
    EventuallyPeriodic,
    OpenEnded,
}

impl OrbitClass {
    pub fn as_str(self) -> &'static str {
        match self {
            OrbitClass::EventuallyPeriodic => "eventually-periodic",
            OrbitClass::OpenEnded => "open-ended",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NiceCertificate<S> {
    pub candidate: Interval<S>,
    pub horizon: usize,
    pub verdict: NiceVerdict,
    /// Boundary point of `V` and the time its orbit enters `V`.
    pub witness: Option<(S, usize)>,
    pub boundary_orbit_class: OrbitClass,
    /// Distinct boundary-orbit points visited, sorted.
    pub orbit: Vec<S>,
}

impl<S: Scalar> NiceCertificate<S> {
    pub fn is_nice(&self) -> bool {
        self.verdict == NiceVerdict::Nice
    }

    /// A nice verdict backed by closed boundary orbits.
    pub fn is_exact(&self) -> bool {
        self.is_nice() && self.boundary_orbit_class == OrbitClass::EventuallyPeriodic && S::EXACT
    }

    pub fn to_report(&self) -> ConditionReport {
        let report = match (&self.verdict, &self.witness) {
            (NiceVerdict::NotNice, Some((x, n))) => ConditionReport::fail(
                Condition::Nice,
                self.horizon,
                witness([("point", x.render_compact()), ("n", n.to_string())]),
            ),
            (NiceVerdict::Nice, _)
                if self.boundary_orbit_class == OrbitClass::EventuallyPeriodic =>
            {
                ConditionReport::pass(Condition::Nice, self.horizon)
            }
            _ => ConditionReport::inconclusive(Condition::Nice, self.horizon),
        }
        .note("V", &self.candidate)
        .note("class", self.boundary_orbit_class.as_str());
        if S::EXACT {
            report
        } else {
            report.downgrade_numeric(S::tolerance())
        }
    }
}

/// Iterates both boundary points of `v` (with the side from which the
/// interior of `v` approaches them) until each orbit cycles, enters `v`, or
/// the horizon is reached.
pub fn certify_nice<S: Scalar>(
    map: &PiecewiseMap<S>,
    v: &Interval<S>,
    horizon: usize,
) -> Result<NiceCertificate<S>> {
    if !v.within(map.ambient()) {
        return Err(Error::Precondition(format!(
            "{v} is not inside the ambient interval {}",
            map.ambient()
        )));
    }
    let v = v.interior();
    let mut orbit: Vec<S> = Vec::new();
    let mut all_closed = true;
    for (start, side) in [(v.lo().clone(), Side::Right), (v.hi().clone(), Side::Left)] {
        let mut seen: BTreeSet<(S::Key, Side)> = BTreeSet::new();
        let (mut x, mut s) = (start.clone(), side);
        seen.insert((x.key(), s));
        push_unique(&mut orbit, &x);
        let mut closed = false;
        for n in 1..=horizon {
            let Some((y, t, _)) = map.one_sided_step(&x, s) else {
                break;
            };
            if v.interior_contains(&y) && !y.same(v.lo()) && !y.same(v.hi()) {
                return Ok(NiceCertificate {
                    candidate: v.clone(),
                    horizon,
                    verdict: NiceVerdict::NotNice,
                    witness: Some((start, n)),
                    boundary_orbit_class: OrbitClass::OpenEnded,
                    orbit: sorted(orbit),
                });
            }
            push_unique(&mut orbit, &y);
            if !seen.insert((y.key(), t)) {
                closed = true;
                break;
            }
            (x, s) = (y, t);
        }
        all_closed &= closed;
    }
    let (verdict, class) = if all_closed {
        (NiceVerdict::Nice, OrbitClass::EventuallyPeriodic)
    } else {
        (NiceVerdict::Inconclusive, OrbitClass::OpenEnded)
    };
    Ok(NiceCertificate {
        candidate: v,
        horizon,
        verdict,
        witness: None,
        boundary_orbit_class: class,
        orbit: sorted(orbit),
    })
}

fn push_unique<S: Scalar>(out: &mut Vec<S>, x: &S) {
    if !out.iter().any(|o| o.same(x)) {
        out.push(x.clone());
    }
}

fn sorted<S: Scalar>(mut v: Vec<S>) -> Vec<S> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("comparable"));
    v
}
