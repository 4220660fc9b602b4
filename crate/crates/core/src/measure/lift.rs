//! The lift operator `𝓛(ν) = Q_ν⁻¹ Σ_J Σ_{k<τ(J)} f^k_*(ν|J)`.

use crate::error::{Error, Result};
use crate::inducing::InducingScheme;
use crate::interval::{merge_closures, Interval};
use crate::map::PiecewiseMap;
use crate::scalar::Scalar;

use super::PiecewiseMeasure;

#[derive(Clone, Debug, PartialEq)]
pub struct LiftResult<S> {
    pub measure: PiecewiseMeasure<S>,
    /// `Σ τ(J) ν(J)` over the stored elements (a lower bound for `Q_ν`).
    pub q: S,
    /// The truncated `X = ⋃_J ⋃_{k<τ(J)} f^k(J)`, merged.
    pub support_set_x: Vec<Interval<S>>,
    /// Mass of `ν` on the base outside the stored elements.
    pub unlifted_mass: S,
}

impl<S: Scalar> LiftResult<S> {
    pub fn truncated(&self) -> bool {
        !self.unlifted_mass.is_zero()
    }
}

/// Mass of `ν|J` carried along the branch word of `J` for `k < τ(J)` steps.
fn spread<S: Scalar>(
    map: &PiecewiseMap<S>,
    nu: &PiecewiseMeasure<S>,
    j: &crate::inducing::BasicElement<S>,
) -> Result<(PiecewiseMeasure<S>, Vec<Interval<S>>)> {
    let mut cur = nu.restrict(std::slice::from_ref(&j.interval));
    let mut block = cur.clone();
    let mut sets = vec![j.interval.clone()];
    let mut set = j.interval.clone();
    for &b in &j.branch_word[..j.tau - 1] {
        let branch = map.branch(b);
        cur = cur.push_branch(branch)?;
        set = branch
            .image_of(&set)
            .ok_or(Error::InvalidScheme(format!("{} has no image", j.interval)))?;
        block = block.add(&cur);
        sets.push(set.clone());
    }
    Ok((block, sets))
}

pub fn lift_measure<S: Scalar>(
    map: &PiecewiseMap<S>,
    scheme: &InducingScheme<S>,
    nu: &PiecewiseMeasure<S>,
) -> Result<LiftResult<S>> {
    let outside = nu.total_mass.clone() - nu.measure_of(&scheme.base);
    if !outside.is_zero() && outside.to_f64().abs() > S::tolerance() {
        return Err(Error::InvalidMeasure(format!(
            "measure has mass {} outside the base {}",
            outside.render_compact(),
            scheme.base
        )));
    }
    let mut total = PiecewiseMeasure::zero();
    let mut q = S::zero();
    let mut covered = S::zero();
    let mut support = Vec::new();
    for j in &scheme.elements {
        let mass = nu.measure_of(&j.interval);
        covered = covered + mass.clone();
        q = q + S::from_i64(j.tau as i64) * mass;
        let (block, sets) = spread(map, nu, j)?;
        total = total.add(&block);
        support.extend(sets);
    }
    if q.is_zero() {
        return Err(Error::InvalidMeasure(
            "the stored elements carry no mass, so Q is zero".into(),
        ));
    }
    let measure = total.scale(&(S::one() / q.clone()));
    Ok(LiftResult {
        measure,
        q,
        support_set_x: merge_closures(support),
        unlifted_mass: nu.total_mass.clone() - covered,
    })
}
