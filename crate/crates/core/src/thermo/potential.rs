use crate::error::{Error, Result};
use crate::inducing::InducingScheme;
use crate::map::PiecewiseMap;
use crate::scalar::Scalar;

use super::SymbolicReal;

#[derive(Clone, Debug, PartialEq)]
pub enum Potential<S> {
    Constant(S),
    /// `(slope, offset)` per branch: `φ(x) = slope·x + offset` on that branch.
    AffinePerBranch(Vec<(S, S)>),
    /// `φ = −t·log|f'|`.
    NegLogDerivative(S),
}

impl<S: Scalar> Potential<S> {
    /// The same affine formula on every branch.
    pub fn affine(map: &PiecewiseMap<S>, slope: S, offset: S) -> Self {
        Potential::AffinePerBranch(vec![(slope, offset); map.branch_count()])
    }

    pub fn validate(&self, map: &PiecewiseMap<S>) -> Result<()> {
        match self {
            Potential::AffinePerBranch(coeffs) if coeffs.len() != map.branch_count() => {
                Err(Error::Precondition(format!(
                    "potential has {} branch formulas, map has {} branches",
                    coeffs.len(),
                    map.branch_count()
                )))
            }
            Potential::NegLogDerivative(_) if S::EXACT && !map.is_affine() => Err(Error::NonAffine),
            _ => Ok(()),
        }
    }

    /// `φ(x)` using the formula of `branch` (so closure endpoints are allowed).
    pub fn eval_on(&self, map: &PiecewiseMap<S>, branch: usize, x: &S) -> SymbolicReal<S> {
        match self {
            Potential::Constant(c) => SymbolicReal::rational(c.clone()),
            Potential::AffinePerBranch(coeffs) => {
                let (a, b) = &coeffs[branch];
                SymbolicReal::rational(a.clone() * x.clone() + b.clone())
            }
            Potential::NegLogDerivative(t) => {
                SymbolicReal::log_of(&map.branch(branch).derivative(x), -t.clone())
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Potential::Constant(c) => format!("const:{}", c.render_compact()),
            Potential::AffinePerBranch(coeffs) => {
                let parts: Vec<String> = coeffs
                    .iter()
                    .map(|(a, b)| format!("{},{}", a.render_compact(), b.render_compact()))
                    .collect();
                format!("affine:{}", parts.join(";"))
            }
            Potential::NegLogDerivative(t) => format!("neglog:{}", t.render_compact()),
        }
    }
}

/// Birkhoff sum of `φ` along a branch word, evaluated with the prescribed
/// branches so endpoints of closures are allowed.
pub(crate) fn block_sum<S: Scalar>(
    map: &PiecewiseMap<S>,
    phi: &Potential<S>,
    word: &[usize],
    x: &S,
) -> SymbolicReal<S> {
    let mut y = x.clone();
    let mut total = SymbolicReal::zero();
    for &b in word {
        total = total + phi.eval_on(map, b, &y);
        y = map.branch(b).eval(&y);
    }
    total
}

/// `φ̄(x) = Σ_{k<τ(J)} φ(f^k x)` for `x` in element `j`.
pub fn induced_potential<S: Scalar>(
    scheme: &InducingScheme<S>,
    map: &PiecewiseMap<S>,
    phi: &Potential<S>,
    j: usize,
    x: &S,
) -> Result<SymbolicReal<S>> {
    phi.validate(map)?;
    let element = scheme
        .elements
        .get(j)
        .ok_or_else(|| Error::Precondition(format!("no element {j}")))?;
    if !element.interval.interior_contains(x) {
        return Err(Error::Precondition(format!(
            "{} is not in {}",
            x.render_compact(),
            element.interval
        )));
    }
    let mut y = x.clone();
    for (k, &b) in element.branch_word.iter().enumerate() {
        if map.is_boundary(&y) {
            return Err(Error::BoundaryHit(k));
        }
        y = map.branch(b).eval(&y);
    }
    Ok(block_sum(map, phi, &element.branch_word, x))
}
