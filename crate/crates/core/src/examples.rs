//! Worked example maps used by the CLI fixtures and the test suites.

use crate::inducing::InducingScheme;
use crate::interval::Interval;
use crate::map::{Branch, PiecewiseMap};
use crate::scalar::{pow2, q, Rational};

fn unit() -> Interval<Rational> {
    Interval::closed(q(0, 1), q(1, 1)).unwrap()
}

fn affine(lo: Rational, hi: Rational, slope: Rational, offset: Rational) -> Branch<Rational> {
    Branch::affine(Interval::open(lo, hi).unwrap(), slope, offset).unwrap()
}

/// `x -> 2x mod 1` on [0,1].
pub fn doubling_map() -> PiecewiseMap<Rational> {
    PiecewiseMap::new(
        unit(),
        vec![
            affine(q(0, 1), q(1, 2), q(2, 1), q(0, 1)),
            affine(q(1, 2), q(1, 1), q(2, 1), q(-1, 1)),
        ],
    )
    .unwrap()
}

/// `2x` on (0,1/2) and `x - 1/2` on (1/2,1): a Markov map with golden-mean
/// growth and a two-element tower.
pub fn markov_map() -> PiecewiseMap<Rational> {
    PiecewiseMap::new(
        unit(),
        vec![
            affine(q(0, 1), q(1, 2), q(2, 1), q(0, 1)),
            affine(q(1, 2), q(1, 1), q(1, 1), q(-1, 2)),
        ],
    )
    .unwrap()
}

/// The identity of [0,1] as a single branch.
pub fn identity_map() -> PiecewiseMap<Rational> {
    PiecewiseMap::new(unit(), vec![affine(q(0, 1), q(1, 1), q(1, 1), q(0, 1))]).unwrap()
}

/// Full tent map `1 - |2x - 1|`.
pub fn tent_map() -> PiecewiseMap<Rational> {
    PiecewiseMap::new(
        unit(),
        vec![
            affine(q(0, 1), q(1, 2), q(2, 1), q(0, 1)),
            affine(q(1, 2), q(1, 1), q(-2, 1), q(2, 1)),
        ],
    )
    .unwrap()
}

/// Full logistic map `4x(1-x)` with two quadratic branches (numeric mode).
pub fn logistic_map() -> PiecewiseMap<f64> {
    let left = Branch::quadratic(Interval::open(0.0, 0.5).unwrap(), -4.0, 4.0, 0.0).unwrap();
    let right = Branch::quadratic(Interval::open(0.5, 1.0).unwrap(), -4.0, 4.0, 0.0).unwrap();
    PiecewiseMap::new(Interval::closed(0.0, 1.0).unwrap(), vec![left, right]).unwrap()
}

/// The doubling-map scheme `J_n = (2^-(n+1), 2^-n)`, `τ(J_n) = n + 1`, over
/// the base `(0,1)`, keeping `J_0..J_{count-1}`. It violates minimality.
pub fn counterexample_scheme(count: usize) -> InducingScheme<Rational> {
    let d = doubling_map();
    let parts = (0..count as i64)
        .map(|n| {
            let j = Interval::open(pow2(-(n + 1)), pow2(-n)).unwrap();
            let mut word = vec![0; n as usize];
            word.push(1);
            (j, word)
        })
        .collect();
    InducingScheme::from_parts(
        &d,
        Interval::open(q(0, 1), q(1, 1)).unwrap(),
        None,
        parts,
        count,
    )
    .unwrap()
}
