use std::fmt;

use crate::error::{Error, Result};
use crate::inducing::InducingScheme;
use crate::map::PiecewiseMap;
use crate::report::Verdict;
use crate::scalar::Scalar;

use super::potential::block_sum;
use super::{render_numeric, Potential, SymbolicReal};

#[derive(Clone, Debug, PartialEq)]
pub enum Quantity<S> {
    Exact(S),
    Numeric(f64),
}

impl<S: Scalar> Quantity<S> {
    pub fn to_f64(&self) -> f64 {
        match self {
            Quantity::Exact(x) => x.to_f64(),
            Quantity::Numeric(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&S> {
        match self {
            Quantity::Exact(x) => Some(x),
            Quantity::Numeric(_) => None,
        }
    }

    fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (Quantity::Exact(a), Quantity::Exact(b)) => Quantity::Exact(a.clone() + b.clone()),
            _ => Quantity::Numeric(self.to_f64() + other.to_f64()),
        }
    }
}

impl<S: Scalar> fmt::Display for Quantity<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Exact(x) => write!(f, "{}", x.render()),
            Quantity::Numeric(x) => write!(f, "{}", render_numeric(*x)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TailFlag<S> {
    /// Certified upper bound on everything beyond the truncation.
    Bounded(S),
    Decaying,
    Growing,
}

impl<S: Scalar> fmt::Display for TailFlag<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailFlag::Bounded(b) => write!(f, "{}", b.render()),
            TailFlag::Decaying => write!(f, "decaying"),
            TailFlag::Growing => write!(f, "growing"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SumRecord<S> {
    pub name: &'static str,
    pub n: usize,
    pub partial: Quantity<S>,
    /// Per inducing time `1..=n`.
    pub level_sums: Vec<Quantity<S>>,
    pub tail: TailFlag<S>,
    pub verdict: Verdict,
}

impl<S: Scalar> fmt::Display for SumRecord<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} N={} partial={} tail={} verdict={}",
            self.name,
            self.n,
            self.partial,
            self.tail,
            self.verdict.as_str()
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReccReport<S> {
    pub sum1: SumRecord<S>,
    pub sum2: SumRecord<S>,
    pub epsilon: S,
    pub p_l_bound: f64,
}

impl<S: Scalar> ReccReport<S> {
    pub fn records(&self) -> Vec<String> {
        vec![
            self.sum1.to_string(),
            format!(
                "{} P_L_bound={} P_L_source=caller epsilon={}",
                self.sum2,
                render_numeric(self.p_l_bound),
                self.epsilon.render_compact()
            ),
        ]
    }
}

/// `Σ_J sup_J exp φ̄` and `Σ_J τ(J) sup_J exp(φ̄ − (P − ε)τ)` over elements
/// with `τ <= n`.
pub fn recc_summability<S: Scalar>(
    scheme: &InducingScheme<S>,
    map: &PiecewiseMap<S>,
    phi: &Potential<S>,
    epsilon: &S,
    p_l_bound: f64,
    n: usize,
) -> Result<ReccReport<S>> {
    if scheme.tau_max < n {
        return Err(Error::Precondition(format!(
            "scheme built to tau_max={} < N={n}",
            scheme.tau_max
        )));
    }
    if !map.is_affine() {
        return Err(Error::NonAffine);
    }
    phi.validate(map)?;
    let shift = p_l_bound - epsilon.to_f64();
    let mut levels1: Vec<Quantity<S>> = vec![Quantity::Exact(S::zero()); n];
    let mut levels2: Vec<f64> = vec![0.0; n];
    let mut covered = S::zero();
    for j in scheme.elements.iter().filter(|j| j.tau <= n) {
        let lo = block_sum(map, phi, &j.branch_word, j.interval.lo());
        let hi = block_sum(map, phi, &j.branch_word, j.interval.hi());
        let sup = if is_nonnegative(&(hi.clone() - lo.clone())) {
            hi
        } else {
            lo
        };
        let term = sup
            .exp_exact()
            .map_or_else(|| Quantity::Numeric(sup.to_f64().exp()), Quantity::Exact);
        levels1[j.tau - 1] = levels1[j.tau - 1].add(&term);
        levels2[j.tau - 1] += j.tau as f64 * (sup.to_f64() - shift * j.tau as f64).exp();
        covered = covered + j.interval.length();
    }
    let partial1 = levels1
        .iter()
        .fold(Quantity::Exact(S::zero()), |acc, x| acc.add(x));

    let full = scheme.elements.iter().all(|j| {
        map.push_word(&j.branch_word, &j.interval)
            .is_some_and(|im| im.same_closure(&scheme.base))
    });
    let exact_tail = match phi {
        // sup exp φ̄ on J is (|J|/|W|)^t <= |J|/|W| and the unseen elements
        // share the uncovered part of W.
        Potential::NegLogDerivative(t) if S::EXACT && full && *t >= S::one() => {
            Some((scheme.base.length() - covered) / scheme.base.length())
        }
        _ => None,
    };
    let f1: Vec<f64> = levels1.iter().map(Quantity::to_f64).collect();
    let (tail1, verdict1) = match exact_tail {
        Some(b) => (TailFlag::Bounded(b), Verdict::Pass),
        None => match growth(&f1) {
            (flag, true) => (flag, Verdict::Fail),
            (flag, false) => (flag, Verdict::Inconclusive),
        },
    };
    let sum1 = SumRecord {
        name: "sum1",
        n,
        partial: partial1,
        level_sums: levels1,
        tail: tail1,
        verdict: verdict1,
    };
    let sum2 = SumRecord {
        name: "sum2",
        n,
        partial: Quantity::Numeric(levels2.iter().sum()),
        level_sums: levels2.iter().map(|&x| Quantity::Numeric(x)).collect(),
        tail: growth::<S>(&levels2).0,
        verdict: Verdict::Inconclusive,
    };
    Ok(ReccReport {
        sum1,
        sum2,
        epsilon: epsilon.clone(),
        p_l_bound,
    })
}

fn is_nonnegative<S: Scalar>(x: &SymbolicReal<S>) -> bool {
    match x.as_rational() {
        Some(r) => !r.is_negative(),
        None => x.to_f64() >= 0.0,
    }
}

/// Tail flag from per-level sums, and whether the growth is sustained: at
/// least three nonempty levels that never decrease.
fn growth<S>(levels: &[f64]) -> (TailFlag<S>, bool) {
    let nonempty: Vec<f64> = levels.iter().copied().filter(|x| *x > 0.0).collect();
    let never_decreasing = nonempty.windows(2).all(|w| w[1] >= w[0]);
    let flag = match nonempty.as_slice() {
        [.., a, b] if b < a => TailFlag::Decaying,
        [_] | [] => TailFlag::Decaying,
        _ => TailFlag::Growing,
    };
    (flag, never_decreasing && nonempty.len() >= 3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::doubling_map;
    use crate::inducing::{build_canonical_scheme, certify_nice};
    use crate::interval::Interval;
    use crate::scalar::{pow2, q, Rational};

    fn setup(tau_max: usize) -> (PiecewiseMap<Rational>, InducingScheme<Rational>) {
        let d = doubling_map();
        let cert = certify_nice(&d, &Interval::open(q(1, 3), q(2, 3)).unwrap(), 10).unwrap();
        (
            d.clone(),
            build_canonical_scheme(&d, &cert, tau_max, None, 1 << 20).unwrap(),
        )
    }

    #[test]
    fn first_sum_for_log_derivative() {
        let (d, s) = setup(10);
        for n in 2..=10 {
            let r = recc_summability(
                &s,
                &d,
                &Potential::NegLogDerivative(q(1, 1)),
                &q(1, 10),
                0.0,
                n,
            )
            .unwrap();
            let expect = q(1, 1) - pow2(-(n as i64 - 1));
            assert_eq!(r.sum1.partial, Quantity::Exact(expect));
            assert_eq!(r.sum1.tail, TailFlag::Bounded(pow2(-(n as i64 - 1))));
            assert_eq!(r.sum1.verdict, Verdict::Pass);
        }
        let r = recc_summability(
            &s,
            &d,
            &Potential::NegLogDerivative(q(1, 1)),
            &q(1, 10),
            0.0,
            4,
        )
        .unwrap();
        assert_eq!(r.records()[0], "sum1 N=4 partial=7/8 tail=1/8 verdict=pass");
        assert!(r.records()[1].starts_with("sum2 N=4 partial="));
        assert_eq!(r.sum2.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn zero_potential_counts_elements() {
        let (d, s) = setup(8);
        let r = recc_summability(&s, &d, &Potential::Constant(q(0, 1)), &q(0, 1), 0.0, 8).unwrap();
        assert_eq!(r.sum1.partial, Quantity::Exact(q(14, 1)));
        assert_eq!(r.sum1.tail, TailFlag::Growing);
        assert_eq!(r.sum1.verdict, Verdict::Fail);
    }

    #[test]
    fn second_sum_terms() {
        let (d, s) = setup(6);
        let r = recc_summability(
            &s,
            &d,
            &Potential::NegLogDerivative(q(1, 1)),
            &q(1, 10),
            0.0,
            6,
        )
        .unwrap();
        let expect: f64 = (2..=6)
            .map(|n| 2.0 * n as f64 * 2f64.powi(-n) * (0.1 * n as f64).exp())
            .sum();
        assert!((r.sum2.partial.to_f64() - expect).abs() < 1e-12);
        assert_eq!(r.sum2.tail, TailFlag::Decaying);
    }

    #[test]
    fn partial_sums_grow_with_truncation() {
        let (d, s) = setup(8);
        let phi = Potential::affine(&d, q(-1, 1), q(0, 1));
        let mut prev = 0.0;
        for n in 1..=8 {
            let r = recc_summability(&s, &d, &phi, &q(0, 1), 0.0, n).unwrap();
            assert!(r.sum1.partial.to_f64() >= prev);
            prev = r.sum1.partial.to_f64();
        }
        assert!(recc_summability(&s, &d, &phi, &q(0, 1), 0.0, 9).is_err());
    }
}
