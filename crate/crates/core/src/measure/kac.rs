//! Kac's formula and the round trip `𝓛(i(μ)) = μ`.

use crate::config::Budgets;
use crate::error::Result;
use crate::inducing::InducingScheme;
use crate::map::PiecewiseMap;
use crate::partition::refine_partition;
use crate::report::{witness, Condition, ConditionReport};
use crate::scalar::{render_dyadic_bound, Scalar};
use crate::tower::Tower;

use super::{induce_measure, lift_measure, LiftResult, PiecewiseMeasure};

#[derive(Clone, Debug)]
pub struct KacOutcome<S> {
    pub nu: PiecewiseMeasure<S>,
    pub lift: LiftResult<S>,
    /// `Q_partial + (tau_max + 1) ν(base outside the stored elements)`.
    pub q_lower: S,
    /// `1 / μ(base)`.
    pub target: S,
    pub tv: S,
    /// `1 − Q_partial / target`, the mass the truncation can misplace.
    pub tv_bound: S,
    pub kac: ConditionReport,
    pub roundtrip: ConditionReport,
}

impl<S> KacOutcome<S> {
    pub fn reports(&self) -> [&ConditionReport; 2] {
        [&self.kac, &self.roundtrip]
    }
}

pub fn kac_roundtrip_check<S: Scalar>(
    scheme: &InducingScheme<S>,
    tower: &Tower<S>,
    map: &PiecewiseMap<S>,
    mu: &PiecewiseMeasure<S>,
    reports: &[ConditionReport],
    test_depth: usize,
    budgets: &Budgets,
) -> Result<KacOutcome<S>> {
    let mu = mu.normalized()?;
    let nu = induce_measure(scheme, tower, map, &mu, reports, test_depth, budgets)?;
    let lift = lift_measure(map, scheme, &nu)?;
    let tail_time = S::from_i64(scheme.tau_max as i64 + 1);
    let slack = tail_time * lift.unlifted_mass.clone();
    let q_lower = lift.q.clone() + slack.clone();
    let target = S::one() / mu.measure_of(&scheme.base);
    let err = target.clone() - q_lower.clone();
    let exact_hit = err.is_zero() || (!S::EXACT && err.to_f64().abs() <= S::tolerance());

    let kac = if exact_hit && !lift.truncated() {
        ConditionReport::pass(Condition::Kac, scheme.tau_max)
    } else if (exact_hit || !err.is_negative()) && err.le_tol(&slack) {
        ConditionReport::pass_at_depth(Condition::Kac, scheme.tau_max)
    } else {
        ConditionReport::fail(
            Condition::Kac,
            scheme.tau_max,
            witness([
                ("Q", q_lower.render_compact()),
                ("target", target.render_compact()),
            ]),
        )
    };
    let kac = kac
        .note("Q", q_lower.render_compact())
        .note("target", target.render_compact())
        .note("err<", render_dyadic_bound(&err.abs()))
        .note("Q_partial", lift.q.render_compact());

    let cells = refine_partition(map, test_depth.max(1), budgets.cells)?.cells;
    let (tv, worst) = lift.measure.distance_on(&mu, &cells);
    let tv_bound = {
        let b = S::one() - lift.q.clone() / target.clone();
        if b.is_negative() {
            S::zero()
        } else {
            b
        }
    };
    let roundtrip = if tv.is_zero() && lift.measure == mu {
        ConditionReport::pass(Condition::Roundtrip, test_depth)
    } else if tv.le_tol(&tv_bound)
        || (!S::EXACT && (tv.clone() - tv_bound.clone()).to_f64() <= S::tolerance())
    {
        ConditionReport::pass_at_depth(Condition::Roundtrip, test_depth)
    } else {
        let w = worst.expect("positive distance has a witness");
        ConditionReport::fail(
            Condition::Roundtrip,
            test_depth,
            witness([
                ("set", w.set),
                ("lifted", w.left.render_compact()),
                ("measure", w.right.render_compact()),
            ]),
        )
    };
    let roundtrip = roundtrip
        .note("tv", tv.render_compact())
        .note("tv_f64", format!("{:.6e}", tv.to_f64()))
        .note("bound", tv_bound.render_compact());

    let (kac, roundtrip) = if S::EXACT {
        (kac, roundtrip)
    } else {
        (
            kac.downgrade_numeric(S::tolerance()),
            roundtrip.downgrade_numeric(S::tolerance()),
        )
    };
    Ok(KacOutcome {
        nu,
        lift,
        q_lower,
        target,
        tv,
        tv_bound,
        kac,
        roundtrip,
    })
}
