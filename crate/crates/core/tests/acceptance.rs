mod common;

use std::cell::Cell;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use liftkit::config::{Budgets, DiagnosticConfig};
use liftkit::examples::{counterexample_scheme, doubling_map, markov_map};
use liftkit::inducing::{
    build_canonical_scheme, certify_nice, check_conditions, check_nested_or_disjoint,
    embed_in_tower, InducingScheme, SchemeCheck,
};
use liftkit::measure::{kac_roundtrip_check, PiecewiseMeasure};
use liftkit::scalar::{pow2, q};
use liftkit::thermo::{recc_summability, variation_vn, Potential, Quantity, TailFlag};
use liftkit::{
    build_tower, check_markov, check_p1_p2, lap_entropy, refine_partition, Condition, Interval,
    Rational, Verdict,
};
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn iv(a: i64, b: i64, d: i64) -> Interval<Rational> {
    Interval::open(q(a, d), q(b, d)).unwrap()
}

fn middle_scheme(tau_max: usize) -> Result<InducingScheme<Rational>, String> {
    let d = doubling_map();
    let cert = certify_nice(&d, &iv(1, 2, 3), 12).map_err(|e| e.to_string())?;
    build_canonical_scheme(&d, &cert, tau_max, None, 1 << 20).map_err(|e| e.to_string())
}

fn tower_finiteness() -> Outcome {
    let d = doubling_map();
    let t = build_tower(&d, 5, 1000).map_err(|e| e.to_string())?;
    ensure(t.len() == 1 && t.saturated(), || {
        format!("doubling tower has {} elements", t.len())
    })?;

    let m = markov_map();
    let t = build_tower(&m, 5, 1000).map_err(|e| e.to_string())?;
    let got: Vec<_> = t.elements().iter().map(|e| e.interval.clone()).collect();
    ensure(t.saturated() && got.len() == 2, || {
        format!("markov tower {got:?}")
    })?;
    ensure(
        got[0].same_closure(&iv(0, 1, 1)) && got[1].same_closure(&iv(0, 1, 2)),
        || format!("markov tower {got:?}"),
    )?;
    let r = check_markov(&t, &m, 4);
    ensure(r.verdict.is_pass(), || r.to_string())?;
    Ok("doubling 1 element, markov {I,(0,1/2)}, Markov k<=4".into())
}

fn nice_certification() -> Outcome {
    let d = doubling_map();
    let good = certify_nice(&d, &iv(1, 2, 3), 12).map_err(|e| e.to_string())?;
    ensure(good.is_exact(), || {
        format!("(1/3,2/3) verdict {}", good.verdict.as_str())
    })?;
    let bad = certify_nice(&d, &iv(1, 3, 4), 12).map_err(|e| e.to_string())?;
    ensure(!bad.is_nice() && bad.witness == Some((q(1, 4), 1)), || {
        format!("(1/4,3/4) witness {:?}", bad.witness)
    })?;
    Ok("(1/3,2/3) exact, (1/4,3/4) witness (1/4,1)".into())
}

/// Every pullback of `v` along words of length `<= n` under `x -> 2x mod 1`,
/// kept when strictly inside `v`, then reduced to the inclusion-maximal ones.
fn brute_force_scheme(v: &Interval<Rational>, n: usize) -> Vec<(Rational, Rational, usize)> {
    let mut found = Vec::new();
    for len in 1..=n {
        for code in 0..1usize << len {
            let (mut lo, mut hi) = (v.lo().clone(), v.hi().clone());
            for k in 0..len {
                let b = q(((code >> k) & 1) as i64, 1);
                lo = (lo + b.clone()) / q(2, 1);
                hi = (hi + b) / q(2, 1);
            }
            let inside = &lo >= v.lo() && &hi <= v.hi() && !(&lo == v.lo() && &hi == v.hi());
            if inside {
                found.push((lo, hi, len));
            }
        }
    }
    let mut maximal: Vec<_> = found
        .iter()
        .filter(|(a, b, _)| {
            !found
                .iter()
                .any(|(c, d, _)| c <= a && b <= d && (c, d) != (a, b))
        })
        .cloned()
        .collect();
    maximal.sort_by(|x, y| (x.2, &x.0).cmp(&(y.2, &y.0)));
    maximal
}

fn scheme_exactness() -> Outcome {
    let s = middle_scheme(3)?;
    let got: Vec<_> = s
        .elements
        .iter()
        .map(|e| (e.interval.lo().clone(), e.interval.hi().clone(), e.tau))
        .collect();
    let oracle = brute_force_scheme(&iv(1, 2, 3), 3);
    let expected = vec![
        (q(1, 3), q(5, 12), 2),
        (q(7, 12), q(2, 3), 2),
        (q(5, 12), q(11, 24), 3),
        (q(13, 24), q(7, 12), 3),
    ];
    ensure(got == oracle, || {
        format!("scheme {got:?} vs brute force {oracle:?}")
    })?;
    ensure(got == expected, || format!("scheme {got:?}"))?;
    ensure(s.mass_deficit == q(1, 12), || {
        format!("deficit {}", s.mass_deficit)
    })?;
    Ok("4 elements match brute force, deficit 1/12".into())
}

fn condition_suite() -> Outcome {
    let d = doubling_map();
    let s = middle_scheme(6)?;
    let reports = check_conditions(
        &d,
        &s,
        6,
        &[SchemeCheck::H1, SchemeCheck::C, SchemeCheck::M],
        1 << 20,
    );
    for r in &reports {
        ensure(r.verdict.is_pass(), || r.to_string())?;
    }
    let nd = check_nested_or_disjoint(&d, &iv(1, 2, 3), 4, 1 << 20);
    ensure(nd.verdict.is_pass(), || nd.to_string())?;
    let t = build_tower(&d, 5, 1000).map_err(|e| e.to_string())?;
    let fr = embed_in_tower(&s, &t, &d, &reports, 256).map_err(|e| e.to_string())?;
    ensure(fr.verdict.is_pass(), || fr.to_string())?;

    let bad = counterexample_scheme(6);
    let m = check_conditions(&d, &bad, 6, &[SchemeCheck::M], 1 << 20).remove(0);
    let wv = |k| m.witness_value(k).unwrap_or("");
    ensure(
        m.condition == Condition::M
            && m.verdict == Verdict::Fail
            && wv("m") == "1"
            && wv("L") == "(0,1/2)"
            && wv("tau") == "2",
        || m.to_string(),
    )?;
    Ok(format!(
        "H1,C,M,NestedOrDisjoint,FirstReturn pass; counterexample: {m}"
    ))
}

fn kac_atomic() -> Outcome {
    let d = doubling_map();
    let s = middle_scheme(6)?;
    let t = build_tower(&d, 5, 1000).map_err(|e| e.to_string())?;
    let reports = check_conditions(&d, &s, 6, &SchemeCheck::BASIC, 1 << 20);
    let mu = PiecewiseMeasure::uniform_atoms(&[q(1, 7), q(2, 7), q(4, 7)]);
    let out = kac_roundtrip_check(&s, &t, &d, &mu, &reports, 6, &Budgets::default())
        .map_err(|e| e.to_string())?;
    ensure(out.nu == PiecewiseMeasure::dirac(q(4, 7)), || {
        format!("nu = {}", out.nu.dump())
    })?;
    ensure(out.lift.q == q(3, 1), || format!("Q = {}", out.lift.q))?;
    ensure(out.lift.measure == mu, || {
        format!("lift = {}", out.lift.measure.dump())
    })?;
    ensure(
        out.kac.verdict == Verdict::Pass && out.roundtrip.verdict == Verdict::Pass,
        || format!("{} / {}", out.kac, out.roundtrip),
    )?;
    Ok("nu = delta_{4/7}, Q = 3, lift = mu".into())
}

fn kac_lebesgue() -> Outcome {
    let d = doubling_map();
    let s = middle_scheme(12)?;
    ensure(s.mass_deficit == q(1, 3) * pow2(-11), || {
        format!("deficit {}", s.mass_deficit)
    })?;
    let t = build_tower(&d, 5, 1000).map_err(|e| e.to_string())?;
    let reports = check_conditions(&d, &s, 12, &SchemeCheck::BASIC, 1 << 20);
    let mu = PiecewiseMeasure::lebesgue(&iv(0, 1, 1));
    let out = kac_roundtrip_check(&s, &t, &d, &mu, &reports, 6, &Budgets::default())
        .map_err(|e| e.to_string())?;
    let three = q(3, 1);
    ensure(
        out.q_lower <= three && out.q_lower >= three - pow2(-10),
        || format!("Q = {}", out.q_lower),
    )?;
    ensure(out.tv <= pow2(-9), || format!("tv = {}", out.tv))?;
    ensure(
        out.kac.verdict.is_pass() && out.roundtrip.verdict.is_pass(),
        || format!("{} / {}", out.kac, out.roundtrip),
    )?;
    Ok(format!(
        "Q = {} in [3-2^-10,3], tv = {} <= 2^-9, deficit (1/3)2^-11",
        out.q_lower, out.tv
    ))
}

fn p1_p2_diagnostics() -> Outcome {
    let d = doubling_map();
    let reports = check_p1_p2(&d, 10, &DiagnosticConfig::default());
    let p1 = &reports[0];
    ensure(
        p1.condition == Condition::P1 && p1.note_value("orbit_closed") == Some("true"),
        || p1.to_string(),
    )?;
    for e in lap_entropy(&d, 10, 1 << 16).map_err(|e| e.to_string())? {
        ensure(e.laps == 1 << e.n, || format!("laps({}) = {}", e.n, e.laps))?;
        ensure((e.quotient - std::f64::consts::LN_2).abs() < 1e-12, || {
            format!("quotient({}) = {}", e.n, e.quotient)
        })?;
    }
    for n in 1..=10 {
        let p = refine_partition(&d, n, 1 << 16).map_err(|e| e.to_string())?;
        ensure(p.max_diameter == pow2(-(n as i64)), || {
            format!("diam P_{n} = {}", p.max_diameter)
        })?;
    }
    Ok(format!(
        "orbit {} closed, laps 2^n and diam 2^-n for n<=10",
        p1.note_value("orbit").unwrap_or("")
    ))
}

fn thermo() -> Outcome {
    let d = doubling_map();
    let phi = Potential::NegLogDerivative(q(1, 1));
    let s = middle_scheme(8)?;
    for n in 1..=4 {
        let v = variation_vn(&s, &d, &phi, n, 1 << 16).map_err(|e| e.to_string())?;
        ensure(v.value == q(0, 1), || v.to_string())?;
    }
    for n in 2..=8 {
        let r = recc_summability(&s, &d, &phi, &q(0, 1), 0.0, n).map_err(|e| e.to_string())?;
        let partial = q(1, 1) - pow2(-(n as i64 - 1));
        let tail = pow2(-(n as i64 - 1));
        ensure(
            r.sum1.partial == Quantity::Exact(partial)
                && r.sum1.tail == TailFlag::Bounded(tail)
                && r.sum1.verdict == Verdict::Pass,
            || r.sum1.to_string(),
        )?;
    }
    Ok("V_1..V_4 = 0, sum1 partial 1-2^-(N-1) with tail 2^-(N-1) for N=2..8".into())
}

fn invariant_suites() -> Outcome {
    let config = Config {
        cases: 128,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner =
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let (cases, with_scheme) = (Cell::new(0usize), Cell::new(0usize));
    runner
        .run(&common::expanding_map(), |case| {
            cases.set(cases.get() + 1);
            if common::all_invariants(&case).map_err(TestCaseError::fail)? {
                with_scheme.set(with_scheme.get() + 1);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let (cases, with_scheme) = (cases.get(), with_scheme.get());
    ensure(cases >= 100, || format!("only {cases} cases"))?;
    Ok(format!(
        "{cases} maps, {with_scheme} with a nice base, 0 violations"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("tower finiteness", tower_finiteness),
        ("nice certification", nice_certification),
        ("canonical scheme exactness", scheme_exactness),
        ("condition suite", condition_suite),
        ("kac round trip, atomic", kac_atomic),
        ("kac round trip, lebesgue", kac_lebesgue),
        ("P1/P2 diagnostics", p1_p2_diagnostics),
        ("thermo", thermo),
        ("invariant suites", invariant_suites),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: pass ({detail}) [{ms} ms]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: fail ({detail}) [{ms} ms]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
