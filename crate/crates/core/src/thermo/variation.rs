use std::fmt;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::inducing::InducingScheme;
use crate::map::PiecewiseMap;
use crate::scalar::Scalar;

use super::potential::block_sum;
use super::{cylinder_levels, Potential};

/// `V_n(φ̄)` over the enumerated `n`-cylinders. When the enumeration was
/// capped the value is only a lower bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Variation<S> {
    pub n: usize,
    pub value: S,
    pub lower_bound: bool,
}

impl<S: Scalar> fmt::Display for Variation<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vn n={} value={}", self.n, self.value.render())?;
        if self.lower_bound {
            write!(f, " bound=lower")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitVerdict {
    Consistent,
    Violated,
    Inconclusive,
}

impl FitVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            FitVerdict::Consistent => "consistent",
            FitVerdict::Violated => "violated",
            FitVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolderFit {
    pub variations: Vec<(usize, f64)>,
    pub fitted_a: f64,
    pub fitted_gamma: f64,
    pub verdict: FitVerdict,
}

impl fmt::Display for HolderFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "fit A={} gamma={} verdict={}",
            super::render_numeric(self.fitted_a),
            super::render_numeric(self.fitted_gamma),
            self.verdict.as_str()
        )
    }
}

/// On an affine block `φ̄` is affine, so its oscillation over a cylinder is
/// the difference of the endpoint values.
pub fn variation_vn<S: Scalar>(
    scheme: &InducingScheme<S>,
    map: &PiecewiseMap<S>,
    phi: &Potential<S>,
    n: usize,
    word_budget: usize,
) -> Result<Variation<S>> {
    if n == 0 {
        return Err(Error::Precondition("variation needs n >= 1".into()));
    }
    let (mut vars, _) = variation_range(scheme, map, phi, n..=n, word_budget)?;
    Ok(vars.pop().expect("one length requested"))
}

/// Slope of `φ̄` on each element; its oscillation over a cylinder is
/// `|slope|·diam`.
fn block_slopes<S: Scalar>(
    scheme: &InducingScheme<S>,
    map: &PiecewiseMap<S>,
    phi: &Potential<S>,
) -> Vec<S> {
    scheme
        .elements
        .iter()
        .map(|j| {
            let iv = &j.interval;
            let diff = block_sum(map, phi, &j.branch_word, iv.hi())
                - block_sum(map, phi, &j.branch_word, iv.lo());
            let d = match diff.as_rational() {
                Some(r) => r.abs(),
                None => S::from_f64_lossy(diff.to_f64().abs()),
            };
            d / iv.length()
        })
        .collect()
}

pub fn variation_range<S: Scalar>(
    scheme: &InducingScheme<S>,
    map: &PiecewiseMap<S>,
    phi: &Potential<S>,
    ns: RangeInclusive<usize>,
    word_budget: usize,
) -> Result<(Vec<Variation<S>>, HolderFit)> {
    if *ns.start() == 0 {
        return Err(Error::Precondition("variation needs n >= 1".into()));
    }
    if !map.is_affine() {
        return Err(Error::NonAffine);
    }
    phi.validate(map)?;
    let slopes = block_slopes(scheme, map, phi);
    let levels = cylinder_levels(scheme, map, *ns.end(), word_budget);
    let vars: Vec<Variation<S>> = ns
        .map(|n| {
            let (cyls, capped) = &levels[n - 1];
            let value = cyls
                .iter()
                .map(|c| slopes[c.word[0]].clone() * c.diameter.clone())
                .fold(S::zero(), |m, d| if d > m { d } else { m });
            Variation {
                n,
                value,
                lower_bound: *capped,
            }
        })
        .collect();
    let fit = holder_fit(&vars);
    Ok((vars, fit))
}

/// Least squares for `log V_n = log A + n log γ` over the nonzero values.
/// `A` is then raised so that `V_n <= A γ^n` on every computed `n`.
/// "Violated" needs a fitted `γ >= 1` together with values that never
/// decrease along the computed range.
pub fn holder_fit<S: Scalar>(vars: &[Variation<S>]) -> HolderFit {
    let variations: Vec<(usize, f64)> = vars.iter().map(|v| (v.n, v.value.to_f64())).collect();
    let pts: Vec<(f64, f64)> = variations
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|&(n, v)| (n as f64, v.ln()))
        .collect();
    let done = |fitted_a, fitted_gamma, verdict| HolderFit {
        variations: variations.clone(),
        fitted_a,
        fitted_gamma,
        verdict,
    };
    match pts.len() {
        0 => return done(0.0, 0.0, FitVerdict::Consistent),
        1 => return done(pts[0].1.exp(), 1.0, FitVerdict::Inconclusive),
        _ => {}
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let gamma = slope.exp();
    let mut a = (my - slope * mx).exp();
    if gamma < 1.0 {
        for &(n, v) in &variations {
            a = a.max(v / gamma.powi(n as i32));
        }
        return done(a, gamma, FitVerdict::Consistent);
    }
    let nonzero: Vec<f64> = variations
        .iter()
        .map(|p| p.1)
        .filter(|v| *v > 0.0)
        .collect();
    let never_decays = nonzero.windows(2).all(|w| w[1] >= w[0]);
    done(
        a,
        gamma,
        if never_decays {
            FitVerdict::Violated
        } else {
            FitVerdict::Inconclusive
        },
    )
}
