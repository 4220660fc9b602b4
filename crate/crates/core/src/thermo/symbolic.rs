use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::scalar::Scalar;

/// `rational + Σ c_p·log p`, keeping logarithms of primes formal.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolicReal<S> {
    pub rational: S,
    pub logs: BTreeMap<u64, S>,
}

impl<S: Scalar> SymbolicReal<S> {
    pub fn zero() -> Self {
        Self {
            rational: S::zero(),
            logs: BTreeMap::new(),
        }
    }

    pub fn rational(r: S) -> Self {
        Self {
            rational: r,
            logs: BTreeMap::new(),
        }
    }

    /// `coeff · log|x|`, formal when `x` factors over small primes.
    pub fn log_of(x: &S, coeff: S) -> Self {
        match x.prime_factors() {
            Some(factors) if S::EXACT => {
                let mut out = Self::zero();
                for (p, e) in factors {
                    out.logs.insert(p, coeff.clone() * S::from_i64(e));
                }
                out.prune()
            }
            _ => Self::rational(coeff * S::from_f64_lossy(x.to_f64().abs().ln())),
        }
    }

    fn prune(mut self) -> Self {
        self.logs.retain(|_, c| !c.is_zero());
        self
    }

    pub fn scale(&self, k: &S) -> Self {
        Self {
            rational: self.rational.clone() * k.clone(),
            logs: self
                .logs
                .iter()
                .map(|(p, c)| (*p, c.clone() * k.clone()))
                .collect(),
        }
        .prune()
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.logs.is_empty()
    }

    /// The value when no logarithm survives.
    pub fn as_rational(&self) -> Option<&S> {
        self.logs.is_empty().then_some(&self.rational)
    }

    pub fn to_f64(&self) -> f64 {
        self.logs
            .iter()
            .fold(self.rational.to_f64(), |acc, (p, c)| {
                acc + c.to_f64() * (*p as f64).ln()
            })
    }

    /// `exp(self)` when it is rational: no rational part and integer
    /// coefficients on the logarithms.
    pub fn exp_exact(&self) -> Option<S> {
        if !S::EXACT || !self.rational.is_zero() {
            return None;
        }
        let mut out = S::one();
        for (p, c) in &self.logs {
            let e = c.to_f64().round() as i64;
            if !S::from_i64(e).same(c) {
                return None;
            }
            let base = S::from_i64(*p as i64);
            let pow = (0..e.unsigned_abs()).fold(S::one(), |acc, _| acc * base.clone());
            out = if e >= 0 { out * pow } else { out / pow };
        }
        Some(out)
    }
}

impl<S: Scalar> Add for SymbolicReal<S> {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self.rational = self.rational + rhs.rational;
        for (p, c) in rhs.logs {
            let slot = self.logs.entry(p).or_insert_with(S::zero);
            *slot = slot.clone() + c;
        }
        self.prune()
    }
}

impl<S: Scalar> Neg for SymbolicReal<S> {
    type Output = Self;

    fn neg(self) -> Self {
        self.scale(&-S::one())
    }
}

impl<S: Scalar> Sub for SymbolicReal<S> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<S: Scalar> fmt::Display for SymbolicReal<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.logs.is_empty() {
            return write!(f, "{}", self.rational.render_compact());
        }
        let mut terms = Vec::new();
        if !self.rational.is_zero() {
            terms.push(self.rational.render_compact());
        }
        for (p, c) in &self.logs {
            terms.push(format!("{}*log({p})", c.render_compact()));
        }
        write!(
            f,
            "{}~{}",
            terms.join("+"),
            super::render_numeric(self.to_f64())
        )
    }
}
